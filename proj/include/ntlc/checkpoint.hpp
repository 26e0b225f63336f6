#ifndef NTLC_CHECKPOINT_HPP
#define NTLC_CHECKPOINT_HPP

#include <optional>
#include <string>

#include "ntlc/harness.hpp"

namespace ntlc {

inline constexpr std::string_view kToolkitVersion = "0.1.0";
inline constexpr std::string_view kCheckpointMagic = "NTLC1";

// Self-contained trained model: config, inline vocabulary, split recipe, and
// raw little-endian float32 parameters in sorted-name order.
struct Checkpoint {
    Model<float> model;
    std::optional<Vocabulary> vocab;  // absent for cruz
    SplitSpec split;
    int target_class = -1;  // class index for categorical-2 checkpoints
};

void save_checkpoint(const std::string& path, Model<float>& model, const Vocabulary* vocab,
                     const SplitSpec& split, int target_class);

Checkpoint load_checkpoint(const std::string& path);

} // namespace ntlc

#endif
