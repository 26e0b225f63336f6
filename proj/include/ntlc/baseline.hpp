#ifndef NTLC_BASELINE_HPP
#define NTLC_BASELINE_HPP

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "ntlc/traffic.hpp"

namespace ntlc {

inline constexpr int kIntervalsPerSample = 20;
inline constexpr double kIntervalMs = 3000.0;
inline constexpr int kIntervalFeatureCount = 60;
inline constexpr int kStatBlockSize = 12;

// 12 per-second counts followed by 4 stat blocks of 12 values each:
// packet sizes up/down, then inter-arrival gaps (ms) up/down.
using IntervalFeatures = std::array<double, kIntervalFeatureCount>;
using BaselineSequence = std::array<IntervalFeatures, kIntervalsPerSample>;

// Entropy of the empirical distribution over exact distinct values, in bits.
double shannon_entropy(const std::vector<double>& values);

// Bandt-Pompe ordinal pattern entropy in bits; ties rank by earlier index.
double permutation_entropy(const std::vector<double>& values, int order);

// [max, min, mean, median, variance, |x-mean|>2*sigma count, |x-mean|>sigma
// count, Shannon entropy, permutation entropy orders 2..5]; zeros when empty.
std::array<double, kStatBlockSize> stat_block(const std::vector<double>& values);

BaselineSequence extract_baseline(const TraceSample& sample, const Subnet& client_subnet);

// Feature file: `sample_id,v1,...,v1200` per line, interval-major.
void write_baselines(const std::vector<std::pair<std::string, BaselineSequence>>& rows,
                     std::ostream& out);
std::vector<std::pair<std::string, BaselineSequence>> read_baselines(std::istream& in);

} // namespace ntlc

#endif
