#ifndef NTLC_HARNESS_HPP
#define NTLC_HARNESS_HPP

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ntlc/baseline.hpp"
#include "ntlc/featurizer.hpp"
#include "ntlc/nn.hpp"
#include "ntlc/optim.hpp"

namespace ntlc {

// Labeled feature rows; language sentences or Cruz baseline sequences.
struct FeatureData {
    bool is_language = true;
    std::vector<std::string> ids;
    std::vector<LabelSet> labels;
    std::vector<FeatureSentence> sentences;
    std::vector<BaselineSequence> baselines;

    size_t size() const { return ids.size(); }
};

FeatureData load_feature_data(const std::string& features_path, const std::string& labels_path);

struct SplitSpec {
    double train_fraction = 0.8;
    uint64_t seed = 0;
    bool stratify = false;  // per exact label combination
};

struct Split {
    std::vector<size_t> train, test;
};

Split split_dataset(const std::vector<LabelSet>& labels, const SplitSpec& spec);

// Undersamples the majority side to the minority count, preserving the
// original sample order of the survivors.
std::vector<size_t> balance_binary(const std::vector<size_t>& train,
                                   const std::vector<LabelSet>& labels, int target_class,
                                   uint64_t seed);

// Standard split of everything except samples bearing both classes; those all
// land in the test side.
Split knockout_split(const std::vector<LabelSet>& labels, int class_a, int class_b,
                     const SplitSpec& spec);

struct TrainOptions {
    int epochs = 0;      // 0 -> architecture default (HAN 30, others 50)
    int batch_size = 32;
    uint64_t seed = 0;
    std::optional<OptimizerConfig> optimizer;  // absent -> per-architecture default
    double clip_norm = 5.0;  // recurrent architectures only
};

OptimizerConfig default_optimizer(Arch arch);
int default_epochs(Arch arch);

struct TrainResult {
    std::vector<double> loss_history;  // one mean loss per epoch
};

Vocabulary vocabulary_from(const FeatureData& data, const std::vector<size_t>& indices);

// target_class: class index for categorical-2 training, -1 for multilabel.
TrainResult train(Model<float>& model, const FeatureData& data, const Vocabulary* vocab,
                  const std::vector<size_t>& indices, int target_class,
                  const TrainOptions& opts);

// Chunked forward over `indices`; rows in index order.
Tensor<float> predict_indices(Model<float>& model, const FeatureData& data,
                              const Vocabulary* vocab, const std::vector<size_t>& indices);

// Hit when the true label's neuron is strictly the higher of the two.
double eval_binary(Model<float>& model, const FeatureData& data, const Vocabulary* vocab,
                   const std::vector<size_t>& test, int target_class);

struct RocPoint {
    double fpr = 0, tpr = 0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // staircase from (0,0) to (1,1)
    double auc = 0;
};

// Threshold sweep over distinct scores with trapezoidal area; equals the
// pairwise estimator P(s_pos > s_neg) + P(s_pos = s_neg)/2.
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<uint8_t>& truth);

struct ClassReport {
    std::string class_name;
    bool degenerate = false;  // one-sided truth; no AUC
    double auc = 0;
    std::vector<RocPoint> roc;
    std::vector<double> scores;
    std::vector<uint8_t> truth;
};

struct BinaryResult {
    std::string target;
    double accuracy = 0;
    std::vector<std::array<double, 2>> activations;
    std::vector<uint8_t> truth;
};

struct KnockoutResult {
    std::string class_a, class_b;
    std::vector<std::array<double, 2>> activations;  // (class_a, class_b) per sample
    double max_rate = 0;   // fraction with max(a, b) >= 0.5
    double both_rate = 0;  // fraction with both >= 0.5
    bool train_pair_free = false;
};

struct SweepResult {
    std::vector<std::pair<int, double>> accuracy_by_size;
};

struct EvalReport {
    std::map<std::string, std::string> config;
    uint64_t seed = 0;
    int subset_min_clients = 1;
    std::vector<double> loss_history;
    std::optional<BinaryResult> binary;
    std::vector<ClassReport> per_class;
    std::optional<KnockoutResult> knockout;
    std::optional<SweepResult> sweep;
};

// Per-class ROC/AUC over the test subset with at least `min_clients` labels.
EvalReport eval_multilabel(Model<float>& model, const FeatureData& data,
                           const Vocabulary* vocab, const std::vector<size_t>& test,
                           int min_clients);

// Per-sample activations of the knocked-out pair plus the two summary rates.
KnockoutResult knockout_eval(Model<float>& model, const FeatureData& data,
                             const Vocabulary* vocab,
                             const std::vector<size_t>& pair_samples, int class_a,
                             int class_b);

// Trains one categorical-2 model per embedding size on an identical
// split/balance/seed and reports test accuracy per size.
SweepResult embedding_sweep(Arch arch, const std::vector<int>& sizes, const FeatureData& data,
                            int target_class, uint64_t seed, const SplitSpec& split_spec,
                            TrainOptions opts);

} // namespace ntlc

#endif
