#include "ntlc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ntlc/error.hpp"
#include "ntlc/rng.hpp"

namespace ntlc {

FeatureData load_feature_data(const std::string& features_path, const std::string& labels_path) {
    std::ifstream lin(labels_path);
    if (!lin) throw IoError("cannot open labels file '" + labels_path + "'");
    auto label_rows = read_labels(lin);
    std::map<std::string, LabelSet> by_id;
    for (auto& [id, labels] : label_rows) by_id[id] = labels;

    std::ifstream fin(features_path);
    if (!fin) throw IoError("cannot open features file '" + features_path + "'");
    std::string first_line;
    std::getline(fin, first_line);
    fin.seekg(0);

    FeatureData data;
    data.is_language = first_line.find('\t') != std::string::npos;
    auto lookup = [&](const std::string& id) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw MalformedRow("sample '" + id + "' missing from labels file");
        return it->second;
    };
    if (data.is_language) {
        for (auto& [id, sentence] : read_sentences(fin)) {
            data.labels.push_back(lookup(id));
            data.ids.push_back(id);
            data.sentences.push_back(std::move(sentence));
        }
    } else {
        for (auto& [id, seq] : read_baselines(fin)) {
            data.labels.push_back(lookup(id));
            data.ids.push_back(id);
            data.baselines.push_back(seq);
        }
    }
    if (data.ids.empty()) throw MalformedRow("features file '" + features_path + "' is empty");
    return data;
}

Split split_dataset(const std::vector<LabelSet>& labels, const SplitSpec& spec) {
    if (labels.empty()) throw BadConfig("cannot split an empty dataset");
    if (spec.train_fraction <= 0 || spec.train_fraction >= 1)
        throw BadConfig("train_fraction must be in (0,1)");

    auto split_group = [&](std::vector<size_t>& group, uint64_t seed, Split& out) {
        Rng rng(seed);
        rng.shuffle(group.data(), group.size());
        size_t n_train = static_cast<size_t>(spec.train_fraction * static_cast<double>(group.size()));
        for (size_t i = 0; i < group.size(); ++i)
            (i < n_train ? out.train : out.test).push_back(group[i]);
    };

    Split out;
    if (spec.stratify) {
        std::map<uint8_t, std::vector<size_t>> groups;
        for (size_t i = 0; i < labels.size(); ++i) groups[labels[i].bits()].push_back(i);
        for (auto& [bits, group] : groups)
            split_group(group, derive_seed(spec.seed, bits), out);
        std::sort(out.train.begin(), out.train.end());
        std::sort(out.test.begin(), out.test.end());
    } else {
        std::vector<size_t> all(labels.size());
        for (size_t i = 0; i < all.size(); ++i) all[i] = i;
        split_group(all, spec.seed, out);
    }
    return out;
}

std::vector<size_t> balance_binary(const std::vector<size_t>& train,
                                   const std::vector<LabelSet>& labels, int target_class,
                                   uint64_t seed) {
    std::vector<size_t> pos, neg;
    for (size_t idx : train)
        (labels[idx].contains(target_class) ? pos : neg).push_back(idx);
    if (pos.empty() || neg.empty())
        throw DegenerateClass("class " + std::string(kClassNames[static_cast<size_t>(target_class)]) +
                              ": " + std::to_string(pos.size()) + " positive / " +
                              std::to_string(neg.size()) + " negative training samples");
    if (pos.size() == neg.size()) return train;

    bool pos_is_majority = pos.size() > neg.size();
    std::vector<size_t>& majority = pos_is_majority ? pos : neg;
    size_t keep = std::min(pos.size(), neg.size());
    Rng rng(seed);
    rng.shuffle(majority.data(), majority.size());
    majority.resize(keep);
    std::vector<bool> kept_majority(labels.size(), false);
    for (size_t idx : majority) kept_majority[idx] = true;
    std::vector<size_t> out;
    out.reserve(2 * keep);
    for (size_t idx : train) {
        bool in_majority_side = labels[idx].contains(target_class) == pos_is_majority;
        if (!in_majority_side || kept_majority[idx]) out.push_back(idx);
    }
    return out;
}

Split knockout_split(const std::vector<LabelSet>& labels, int class_a, int class_b,
                     const SplitSpec& spec) {
    LabelSet pair;
    pair.add(class_a);
    pair.add(class_b);
    std::vector<size_t> pair_samples;
    std::vector<LabelSet> rest_labels;
    std::vector<size_t> rest_index;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].contains_all(pair)) {
            pair_samples.push_back(i);
        } else {
            rest_index.push_back(i);
            rest_labels.push_back(labels[i]);
        }
    }
    if (pair_samples.empty())
        throw NoPairSamples("no sample bears both " +
                            std::string(kClassNames[static_cast<size_t>(class_a)]) + " and " +
                            std::string(kClassNames[static_cast<size_t>(class_b)]));
    Split rest = split_dataset(rest_labels, spec);
    Split out;
    for (size_t i : rest.train) out.train.push_back(rest_index[i]);
    for (size_t i : rest.test) out.test.push_back(rest_index[i]);
    out.test.insert(out.test.end(), pair_samples.begin(), pair_samples.end());
    return out;
}

OptimizerConfig default_optimizer(Arch arch) {
    OptimizerConfig cfg;
    cfg.kind = arch == Arch::Berger ? OptimizerKind::Rmsprop : OptimizerKind::Adam;
    return cfg;
}

int default_epochs(Arch arch) { return arch == Arch::Han ? 30 : 50; }

Vocabulary vocabulary_from(const FeatureData& data, const std::vector<size_t>& indices) {
    std::vector<FeatureSentence> corpus;
    corpus.reserve(indices.size());
    for (size_t idx : indices) corpus.push_back(data.sentences[idx]);
    return build_vocabulary(corpus);
}

namespace {

void check_feature_kind(const Model<float>& model, const FeatureData& data,
                        const Vocabulary* vocab) {
    bool wants_language = model.config.arch != Arch::Cruz;
    if (wants_language != data.is_language)
        throw BadConfig(std::string(arch_name(model.config.arch)) + " expects " +
                        (wants_language ? "language" : "baseline") + " features but got " +
                        (data.is_language ? "language" : "baseline"));
    if (wants_language && !vocab)
        throw BadConfig("language-feature models need a vocabulary");
}

Batch<float> make_batch(const FeatureData& data, const Vocabulary* vocab,
                        const size_t* idx, int rows) {
    Batch<float> batch;
    if (data.is_language) {
        batch.tokens = IntTensor({rows, kWordsPerSentence});
        for (int r = 0; r < rows; ++r) {
            auto ids = tokenize(data.sentences[idx[r]], *vocab);
            for (int j = 0; j < kWordsPerSentence; ++j)
                batch.tokens.v[static_cast<size_t>(r) * kWordsPerSentence + static_cast<size_t>(j)] =
                    ids[static_cast<size_t>(j)];
        }
    } else {
        batch.reals = Tensor<float>({rows, kIntervalsPerSample, kIntervalFeatureCount});
        for (int r = 0; r < rows; ++r) {
            const BaselineSequence& seq = data.baselines[idx[r]];
            float* dst = batch.reals.data() +
                         static_cast<int64_t>(r) * kIntervalsPerSample * kIntervalFeatureCount;
            for (int i = 0; i < kIntervalsPerSample; ++i)
                for (int j = 0; j < kIntervalFeatureCount; ++j)
                    *dst++ = static_cast<float>(seq[static_cast<size_t>(i)][static_cast<size_t>(j)]);
        }
    }
    return batch;
}

Tensor<float> make_targets(const std::vector<LabelSet>& labels, const size_t* idx, int rows,
                           OutputMode mode, int target_class) {
    int outs = mode == OutputMode::Categorical2 ? 2 : kNumClasses;
    Tensor<float> t({rows, outs});
    for (int r = 0; r < rows; ++r) {
        const LabelSet& l = labels[idx[r]];
        if (mode == OutputMode::Categorical2) {
            bool positive = l.contains(target_class);
            t.v[static_cast<size_t>(r) * 2 + 0] = positive ? 0.f : 1.f;
            t.v[static_cast<size_t>(r) * 2 + 1] = positive ? 1.f : 0.f;
        } else {
            for (int c = 0; c < kNumClasses; ++c)
                t.v[static_cast<size_t>(r) * static_cast<size_t>(outs) + static_cast<size_t>(c)] =
                    l.contains(c) ? 1.f : 0.f;
        }
    }
    return t;
}

} // namespace

TrainResult train(Model<float>& model, const FeatureData& data, const Vocabulary* vocab,
                  const std::vector<size_t>& indices, int target_class,
                  const TrainOptions& opts) {
    check_feature_kind(model, data, vocab);
    if (indices.empty()) throw BadConfig("empty training set");
    if (model.config.mode == OutputMode::Categorical2 && target_class < 0)
        throw BadConfig("categorical-2 training needs a target class");
    if (opts.batch_size < 1) throw BadConfig("batch_size must be >= 1");
    int epochs = opts.epochs > 0 ? opts.epochs : default_epochs(model.config.arch);
    Optimizer<float> optimizer(opts.optimizer ? *opts.optimizer
                                              : default_optimizer(model.config.arch));

    TrainResult result;
    result.loss_history.reserve(static_cast<size_t>(epochs));
    std::vector<size_t> order(indices);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::copy(indices.begin(), indices.end(), order.begin());
        Rng rng(derive_seed(opts.seed, static_cast<uint64_t>(epoch)));
        rng.shuffle(order.data(), order.size());
        double loss_sum = 0;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(opts.batch_size)) {
            int rows = static_cast<int>(std::min(order.size() - start,
                                                 static_cast<size_t>(opts.batch_size)));
            Batch<float> batch = make_batch(data, vocab, order.data() + start, rows);
            Tensor<float> targets =
                make_targets(data.labels, order.data() + start, rows, model.config.mode,
                             target_class);
            Tape<float> tape;
            auto out = model.forward(tape, batch);
            auto loss = tape.bce_loss(out, std::move(targets));
            double loss_value = static_cast<double>(tape.val(loss).v[0]);
            if (!std::isfinite(loss_value))
                throw NonFiniteLoss("epoch " + std::to_string(epoch + 1) + ", batch at sample " +
                                    std::to_string(start) + ": loss " +
                                    std::to_string(loss_value));
            zero_grads(model.params);
            tape.backward(loss);
            if (model.config.is_recurrent() && opts.clip_norm > 0)
                clip_global_norm(model.params, opts.clip_norm);
            optimizer.step(model.params);
            loss_sum += loss_value * rows;
        }
        result.loss_history.push_back(loss_sum / static_cast<double>(order.size()));
    }
    return result;
}

Tensor<float> predict_indices(Model<float>& model, const FeatureData& data,
                              const Vocabulary* vocab, const std::vector<size_t>& indices) {
    check_feature_kind(model, data, vocab);
    int outs = model.config.outputs();
    Tensor<float> out({static_cast<int>(indices.size()), outs});
    constexpr size_t kChunk = 32;
    for (size_t start = 0; start < indices.size(); start += kChunk) {
        int rows = static_cast<int>(std::min(indices.size() - start, kChunk));
        Batch<float> batch = make_batch(data, vocab, indices.data() + start, rows);
        Tensor<float> act = predict(model, batch);
        std::copy(act.v.begin(), act.v.end(),
                  out.v.begin() + static_cast<int64_t>(start) * outs);
    }
    return out;
}

double eval_binary(Model<float>& model, const FeatureData& data, const Vocabulary* vocab,
                   const std::vector<size_t>& test, int target_class) {
    if (model.config.mode != OutputMode::Categorical2)
        throw BadConfig("eval_binary needs a categorical-2 model");
    if (test.empty()) throw BadConfig("empty test set");
    Tensor<float> act = predict_indices(model, data, vocab, test);
    size_t hits = 0;
    for (size_t i = 0; i < test.size(); ++i) {
        float a0 = act.v[i * 2], a1 = act.v[i * 2 + 1];
        bool positive = data.labels[test[i]].contains(target_class);
        if (positive ? a1 > a0 : a0 > a1) ++hits;  // ties miss
    }
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<uint8_t>& truth) {
    if (scores.size() != truth.size()) throw BadConfig("roc_auc: size mismatch");
    size_t pos = 0, neg = 0;
    for (uint8_t t : truth) (t ? pos : neg)++;
    if (pos == 0 || neg == 0)
        throw DegenerateLabels("roc_auc needs both positive and negative samples");

    std::vector<size_t> order(scores.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return scores[a] > scores[b];
    });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    double auc = 0;
    size_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        size_t dtp = 0, dfp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (truth[order[j]] ? dtp : dfp)++;
            ++j;
        }
        double tpr0 = static_cast<double>(tp) / static_cast<double>(pos);
        tp += dtp;
        fp += dfp;
        double tpr1 = static_cast<double>(tp) / static_cast<double>(pos);
        double dfpr = static_cast<double>(dfp) / static_cast<double>(neg);
        auc += dfpr * 0.5 * (tpr0 + tpr1);
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg), tpr1});
        i = j;
    }
    curve.auc = auc;
    return curve;
}

EvalReport eval_multilabel(Model<float>& model, const FeatureData& data,
                           const Vocabulary* vocab, const std::vector<size_t>& test,
                           int min_clients) {
    if (model.config.mode != OutputMode::Multilabel6)
        throw BadConfig("eval_multilabel needs a multilabel-6 model");
    std::vector<size_t> subset;
    for (size_t idx : test)
        if (data.labels[idx].count() >= min_clients) subset.push_back(idx);

    EvalReport report;
    report.subset_min_clients = min_clients;
    if (subset.empty()) {
        for (int c = 0; c < kNumClasses; ++c) {
            ClassReport cr;
            cr.class_name = kClassNames[static_cast<size_t>(c)];
            cr.degenerate = true;
            report.per_class.push_back(std::move(cr));
        }
        return report;
    }
    Tensor<float> act = predict_indices(model, data, vocab, subset);
    for (int c = 0; c < kNumClasses; ++c) {
        ClassReport cr;
        cr.class_name = kClassNames[static_cast<size_t>(c)];
        cr.scores.reserve(subset.size());
        cr.truth.reserve(subset.size());
        for (size_t i = 0; i < subset.size(); ++i) {
            cr.scores.push_back(static_cast<double>(
                act.v[i * static_cast<size_t>(kNumClasses) + static_cast<size_t>(c)]));
            cr.truth.push_back(data.labels[subset[i]].contains(c) ? 1 : 0);
        }
        try {
            RocCurve curve = roc_auc(cr.scores, cr.truth);
            cr.auc = curve.auc;
            cr.roc = std::move(curve.points);
        } catch (const DegenerateLabels&) {
            cr.degenerate = true;  // reported as absent AUC, not a failure
        }
        report.per_class.push_back(std::move(cr));
    }
    return report;
}

KnockoutResult knockout_eval(Model<float>& model, const FeatureData& data,
                             const Vocabulary* vocab,
                             const std::vector<size_t>& pair_samples, int class_a,
                             int class_b) {
    if (model.config.mode != OutputMode::Multilabel6)
        throw BadConfig("knockout_eval needs a multilabel-6 model");
    KnockoutResult result;
    result.class_a = kClassNames[static_cast<size_t>(class_a)];
    result.class_b = kClassNames[static_cast<size_t>(class_b)];
    if (pair_samples.empty()) return result;
    Tensor<float> act = predict_indices(model, data, vocab, pair_samples);
    size_t max_hits = 0, both_hits = 0;
    for (size_t i = 0; i < pair_samples.size(); ++i) {
        double a = act.v[i * static_cast<size_t>(kNumClasses) + static_cast<size_t>(class_a)];
        double b = act.v[i * static_cast<size_t>(kNumClasses) + static_cast<size_t>(class_b)];
        result.activations.push_back({a, b});
        if (std::max(a, b) >= 0.5) ++max_hits;
        if (a >= 0.5 && b >= 0.5) ++both_hits;
    }
    result.max_rate = static_cast<double>(max_hits) / static_cast<double>(pair_samples.size());
    result.both_rate = static_cast<double>(both_hits) / static_cast<double>(pair_samples.size());
    return result;
}

SweepResult embedding_sweep(Arch arch, const std::vector<int>& sizes, const FeatureData& data,
                            int target_class, uint64_t seed, const SplitSpec& split_spec,
                            TrainOptions opts) {
    if (sizes.empty()) throw BadConfig("embedding sweep needs at least one size");
    if (arch == Arch::Cruz) throw BadConfig("cruz has no embedding to sweep");
    Split split = split_dataset(data.labels, split_spec);
    std::vector<size_t> balanced =
        balance_binary(split.train, data.labels, target_class, derive_seed(seed, 0xBA1A));
    Vocabulary vocab = vocabulary_from(data, balanced);

    SweepResult result;
    for (int size : sizes) {
        ModelConfig config;
        config.arch = arch;
        config.mode = OutputMode::Categorical2;
        config.embedding_dim = size;
        config.seed = seed;
        Model<float> model = build_model<float>(vocab.size(), config);
        TrainOptions run_opts = opts;
        run_opts.seed = seed;
        train(model, data, &vocab, balanced, target_class, run_opts);
        double accuracy = eval_binary(model, data, &vocab, split.test, target_class);
        result.accuracy_by_size.emplace_back(size, accuracy);
    }
    return result;
}

} // namespace ntlc
