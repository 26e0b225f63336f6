#include <doctest.h>

#include <cmath>
#include <set>

#include "ntlc/error.hpp"
#include "ntlc/harness.hpp"
#include "ntlc/rng.hpp"
#include "oracles.hpp"

using namespace ntlc;

namespace {

// Separable two-class language data: positives lean on high-volume words.
FeatureData synthetic_language(int n_pos, int n_neg, uint64_t seed) {
    FeatureData data;
    Rng rng(seed);
    auto sentence_of = [&](bool positive) {
        FeatureSentence s(kWordsPerSentence);
        for (int i = 0; i < kWordsPerSentence; ++i) {
            const char* word;
            if (positive)
                word = rng.below(4) == 0 ? "bcdd" : "bbde";
            else
                word = rng.below(4) == 0 ? "aaab" : "aabb";
            s[static_cast<size_t>(i)] = make_word(word);
        }
        return s;
    };
    int yt = class_index("YouTube");
    for (int i = 0; i < n_pos + n_neg; ++i) {
        bool positive = i < n_pos;
        data.ids.push_back("s" + std::to_string(i));
        LabelSet l;
        if (positive) l.add(yt);
        data.labels.push_back(l);
        data.sentences.push_back(sentence_of(positive));
    }
    return data;
}

// A model whose outputs are fixed by its output bias, whatever the input.
Model<float> hardwired(OutputMode mode, const std::vector<double>& activations,
                       int vocab_size = 8) {
    ModelConfig c;
    c.arch = Arch::Kim;
    c.mode = mode;
    c.embedding_dim = 2;
    c.kim_channels = 2;
    auto m = build_kim<float>(vocab_size, c);
    for (auto& p : m.params) p->value.fill(0.0f);
    auto& bias = m.find("output.bias");
    for (size_t i = 0; i < activations.size(); ++i) {
        double a = activations[i];
        bias.value.v[i] = static_cast<float>(std::log(a / (1.0 - a)));
    }
    return m;
}

double loss_of(Model<float>& model, const FeatureData& data, const Vocabulary& vocab,
               const std::vector<size_t>& indices, int target_class) {
    Tensor<float> act = predict_indices(model, data, &vocab, indices);
    double loss = 0;
    for (size_t i = 0; i < indices.size(); ++i) {
        bool positive = data.labels[indices[i]].contains(target_class);
        double p0 = std::clamp(static_cast<double>(act.v[i * 2]), 1e-7, 1.0 - 1e-7);
        double p1 = std::clamp(static_cast<double>(act.v[i * 2 + 1]), 1e-7, 1.0 - 1e-7);
        double y0 = positive ? 0 : 1, y1 = positive ? 1 : 0;
        loss -= y0 * std::log(p0) + (1 - y0) * std::log(1 - p0);
        loss -= y1 * std::log(p1) + (1 - y1) * std::log(1 - p1);
    }
    return loss / (2.0 * static_cast<double>(indices.size()));
}

std::vector<LabelSet> labels_of(const FeatureData& d) { return d.labels; }

} // namespace

TEST_CASE("split_dataset produces a seeded 80/20 partition") {
    std::vector<LabelSet> labels(100);
    SplitSpec spec;
    spec.seed = 7;
    Split a = split_dataset(labels, spec);
    CHECK(a.train.size() == 80);
    CHECK(a.test.size() == 20);
    Split b = split_dataset(labels, spec);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    spec.seed = 8;
    Split c = split_dataset(labels, spec);
    CHECK(a.train != c.train);

    std::set<size_t> all(a.train.begin(), a.train.end());
    for (size_t i : a.test) CHECK(all.insert(i).second);  // disjoint
    CHECK(all.size() == 100);                             // exhaustive
}

TEST_CASE("stratified split keeps combinations balanced") {
    std::vector<LabelSet> labels;
    for (int i = 0; i < 50; ++i) labels.push_back(LabelSet::parse("YouTube"));
    for (int i = 0; i < 50; ++i) labels.push_back(LabelSet::parse("Netflix"));
    SplitSpec spec;
    spec.seed = 3;
    spec.stratify = true;
    Split s = split_dataset(labels, spec);
    int yt_train = 0;
    for (size_t i : s.train) yt_train += labels[i] == LabelSet::parse("YouTube");
    CHECK(yt_train == 40);
    CHECK(s.train.size() == 80);
}

TEST_CASE("balance_binary undersamples the majority side") {
    std::vector<LabelSet> labels;
    for (int i = 0; i < 70; ++i) labels.push_back(LabelSet::parse("YouTube"));
    for (int i = 0; i < 30; ++i) labels.push_back(LabelSet{});
    std::vector<size_t> train(100);
    for (size_t i = 0; i < 100; ++i) train[i] = i;
    int yt = class_index("YouTube");
    auto balanced = balance_binary(train, labels, yt, 5);
    CHECK(balanced.size() == 60);
    int pos = 0;
    for (size_t i : balanced) pos += labels[i].contains(yt);
    CHECK(pos == 30);
    // Survivors keep their original relative order.
    for (size_t i = 1; i < balanced.size(); ++i) CHECK(balanced[i - 1] < balanced[i]);

    // Negative-majority direction: 10 positives against 60 negatives.
    std::vector<LabelSet> labels2(100);
    for (size_t i = 0; i < 10; ++i) labels2[i] = LabelSet::parse("YouTube");
    std::vector<size_t> neg_major(70);
    for (size_t i = 0; i < 70; ++i) neg_major[i] = i;  // 10 pos, 60 neg
    auto balanced2 = balance_binary(neg_major, labels2, yt, 7);
    CHECK(balanced2.size() == 20);
    int pos2 = 0;
    for (size_t i : balanced2) pos2 += labels2[i].contains(yt);
    CHECK(pos2 == 10);

    // Already balanced input comes back unchanged.
    std::vector<size_t> even;
    for (size_t i = 40; i < 100; ++i) even.push_back(i);
    CHECK(balance_binary(even, labels, yt, 9) == even);

    std::vector<LabelSet> one_sided(10, LabelSet{});
    std::vector<size_t> idx(10);
    for (size_t i = 0; i < 10; ++i) idx[i] = i;
    CHECK_THROWS_AS(balance_binary(idx, one_sided, yt, 1), DegenerateClass);
}

TEST_CASE("roc_auc anchors: separation, ties and degeneracy") {
    RocCurve perfect = roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0});
    CHECK(perfect.auc == doctest::Approx(1.0));
    CHECK(perfect.points.front().fpr == 0.0);
    CHECK(perfect.points.front().tpr == 0.0);
    CHECK(perfect.points.back().fpr == 1.0);
    CHECK(perfect.points.back().tpr == 1.0);

    RocCurve flat = roc_auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0});
    CHECK(flat.auc == doctest::Approx(0.5));

    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {1, 1}), DegenerateLabels);
}

TEST_CASE("roc_auc equals the pairwise estimator on seeded score sets") {
    Rng rng(2025);
    for (int trial = 0; trial < 25; ++trial) {
        size_t n = 20 + rng.below(200);
        std::vector<double> scores(n);
        std::vector<uint8_t> truth(n);
        bool quantize = trial % 3 == 0;  // force score ties
        bool has_pos = false, has_neg = false;
        for (size_t i = 0; i < n; ++i) {
            scores[i] = quantize ? std::floor(rng.uniform() * 8) / 8 : rng.uniform();
            truth[i] = rng.below(2) ? 1 : 0;
            (truth[i] ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        RocCurve curve = roc_auc(scores, truth);
        CHECK(std::abs(curve.auc - oracle::pairwise_auc(scores, truth)) < 1e-9);
        for (size_t i = 1; i < curve.points.size(); ++i) {
            CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
            CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
        }
    }
}

TEST_CASE("eval_binary scores a hardwired constant model") {
    auto always_negative = hardwired(OutputMode::Categorical2, {0.9, 0.1});
    FeatureData all_neg = synthetic_language(0, 10, 1);
    FeatureData all_pos = synthetic_language(10, 0, 2);
    std::vector<size_t> idx(10);
    for (size_t i = 0; i < 10; ++i) idx[i] = i;
    Vocabulary vocab = vocabulary_from(all_neg, idx);
    int yt = class_index("YouTube");
    CHECK(eval_binary(always_negative, all_neg, &vocab, idx, yt) == doctest::Approx(1.0));
    CHECK(eval_binary(always_negative, all_pos, &vocab, idx, yt) == doctest::Approx(0.0));

    auto tied = hardwired(OutputMode::Categorical2, {0.5, 0.5});
    CHECK(eval_binary(tied, all_neg, &vocab, idx, yt) == doctest::Approx(0.0));  // ties miss
}

TEST_CASE("train is deterministic and decreases loss on separable data") {
    FeatureData data = synthetic_language(8, 8, 3);
    std::vector<size_t> idx(data.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Vocabulary vocab = vocabulary_from(data, idx);
    int yt = class_index("YouTube");

    ModelConfig config;
    config.arch = Arch::Kim;
    config.mode = OutputMode::Categorical2;
    config.embedding_dim = 4;
    config.kim_channels = 4;
    config.seed = 5;

    TrainOptions opts;
    opts.epochs = 2;
    opts.seed = 5;
    auto m1 = build_model<float>(vocab.size(), config);
    auto r1 = train(m1, data, &vocab, idx, yt, opts);
    auto m2 = build_model<float>(vocab.size(), config);
    auto r2 = train(m2, data, &vocab, idx, yt, opts);
    CHECK(r1.loss_history == r2.loss_history);
    CHECK(r1.loss_history.size() == 2);

    int improved = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        ModelConfig c = config;
        c.seed = seed;
        auto model = build_model<float>(vocab.size(), c);
        double before = loss_of(model, data, vocab, idx, yt);
        TrainOptions one;
        one.epochs = 1;
        one.batch_size = static_cast<int>(idx.size());  // one batch
        one.seed = seed;
        train(model, data, &vocab, idx, yt, one);
        double after = loss_of(model, data, vocab, idx, yt);
        if (after < before) ++improved;
    }
    CHECK(improved >= 19);
}

TEST_CASE("train surfaces non-finite losses with a diagnostic") {
    FeatureData data = synthetic_language(4, 4, 9);
    std::vector<size_t> idx(data.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Vocabulary vocab = vocabulary_from(data, idx);
    ModelConfig config;
    config.arch = Arch::Kim;
    config.mode = OutputMode::Categorical2;
    config.embedding_dim = 3;
    config.kim_channels = 2;
    auto model = build_model<float>(vocab.size(), config);
    model.find("output.w").value.fill(std::numeric_limits<float>::quiet_NaN());
    TrainOptions opts;
    opts.epochs = 1;
    CHECK_THROWS_AS(train(model, data, &vocab, idx, class_index("YouTube"), opts),
                    NonFiniteLoss);
}

TEST_CASE("default epochs follow the published training table") {
    CHECK(default_epochs(Arch::Han) == 30);
    CHECK(default_epochs(Arch::Kim) == 50);
    CHECK(default_epochs(Arch::Berger) == 50);
    CHECK(default_epochs(Arch::Cruz) == 50);
    CHECK(default_optimizer(Arch::Berger).kind == OptimizerKind::Rmsprop);
    CHECK(default_optimizer(Arch::Han).kind == OptimizerKind::Adam);
    CHECK(default_optimizer(Arch::Kim).kind == OptimizerKind::Adam);
}

TEST_CASE("knockout_split removes all co-occurring pair samples from training") {
    std::vector<LabelSet> labels;
    for (int i = 0; i < 10; ++i) labels.push_back(LabelSet::parse("Amazon;YouTube"));
    for (int i = 0; i < 40; ++i) labels.push_back(LabelSet::parse("Amazon"));
    for (int i = 0; i < 40; ++i) labels.push_back(LabelSet::parse("YouTube"));
    SplitSpec spec;
    spec.seed = 11;
    int a = class_index("Amazon"), y = class_index("YouTube");
    Split s = knockout_split(labels, a, y, spec);
    LabelSet pair = LabelSet::parse("Amazon;YouTube");
    for (size_t i : s.train) CHECK_FALSE(labels[i].contains_all(pair));
    size_t pair_in_test = 0;
    for (size_t i : s.test) pair_in_test += labels[i].contains_all(pair);
    CHECK(pair_in_test == 10);
    CHECK(s.train.size() == 64);  // 80% of the 80 non-pair samples
    CHECK(s.test.size() == 26);
    bool single_a = false, single_y = false;
    for (size_t i : s.train) {
        single_a |= labels[i] == LabelSet::parse("Amazon");
        single_y |= labels[i] == LabelSet::parse("YouTube");
    }
    CHECK(single_a);
    CHECK(single_y);

    std::vector<LabelSet> no_pair(20, LabelSet::parse("Amazon"));
    CHECK_THROWS_AS(knockout_split(no_pair, a, y, spec), NoPairSamples);
}

TEST_CASE("knockout_eval summarizes hardwired activations") {
    FeatureData data = synthetic_language(6, 0, 13);
    for (auto& l : data.labels) l = LabelSet::parse("Amazon;YouTube");
    std::vector<size_t> idx(data.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Vocabulary vocab = vocabulary_from(data, idx);
    int a = class_index("Amazon"), y = class_index("YouTube");

    auto both_on = hardwired(OutputMode::Multilabel6, {0.9, 0.9, 0.9, 0.9, 0.9, 0.9});
    auto r1 = knockout_eval(both_on, data, &vocab, idx, a, y);
    CHECK(r1.max_rate == doctest::Approx(1.0));
    CHECK(r1.both_rate == doctest::Approx(1.0));
    CHECK(r1.activations.size() == 6);

    auto one_on = hardwired(OutputMode::Multilabel6, {0.9, 0.1, 0.1, 0.1, 0.1, 0.1});
    auto r2 = knockout_eval(one_on, data, &vocab, idx, a, y);
    CHECK(r2.max_rate == doctest::Approx(1.0));
    CHECK(r2.both_rate == doctest::Approx(0.0));
}

TEST_CASE("eval_multilabel filtering and self-consistency") {
    FeatureData data = synthetic_language(10, 10, 17);
    // Give half the positives a second label so client counts vary.
    for (int i = 0; i < 5; ++i) data.labels[static_cast<size_t>(i)].add(class_index("Netflix"));
    std::vector<size_t> idx(data.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Vocabulary vocab = vocabulary_from(data, idx);
    auto model = hardwired(OutputMode::Multilabel6, {0.3, 0.3, 0.3, 0.3, 0.6, 0.7});

    EvalReport unfiltered = eval_multilabel(model, data, &vocab, idx, 0);
    EvalReport min1 = eval_multilabel(model, data, &vocab, idx, 1);
    // min_clients 1 only drops the unlabeled negatives.
    CHECK(min1.per_class.size() == kNumClasses);

    EvalReport too_high = eval_multilabel(model, data, &vocab, idx, 5);
    for (const auto& cr : too_high.per_class) CHECK(cr.degenerate);

    for (const auto& cr : unfiltered.per_class) {
        if (cr.degenerate) continue;
        CHECK(std::abs(cr.auc - oracle::pairwise_auc(cr.scores, cr.truth)) < 1e-9);
    }
}

TEST_CASE("embedding_sweep is deterministic and covers each requested size") {
    FeatureData data = synthetic_language(10, 10, 23);
    SplitSpec spec;
    spec.seed = 31;
    TrainOptions opts;
    opts.epochs = 1;
    int yt = class_index("YouTube");
    auto once = embedding_sweep(Arch::Kim, {4}, data, yt, 41, spec, opts);
    REQUIRE(once.accuracy_by_size.size() == 1);
    CHECK(once.accuracy_by_size[0].first == 4);

    auto a = embedding_sweep(Arch::Kim, {3, 5}, data, yt, 42, spec, opts);
    auto b = embedding_sweep(Arch::Kim, {3, 5}, data, yt, 42, spec, opts);
    REQUIRE(a.accuracy_by_size.size() == 2);
    CHECK(a.accuracy_by_size == b.accuracy_by_size);
    CHECK_THROWS_AS(embedding_sweep(Arch::Cruz, {4}, data, yt, 1, spec, opts), BadConfig);
    CHECK_THROWS_AS(embedding_sweep(Arch::Kim, {}, data, yt, 1, spec, opts), BadConfig);
}

TEST_CASE("feature-kind mismatches are rejected") {
    FeatureData language = synthetic_language(4, 4, 29);
    std::vector<size_t> idx(language.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Vocabulary vocab = vocabulary_from(language, idx);
    ModelConfig c;
    c.arch = Arch::Cruz;
    c.mode = OutputMode::Categorical2;
    auto cruz = build_cruz<float>(c);
    TrainOptions opts;
    opts.epochs = 1;
    CHECK_THROWS_AS(train(cruz, language, &vocab, idx, 0, opts), BadConfig);
    CHECK(labels_of(language).size() == 8);
}
