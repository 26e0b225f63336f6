#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ntlc/checkpoint.hpp"
#include "ntlc/report.hpp"
#include "ntlc/rng.hpp"
#include "oracles.hpp"

using namespace ntlc;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

Vocabulary small_vocab() {
    FeatureSentence a(kWordsPerSentence, make_word("aaaa"));
    FeatureSentence b(kWordsPerSentence, make_word("bbcd"));
    return build_vocabulary({a, b});
}

} // namespace

TEST_CASE("checkpoints round-trip bit-exactly and reproduce predictions") {
    Vocabulary vocab = small_vocab();
    ModelConfig config;
    config.arch = Arch::Kim;
    config.mode = OutputMode::Multilabel6;
    config.embedding_dim = 6;
    config.kim_channels = 4;
    config.seed = 91;
    auto model = build_model<float>(vocab.size(), config);

    SplitSpec split;
    split.seed = 1234;
    split.stratify = true;
    std::string path = temp_path("ntlc_test_ckpt.bin");
    save_checkpoint(path, model, &vocab, split, -1);
    Checkpoint loaded = load_checkpoint(path);

    CHECK(loaded.model.config.arch == Arch::Kim);
    CHECK(loaded.model.config.seed == 91);
    CHECK(loaded.split.seed == 1234);
    CHECK(loaded.split.stratify);
    CHECK(loaded.target_class == -1);
    REQUIRE(loaded.vocab.has_value());
    CHECK(loaded.vocab->size() == vocab.size());

    REQUIRE(loaded.model.params.size() == model.params.size());
    for (const auto& p : model.params) {
        const auto& q = loaded.model.find(p->name);
        CHECK(q.value.shape == p->value.shape);
        CHECK(q.value.v == p->value.v);  // bit-exact
    }

    Rng rng(7);
    Batch<float> batch;
    batch.tokens = IntTensor({3, 200});
    for (auto& v : batch.tokens.v)
        v = static_cast<int32_t>(rng.below(static_cast<uint64_t>(vocab.size() + 1)));
    CHECK(predict(model, batch).v == predict(loaded.model, batch).v);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint loading verifies the magic") {
    std::string path = temp_path("ntlc_test_bad_ckpt.bin");
    std::ofstream(path) << "NOPE\njunk\n";
    CHECK_THROWS_AS(load_checkpoint(path), IoError);
    std::remove(path.c_str());
}

TEST_CASE("metrics files serialize deterministically and round-trip") {
    EvalReport report;
    report.seed = 17;
    report.subset_min_clients = 2;
    report.config["arch"] = "kim";
    report.config["problem"] = "multilabel";
    report.loss_history = {0.7, 0.5, 0.4001};

    ClassReport cr;
    cr.class_name = "YouTube";
    cr.scores = {0.9, 0.8, 0.3, 0.2, 0.75};
    cr.truth = {1, 1, 0, 0, 1};
    RocCurve curve = roc_auc(cr.scores, cr.truth);
    cr.auc = curve.auc;
    cr.roc = curve.points;
    report.per_class.push_back(cr);

    KnockoutResult k;
    k.class_a = "Amazon";
    k.class_b = "YouTube";
    k.activations = {{0.9, 0.2}, {0.4, 0.6}};
    k.max_rate = 1.0;
    k.both_rate = 0.0;
    k.train_pair_free = true;
    report.knockout = k;

    std::string text = metrics_to_json(report);
    CHECK(metrics_to_json(report) == text);  // deterministic bytes

    EvalReport parsed = metrics_from_json(text);
    CHECK(parsed.seed == 17);
    CHECK(parsed.subset_min_clients == 2);
    CHECK(parsed.config.at("arch") == "kim");
    CHECK(parsed.loss_history == report.loss_history);
    REQUIRE(parsed.per_class.size() == 1);
    CHECK(parsed.per_class[0].auc == cr.auc);
    CHECK(parsed.per_class[0].scores == cr.scores);
    CHECK(parsed.per_class[0].truth == cr.truth);
    REQUIRE(parsed.knockout.has_value());
    CHECK(parsed.knockout->activations == k.activations);

    // Every headline number is recomputable from the dumped raw data.
    RocCurve again = roc_auc(parsed.per_class[0].scores, parsed.per_class[0].truth);
    CHECK(again.auc == parsed.per_class[0].auc);
    CHECK(std::abs(again.auc -
                   oracle::pairwise_auc(parsed.per_class[0].scores, parsed.per_class[0].truth)) <
          1e-9);

    std::string path = temp_path("ntlc_test_metrics.json");
    write_metrics_file(path, report);
    EvalReport from_file = read_metrics_file(path);
    CHECK(metrics_to_json(from_file) == text);
    std::remove(path.c_str());
}
