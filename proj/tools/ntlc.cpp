// ntlc: synthesize tunnel traffic, turn traces into language-like features,
// and train/evaluate the four sequence classifiers on them.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "ntlc/checkpoint.hpp"
#include "ntlc/error.hpp"
#include "ntlc/harness.hpp"
#include "ntlc/parallel.hpp"
#include "ntlc/report.hpp"
#include "ntlc/rng.hpp"
#include "ntlc/simulator.hpp"

namespace fs = std::filesystem;
using namespace ntlc;

namespace {

constexpr uint64_t kSplitStream = 0x53504C49;    // derive_seed stream tags
constexpr uint64_t kBalanceStream = 0x42414C41;

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

int parse_class_or_throw(const std::string& name) {
    int idx = class_index(name);
    if (idx < 0)
        throw BadConfig("unknown class '" + name + "'; classes are Amazon, CNNNews, FoxNews, "
                        "DailyMotion, Netflix, YouTube");
    return idx;
}

struct ProblemFlag {
    bool multilabel = false;
    int target_class = -1;
};

ProblemFlag parse_problem(const std::string& text) {
    ProblemFlag p;
    if (text == "multilabel") {
        p.multilabel = true;
        return p;
    }
    if (text.rfind("binary:", 0) == 0) {
        p.target_class = parse_class_or_throw(text.substr(7));
        return p;
    }
    throw BadConfig("problem must be `multilabel` or `binary:<Class>`, got '" + text + "'");
}

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
    std::string spec_path, out_dir, profiles_path;
    uint64_t seed = 0;
    bool seed_set = false;
};

void run_simulate(const SimulateArgs& args) {
    std::ifstream spec_in(args.spec_path);
    if (!spec_in) throw IoError("cannot open dataset spec '" + args.spec_path + "'");
    std::string spec_profiles;
    DatasetSpec spec = parse_dataset_spec(spec_in, &spec_profiles);
    if (args.seed_set) spec.master_seed = args.seed;

    std::string profiles_path = args.profiles_path;
    if (profiles_path.empty() && !spec_profiles.empty())
        profiles_path = (fs::path(args.spec_path).parent_path() / spec_profiles).string();
    if (profiles_path.empty())
        throw BadConfig("no profiles config: pass --profiles or set `profiles =` in the spec");
    ProfileSet profiles = load_profiles(profiles_path);

    fs::create_directories(args.out_dir);
    auto manifest = dataset_manifest(spec);
    std::vector<std::pair<std::string, LabelSet>> label_rows;
    for (const auto& entry : manifest) {
        TraceSample sample = generate_sample(entry, profiles, spec.web_noise);
        std::ofstream trace_out(fs::path(args.out_dir) / (entry.sample_id + ".trace"));
        serialize_trace(sample.packets, trace_out);
        label_rows.emplace_back(entry.sample_id, entry.labels);
    }
    std::ofstream manifest_out(fs::path(args.out_dir) / "manifest.csv");
    write_manifest(manifest, manifest_out);
    std::ofstream labels_out(fs::path(args.out_dir) / "labels.csv");
    write_labels(label_rows, labels_out);
    std::cout << "wrote " << manifest.size() << " samples to " << args.out_dir << "\n";
}

// --- featurize ----------------------------------------------------------------

struct FeaturizeArgs {
    std::string trace_dir, out_path, vocab_out, subnet = std::string(kClientSubnetCidr);
    std::string mode = "language";
};

void run_featurize(const FeaturizeArgs& args) {
    if (args.mode != "language" && args.mode != "baseline")
        throw BadConfig("mode must be `language` or `baseline`, got '" + args.mode + "'");
    Subnet subnet = Subnet::parse(args.subnet);

    std::vector<fs::path> files;
    if (!fs::is_directory(args.trace_dir))
        throw IoError("'" + args.trace_dir + "' is not a directory");
    for (const auto& entry : fs::directory_iterator(args.trace_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".trace")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no .trace files under '" + args.trace_dir + "'");

    std::vector<TraceSample> samples(files.size());
    parallel_for(0, static_cast<int64_t>(files.size()), [&](int64_t i) {
        TraceSample& s = samples[static_cast<size_t>(i)];
        s.sample_id = files[static_cast<size_t>(i)].stem().string();
        s.packets = parse_trace_file(files[static_cast<size_t>(i)].string());
    });

    std::ofstream out(args.out_path);
    if (!out) throw IoError("cannot write '" + args.out_path + "'");
    if (args.mode == "language") {
        std::vector<std::pair<std::string, FeatureSentence>> rows(samples.size());
        parallel_for(0, static_cast<int64_t>(samples.size()), [&](int64_t i) {
            rows[static_cast<size_t>(i)] = {samples[static_cast<size_t>(i)].sample_id,
                                            featurize_sample(samples[static_cast<size_t>(i)], subnet)};
        });
        write_sentences(rows, out);
        if (!args.vocab_out.empty()) {
            std::vector<FeatureSentence> corpus;
            corpus.reserve(rows.size());
            for (auto& [id, sentence] : rows) corpus.push_back(sentence);
            Vocabulary vocab = build_vocabulary(corpus);
            std::ofstream vout(args.vocab_out);
            if (!vout) throw IoError("cannot write '" + args.vocab_out + "'");
            write_vocabulary(vocab, vout);
        }
    } else {
        std::vector<std::pair<std::string, BaselineSequence>> rows(samples.size());
        parallel_for(0, static_cast<int64_t>(samples.size()), [&](int64_t i) {
            rows[static_cast<size_t>(i)] = {samples[static_cast<size_t>(i)].sample_id,
                                            extract_baseline(samples[static_cast<size_t>(i)], subnet)};
        });
        write_baselines(rows, out);
    }
    std::cout << "featurized " << samples.size() << " samples (" << args.mode << ") to "
              << args.out_path << "\n";
}

// --- train ----------------------------------------------------------------

struct TrainArgs {
    std::string features, labels, arch, problem, out;
    uint64_t seed = 0;
    int epochs = 0;
    int batch_size = 32;
    int embedding_dim = 0;
    double train_fraction = 0.8;
    bool stratify = false;
};

void write_loss_log(const std::string& path, const std::vector<double>& history) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write loss log '" + path + "'");
    out << "epoch,loss\n";
    for (size_t i = 0; i < history.size(); ++i)
        out << (i + 1) << ',' << format_double(history[i]) << '\n';
}

void run_train(const TrainArgs& args) {
    ProblemFlag problem = parse_problem(args.problem);
    FeatureData data = load_feature_data(args.features, args.labels);

    SplitSpec split_spec;
    split_spec.train_fraction = args.train_fraction;
    split_spec.seed = derive_seed(args.seed, kSplitStream);
    split_spec.stratify = args.stratify;
    Split split = split_dataset(data.labels, split_spec);

    std::vector<size_t> train_set = split.train;
    if (!problem.multilabel)
        train_set = balance_binary(split.train, data.labels, problem.target_class,
                                   derive_seed(args.seed, kBalanceStream));

    ModelConfig config;
    config.arch = parse_arch(args.arch);
    config.mode = problem.multilabel ? OutputMode::Multilabel6 : OutputMode::Categorical2;
    config.embedding_dim = args.embedding_dim;
    config.seed = args.seed;

    std::optional<Vocabulary> vocab;
    if (config.arch != Arch::Cruz) {
        if (!data.is_language)
            throw BadConfig(args.arch + " expects language features but got baseline features");
        vocab = vocabulary_from(data, train_set);
    }

    Model<float> model = build_model<float>(vocab ? vocab->size() : 1, config);
    TrainOptions opts;
    opts.epochs = args.epochs;
    opts.batch_size = args.batch_size;
    opts.seed = args.seed;
    TrainResult result = train(model, data, vocab ? &*vocab : nullptr, train_set,
                               problem.target_class, opts);

    save_checkpoint(args.out, model, vocab ? &*vocab : nullptr, split_spec,
                    problem.target_class);
    write_loss_log(args.out + ".loss.csv", result.loss_history);
    std::cout << "trained " << args.arch << " for " << result.loss_history.size()
              << " epochs; final loss " << format_double(result.loss_history.back())
              << "; checkpoint " << args.out << "\n";
}

// --- eval ----------------------------------------------------------------

struct EvalArgs {
    std::string model, features, labels, out;
    int min_clients = 1;
};

void run_eval(const EvalArgs& args) {
    Checkpoint ckpt = load_checkpoint(args.model);
    FeatureData data = load_feature_data(args.features, args.labels);
    Split split = split_dataset(data.labels, ckpt.split);

    EvalReport report;
    report.seed = ckpt.model.config.seed;
    report.config["command"] = "eval";
    report.config["arch"] = std::string(arch_name(ckpt.model.config.arch));
    report.config["checkpoint"] = args.model;
    report.config["features"] = args.features;
    report.config["labels"] = args.labels;
    report.config["min_clients"] = std::to_string(args.min_clients);

    const Vocabulary* vocab = ckpt.vocab ? &*ckpt.vocab : nullptr;
    if (ckpt.model.config.mode == OutputMode::Categorical2) {
        if (ckpt.target_class < 0) throw BadConfig("checkpoint lacks a binary target class");
        BinaryResult binary;
        binary.target = kClassNames[static_cast<size_t>(ckpt.target_class)];
        Tensor<float> act = predict_indices(ckpt.model, data, vocab, split.test);
        size_t hits = 0;
        for (size_t i = 0; i < split.test.size(); ++i) {
            double a0 = act.v[i * 2], a1 = act.v[i * 2 + 1];
            bool positive = data.labels[split.test[i]].contains(ckpt.target_class);
            binary.activations.push_back({a0, a1});
            binary.truth.push_back(positive ? 1 : 0);
            if (positive ? a1 > a0 : a0 > a1) ++hits;
        }
        binary.accuracy = static_cast<double>(hits) / static_cast<double>(split.test.size());
        report.binary = std::move(binary);
        report.config["problem"] = "binary:" + std::string(kClassNames[static_cast<size_t>(ckpt.target_class)]);
    } else {
        EvalReport ml = eval_multilabel(ckpt.model, data, vocab, split.test, args.min_clients);
        report.per_class = std::move(ml.per_class);
        report.subset_min_clients = args.min_clients;
        report.config["problem"] = "multilabel";
    }
    write_metrics_file(args.out, report);
    std::cout << "wrote metrics to " << args.out << "\n";
}

// --- knockout ----------------------------------------------------------------

struct KnockoutArgs {
    std::string features, labels, pair, arch, out;
    uint64_t seed = 0;
    int epochs = 0;
};

void run_knockout(const KnockoutArgs& args) {
    size_t comma = args.pair.find(',');
    if (comma == std::string::npos)
        throw BadConfig("--pair wants `ClassA,ClassB`, got '" + args.pair + "'");
    int class_a = parse_class_or_throw(args.pair.substr(0, comma));
    int class_b = parse_class_or_throw(args.pair.substr(comma + 1));
    if (class_a == class_b) throw BadConfig("--pair classes must differ");

    FeatureData data = load_feature_data(args.features, args.labels);
    SplitSpec split_spec;
    split_spec.seed = derive_seed(args.seed, kSplitStream);
    Split split = knockout_split(data.labels, class_a, class_b, split_spec);

    LabelSet pair;
    pair.add(class_a);
    pair.add(class_b);
    bool pair_free = true;
    for (size_t idx : split.train)
        if (data.labels[idx].contains_all(pair)) pair_free = false;
    if (!pair_free) throw Error("Internal", "knockout train split still contains pair samples");

    ModelConfig config;
    config.arch = parse_arch(args.arch);
    config.mode = OutputMode::Multilabel6;
    config.seed = args.seed;
    std::optional<Vocabulary> vocab;
    if (config.arch != Arch::Cruz) vocab = vocabulary_from(data, split.train);

    Model<float> model = build_model<float>(vocab ? vocab->size() : 1, config);
    TrainOptions opts;
    opts.epochs = args.epochs;
    opts.seed = args.seed;
    TrainResult trained = train(model, data, vocab ? &*vocab : nullptr, split.train, -1, opts);

    std::vector<size_t> pair_samples;
    for (size_t idx : split.test)
        if (data.labels[idx].contains_all(pair)) pair_samples.push_back(idx);

    KnockoutResult result = knockout_eval(model, data, vocab ? &*vocab : nullptr, pair_samples,
                                          class_a, class_b);
    result.train_pair_free = pair_free;

    EvalReport report;
    report.seed = args.seed;
    report.loss_history = trained.loss_history;
    report.knockout = std::move(result);
    report.config["command"] = "knockout";
    report.config["arch"] = args.arch;
    report.config["pair"] = args.pair;
    report.config["features"] = args.features;
    write_metrics_file(args.out, report);
    std::cout << "knockout " << args.pair << ": " << pair_samples.size()
              << " held-out pair samples, max_rate "
              << format_double(report.knockout->max_rate) << ", both_rate "
              << format_double(report.knockout->both_rate) << "; metrics " << args.out << "\n";
}

// --- sweep ----------------------------------------------------------------

struct SweepArgs {
    std::string features, labels, sizes, arch, target, out;
    uint64_t seed = 0;
    int epochs = 0;
};

void run_sweep(const SweepArgs& args) {
    std::vector<int> sizes;
    std::stringstream ss(args.sizes);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        sizes.push_back(std::stoi(tok));
    }
    if (sizes.empty()) throw BadConfig("--sizes wants a comma-separated list like 10,200");
    int target = parse_class_or_throw(args.target);

    FeatureData data = load_feature_data(args.features, args.labels);
    SplitSpec split_spec;
    split_spec.seed = derive_seed(args.seed, kSplitStream);
    TrainOptions opts;
    opts.epochs = args.epochs;
    SweepResult result = embedding_sweep(parse_arch(args.arch), sizes, data, target, args.seed,
                                         split_spec, opts);

    EvalReport report;
    report.seed = args.seed;
    report.sweep = result;
    report.config["command"] = "sweep";
    report.config["arch"] = args.arch;
    report.config["target"] = args.target;
    report.config["sizes"] = args.sizes;
    write_metrics_file(args.out, report);
    for (const auto& [size, accuracy] : result.accuracy_by_size)
        std::cout << "embedding " << size << ": accuracy " << format_double(accuracy) << "\n";
    std::cout << "wrote metrics to " << args.out << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"encrypted-tunnel traffic classification toolkit"};
    app.require_subcommand(1);
    app.set_config("--config");

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "generate a synthetic labeled dataset");
    c_sim->add_option("--spec", sim.spec_path, "dataset spec file")->required();
    c_sim->add_option("--out", sim.out_dir, "output directory")->required();
    auto* sim_seed = c_sim->add_option("--seed", sim.seed, "master seed (overrides the spec)");
    c_sim->add_option("--profiles", sim.profiles_path, "profiles config (overrides the spec)");

    FeaturizeArgs feat;
    auto* c_feat = app.add_subcommand("featurize", "turn trace files into feature files");
    c_feat->add_option("--traces", feat.trace_dir, "directory of .trace files")->required();
    c_feat->add_option("--mode", feat.mode, "language or baseline")->required();
    c_feat->add_option("--out", feat.out_path, "output feature file")->required();
    c_feat->add_option("--subnet", feat.subnet, "client subnet CIDR");
    c_feat->add_option("--vocab-out", feat.vocab_out, "also write a vocabulary file (language mode)");

    TrainArgs tr;
    auto* c_train = app.add_subcommand("train", "train a classifier");
    c_train->add_option("--features", tr.features)->required();
    c_train->add_option("--labels", tr.labels)->required();
    c_train->add_option("--arch", tr.arch, "han|kim|berger|cruz")->required();
    c_train->add_option("--problem", tr.problem, "multilabel or binary:<Class>")->required();
    c_train->add_option("--seed", tr.seed)->required();
    c_train->add_option("--out", tr.out, "checkpoint path")->required();
    c_train->add_option("--epochs", tr.epochs, "0 = architecture default");
    c_train->add_option("--batch-size", tr.batch_size);
    c_train->add_option("--embedding-dim", tr.embedding_dim, "0 = architecture default");
    c_train->add_option("--train-fraction", tr.train_fraction);
    c_train->add_flag("--stratify", tr.stratify, "stratify the split by label combination");

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "evaluate a checkpoint on its test split");
    c_eval->add_option("--model", ev.model)->required();
    c_eval->add_option("--features", ev.features)->required();
    c_eval->add_option("--labels", ev.labels)->required();
    c_eval->add_option("--out", ev.out, "metrics file")->required();
    c_eval->add_option("--min-clients", ev.min_clients, "evaluate only samples with >= K labels");

    KnockoutArgs ko;
    auto* c_ko = app.add_subcommand("knockout", "train with a label pair removed, test on it");
    c_ko->add_option("--features", ko.features)->required();
    c_ko->add_option("--labels", ko.labels)->required();
    c_ko->add_option("--pair", ko.pair, "ClassA,ClassB")->required();
    c_ko->add_option("--arch", ko.arch)->required();
    c_ko->add_option("--seed", ko.seed)->required();
    c_ko->add_option("--out", ko.out, "metrics file")->required();
    c_ko->add_option("--epochs", ko.epochs, "0 = architecture default");

    SweepArgs sw;
    auto* c_sw = app.add_subcommand("sweep", "embedding size sweep on one binary problem");
    c_sw->add_option("--features", sw.features)->required();
    c_sw->add_option("--labels", sw.labels)->required();
    c_sw->add_option("--sizes", sw.sizes, "comma-separated embedding sizes")->required();
    c_sw->add_option("--arch", sw.arch)->required();
    c_sw->add_option("--target", sw.target, "binary target class")->required();
    c_sw->add_option("--seed", sw.seed)->required();
    c_sw->add_option("--out", sw.out, "metrics file")->required();
    c_sw->add_option("--epochs", sw.epochs, "0 = architecture default");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_sim) {
            sim.seed_set = sim_seed->count() > 0;
            run_simulate(sim);
        } else if (*c_feat) {
            run_featurize(feat);
        } else if (*c_train) {
            run_train(tr);
        } else if (*c_eval) {
            run_eval(ev);
        } else if (*c_ko) {
            run_knockout(ko);
        } else if (*c_sw) {
            run_sweep(sw);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: Unexpected: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
