#include "ntlc/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ntlc/error.hpp"

namespace ntlc {

namespace {

using nlohmann::json;

json config_to_json(const ModelConfig& c) {
    json j;
    j["arch"] = std::string(arch_name(c.arch));
    j["mode"] = c.mode == OutputMode::Categorical2 ? "categorical-2" : "multilabel-6";
    j["embedding_dim"] = c.embedding_dim;
    j["han_hidden"] = c.han_hidden;
    j["berger_hidden"] = c.berger_hidden;
    j["kim_channels"] = c.kim_channels;
    j["kim_width_min"] = c.kim_width_min;
    j["kim_width_max"] = c.kim_width_max;
    j["cruz_hidden"] = c.cruz_hidden;
    j["cruz_dense_in"] = c.cruz_dense_in;
    j["cruz_dense_out"] = c.cruz_dense_out;
    j["seed"] = c.seed;
    return j;
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.arch = parse_arch(j.at("arch").get<std::string>());
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "categorical-2") c.mode = OutputMode::Categorical2;
    else if (mode == "multilabel-6") c.mode = OutputMode::Multilabel6;
    else throw BadConfig("checkpoint has unknown mode '" + mode + "'");
    c.embedding_dim = j.at("embedding_dim").get<int>();
    c.han_hidden = j.at("han_hidden").get<int>();
    c.berger_hidden = j.at("berger_hidden").get<int>();
    c.kim_channels = j.at("kim_channels").get<int>();
    c.kim_width_min = j.at("kim_width_min").get<int>();
    c.kim_width_max = j.at("kim_width_max").get<int>();
    c.cruz_hidden = j.at("cruz_hidden").get<std::vector<int>>();
    c.cruz_dense_in = j.at("cruz_dense_in").get<int>();
    c.cruz_dense_out = j.at("cruz_dense_out").get<int>();
    c.seed = j.at("seed").get<uint64_t>();
    return c;
}

} // namespace

void save_checkpoint(const std::string& path, Model<float>& model, const Vocabulary* vocab,
                     const SplitSpec& split, int target_class) {
    json meta;
    meta["toolkit_version"] = std::string(kToolkitVersion);
    meta["config"] = config_to_json(model.config);
    json classes = json::array();
    for (auto name : kClassNames) classes.push_back(std::string(name));
    meta["class_order"] = classes;
    meta["vocab_size"] = model.vocab_size;
    if (vocab) {
        json words = json::array();
        for (const auto& e : vocab->entries())
            words.push_back({word_str(e.word), e.frequency});
        meta["vocabulary"] = words;
    }
    meta["split"] = {{"train_fraction", split.train_fraction},
                     {"seed", split.seed},
                     {"stratify", split.stratify}};
    meta["target_class"] = target_class;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint '" + path + "'");
    std::string meta_text = meta.dump(2);
    out << kCheckpointMagic << '\n';
    out << "META " << meta_text.size() << '\n';
    out.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));
    out << '\n';

    std::vector<const Parameter<float>*> sorted;
    for (const auto& p : model.params) sorted.push_back(p.get());
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->name < b->name; });
    for (const auto* p : sorted) {
        out << "PARAM " << p->name << ' ' << p->value.rank();
        for (int d : p->value.shape) out << ' ' << d;
        out << '\n';
        out.write(reinterpret_cast<const char*>(p->value.data()),
                  static_cast<std::streamsize>(p->value.numel() * static_cast<int64_t>(sizeof(float))));
        out << '\n';
    }
    out << "END\n";
    if (!out) throw IoError("failed while writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    std::string line;
    std::getline(in, line);
    if (line != kCheckpointMagic)
        throw IoError("'" + path + "' is not a checkpoint (bad magic)");
    std::getline(in, line);
    if (line.rfind("META ", 0) != 0) throw IoError("checkpoint missing META section");
    size_t meta_len = std::stoull(line.substr(5));
    std::string meta_text(meta_len, '\0');
    in.read(meta_text.data(), static_cast<std::streamsize>(meta_len));
    in.ignore(1);  // newline after the block
    json meta = json::parse(meta_text);

    Checkpoint ckpt;
    ModelConfig config = config_from_json(meta.at("config"));
    int vocab_size = meta.at("vocab_size").get<int>();
    if (meta.contains("vocabulary")) {
        std::vector<Vocabulary::Entry> entries;
        for (const auto& row : meta.at("vocabulary"))
            entries.push_back({make_word(row.at(0).get<std::string>()),
                               row.at(1).get<uint64_t>()});
        ckpt.vocab = Vocabulary::from_entries(std::move(entries));
        if (ckpt.vocab->size() != vocab_size)
            throw IoError("checkpoint vocabulary size disagrees with vocab_size");
    }
    ckpt.split.train_fraction = meta.at("split").at("train_fraction").get<double>();
    ckpt.split.seed = meta.at("split").at("seed").get<uint64_t>();
    ckpt.split.stratify = meta.at("split").at("stratify").get<bool>();
    ckpt.target_class = meta.at("target_class").get<int>();

    ckpt.model = build_model<float>(config.arch == Arch::Cruz ? 1 : vocab_size, config);
    ckpt.model.vocab_size = vocab_size;

    size_t loaded = 0;
    while (std::getline(in, line)) {
        if (line == "END") break;
        if (line.rfind("PARAM ", 0) != 0)
            throw IoError("checkpoint has unexpected line '" + line + "'");
        std::istringstream header(line.substr(6));
        std::string name;
        int rank = 0;
        header >> name >> rank;
        std::vector<int> shape(static_cast<size_t>(rank));
        for (int i = 0; i < rank; ++i) header >> shape[static_cast<size_t>(i)];
        if (!header) throw IoError("checkpoint parameter header malformed: " + line);
        Parameter<float>& p = ckpt.model.find(name);
        if (p.value.shape != shape)
            throw IoError("checkpoint parameter '" + name + "' has shape mismatch");
        in.read(reinterpret_cast<char*>(p.value.data()),
                static_cast<std::streamsize>(p.value.numel() * static_cast<int64_t>(sizeof(float))));
        if (!in) throw IoError("checkpoint truncated in parameter '" + name + "'");
        in.ignore(1);
        ++loaded;
    }
    if (loaded != ckpt.model.params.size())
        throw IoError("checkpoint holds " + std::to_string(loaded) + " parameters, model needs " +
                      std::to_string(ckpt.model.params.size()));
    return ckpt;
}

} // namespace ntlc
