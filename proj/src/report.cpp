#include "ntlc/report.hpp"

#include <fstream>

#include <json.hpp>

#include "ntlc/checkpoint.hpp"
#include "ntlc/error.hpp"

namespace ntlc {

namespace {

using nlohmann::json;

json roc_to_json(const std::vector<RocPoint>& points) {
    json arr = json::array();
    for (const auto& p : points) arr.push_back({p.fpr, p.tpr});
    return arr;
}

std::vector<RocPoint> roc_from_json(const json& arr) {
    std::vector<RocPoint> points;
    for (const auto& p : arr) points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return points;
}

json pairs_to_json(const std::vector<std::array<double, 2>>& rows) {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back({r[0], r[1]});
    return arr;
}

std::vector<std::array<double, 2>> pairs_from_json(const json& arr) {
    std::vector<std::array<double, 2>> rows;
    for (const auto& r : arr)
        rows.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
    return rows;
}

} // namespace

std::string metrics_to_json(const EvalReport& report) {
    json j;
    j["toolkit_version"] = std::string(kToolkitVersion);
    j["config"] = report.config;
    j["seed"] = report.seed;
    j["subset_min_clients"] = report.subset_min_clients;
    j["loss_history"] = report.loss_history;
    if (report.binary) {
        json b;
        b["target"] = report.binary->target;
        b["accuracy"] = report.binary->accuracy;
        b["activations"] = pairs_to_json(report.binary->activations);
        b["truth"] = report.binary->truth;
        j["binary"] = b;
    }
    if (!report.per_class.empty()) {
        json arr = json::array();
        for (const auto& cr : report.per_class) {
            json c;
            c["class"] = cr.class_name;
            c["degenerate"] = cr.degenerate;
            if (!cr.degenerate) {
                c["auc"] = cr.auc;
                c["roc"] = roc_to_json(cr.roc);
            }
            c["scores"] = cr.scores;
            c["truth"] = cr.truth;
            arr.push_back(c);
        }
        j["per_class"] = arr;
    }
    if (report.knockout) {
        json k;
        k["class_a"] = report.knockout->class_a;
        k["class_b"] = report.knockout->class_b;
        k["activations"] = pairs_to_json(report.knockout->activations);
        k["max_rate"] = report.knockout->max_rate;
        k["both_rate"] = report.knockout->both_rate;
        k["train_pair_free"] = report.knockout->train_pair_free;
        j["knockout"] = k;
    }
    if (report.sweep) {
        json s = json::array();
        for (const auto& [size, accuracy] : report.sweep->accuracy_by_size)
            s.push_back({{"embedding_dim", size}, {"accuracy", accuracy}});
        j["sweep"] = s;
    }
    return j.dump(2) + "\n";
}

EvalReport metrics_from_json(const std::string& text) {
    json j = json::parse(text);
    EvalReport report;
    report.config = j.at("config").get<std::map<std::string, std::string>>();
    report.seed = j.at("seed").get<uint64_t>();
    report.subset_min_clients = j.at("subset_min_clients").get<int>();
    report.loss_history = j.at("loss_history").get<std::vector<double>>();
    if (j.contains("binary")) {
        BinaryResult b;
        b.target = j["binary"].at("target").get<std::string>();
        b.accuracy = j["binary"].at("accuracy").get<double>();
        b.activations = pairs_from_json(j["binary"].at("activations"));
        b.truth = j["binary"].at("truth").get<std::vector<uint8_t>>();
        report.binary = std::move(b);
    }
    if (j.contains("per_class")) {
        for (const auto& c : j["per_class"]) {
            ClassReport cr;
            cr.class_name = c.at("class").get<std::string>();
            cr.degenerate = c.at("degenerate").get<bool>();
            if (!cr.degenerate) {
                cr.auc = c.at("auc").get<double>();
                cr.roc = roc_from_json(c.at("roc"));
            }
            cr.scores = c.at("scores").get<std::vector<double>>();
            cr.truth = c.at("truth").get<std::vector<uint8_t>>();
            report.per_class.push_back(std::move(cr));
        }
    }
    if (j.contains("knockout")) {
        KnockoutResult k;
        k.class_a = j["knockout"].at("class_a").get<std::string>();
        k.class_b = j["knockout"].at("class_b").get<std::string>();
        k.activations = pairs_from_json(j["knockout"].at("activations"));
        k.max_rate = j["knockout"].at("max_rate").get<double>();
        k.both_rate = j["knockout"].at("both_rate").get<double>();
        k.train_pair_free = j["knockout"].at("train_pair_free").get<bool>();
        report.knockout = std::move(k);
    }
    if (j.contains("sweep")) {
        SweepResult s;
        for (const auto& row : j["sweep"])
            s.accuracy_by_size.emplace_back(row.at("embedding_dim").get<int>(),
                                            row.at("accuracy").get<double>());
        report.sweep = std::move(s);
    }
    return report;
}

void write_metrics_file(const std::string& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write metrics file '" + path + "'");
    out << metrics_to_json(report);
}

EvalReport read_metrics_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open metrics file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return metrics_from_json(text);
}

} // namespace ntlc
