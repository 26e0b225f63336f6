#include "ntlc/baseline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "ntlc/error.hpp"

namespace ntlc {

double shannon_entropy(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    std::map<double, size_t> counts;
    for (double v : values) ++counts[v];
    double n = static_cast<double>(values.size());
    double h = 0.0;
    for (const auto& [value, count] : counts) {
        double p = static_cast<double>(count) / n;
        h -= p * std::log2(p);
    }
    return h;
}

namespace {

// Pattern key: ranks of the window values packed base-n; stable sort makes
// equal values rank by position.
uint32_t ordinal_pattern(const double* window, int order) {
    std::array<int, 8> idx;
    for (int i = 0; i < order; ++i) idx[static_cast<size_t>(i)] = i;
    std::stable_sort(idx.begin(), idx.begin() + order,
                     [&](int a, int b) { return window[a] < window[b]; });
    std::array<int, 8> rank{};
    for (int r = 0; r < order; ++r) rank[static_cast<size_t>(idx[static_cast<size_t>(r)])] = r;
    uint32_t key = 0;
    for (int i = 0; i < order; ++i)
        key = key * static_cast<uint32_t>(order) + static_cast<uint32_t>(rank[static_cast<size_t>(i)]);
    return key;
}

} // namespace

double permutation_entropy(const std::vector<double>& values, int order) {
    if (order < 2) throw BadConfig("permutation entropy order must be >= 2");
    if (static_cast<int>(values.size()) < order) return 0.0;
    std::map<uint32_t, size_t> counts;
    size_t windows = values.size() - static_cast<size_t>(order) + 1;
    for (size_t i = 0; i < windows; ++i) ++counts[ordinal_pattern(values.data() + i, order)];
    double n = static_cast<double>(windows);
    double h = 0.0;
    for (const auto& [pattern, count] : counts) {
        double p = static_cast<double>(count) / n;
        h -= p * std::log2(p);
    }
    return h;
}

std::array<double, kStatBlockSize> stat_block(const std::vector<double>& values) {
    std::array<double, kStatBlockSize> out{};
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    double mx = values[0], mn = values[0], sum = 0.0;
    for (double v : values) {
        mx = std::max(mx, v);
        mn = std::min(mn, v);
        sum += v;
    }
    double mean = sum / n;
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    size_t mid = sorted.size() / 2;
    double median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= n;  // population variance
    double sigma = std::sqrt(var);
    double extreme = 0, mild = 0;
    for (double v : values) {
        double dev = std::abs(v - mean);
        if (dev > 2.0 * sigma) extreme += 1;
        if (dev > sigma) mild += 1;  // includes the extreme ones
    }
    out[0] = mx;
    out[1] = mn;
    out[2] = mean;
    out[3] = median;
    out[4] = var;
    out[5] = extreme;
    out[6] = mild;
    out[7] = shannon_entropy(values);
    out[8] = permutation_entropy(values, 2);
    out[9] = permutation_entropy(values, 3);
    out[10] = permutation_entropy(values, 4);
    out[11] = permutation_entropy(values, 5);
    return out;
}

BaselineSequence extract_baseline(const TraceSample& sample, const Subnet& client_subnet) {
    struct IntervalRaw {
        std::array<double, 3> up_pkts{}, down_pkts{}, up_bytes{}, down_bytes{};
        std::vector<double> up_sizes, down_sizes;
        std::vector<double> up_times, down_times;  // packet timestamps, ms
    };
    std::array<IntervalRaw, kIntervalsPerSample> raw;

    for (const auto& pkt : sample.packets) {
        int interval = static_cast<int>(pkt.timestamp_ms / kIntervalMs);
        if (interval < 0 || interval >= kIntervalsPerSample)
            throw MalformedRow("packet timestamp " + std::to_string(pkt.timestamp_ms) +
                               " outside the 60 s sample");
        IntervalRaw& r = raw[static_cast<size_t>(interval)];
        double local = pkt.timestamp_ms - interval * kIntervalMs;
        int second = std::min(2, static_cast<int>(local / 1000.0));
        bool up = assign_direction(pkt, client_subnet) == Direction::Upstream;
        if (up) {
            r.up_pkts[static_cast<size_t>(second)] += 1;
            r.up_bytes[static_cast<size_t>(second)] += pkt.size_bytes;
            r.up_sizes.push_back(pkt.size_bytes);
            r.up_times.push_back(pkt.timestamp_ms);
        } else {
            r.down_pkts[static_cast<size_t>(second)] += 1;
            r.down_bytes[static_cast<size_t>(second)] += pkt.size_bytes;
            r.down_sizes.push_back(pkt.size_bytes);
            r.down_times.push_back(pkt.timestamp_ms);
        }
    }

    auto gaps = [](const std::vector<double>& times) {
        std::vector<double> g;
        if (times.size() >= 2) {
            g.reserve(times.size() - 1);
            for (size_t i = 1; i < times.size(); ++i) g.push_back(times[i] - times[i - 1]);
        }
        return g;
    };

    BaselineSequence seq{};
    for (int i = 0; i < kIntervalsPerSample; ++i) {
        const IntervalRaw& r = raw[static_cast<size_t>(i)];
        IntervalFeatures& f = seq[static_cast<size_t>(i)];
        int p = 0;
        for (int s = 0; s < 3; ++s) f[static_cast<size_t>(p++)] = r.up_pkts[static_cast<size_t>(s)];
        for (int s = 0; s < 3; ++s) f[static_cast<size_t>(p++)] = r.down_pkts[static_cast<size_t>(s)];
        for (int s = 0; s < 3; ++s) f[static_cast<size_t>(p++)] = r.up_bytes[static_cast<size_t>(s)];
        for (int s = 0; s < 3; ++s) f[static_cast<size_t>(p++)] = r.down_bytes[static_cast<size_t>(s)];
        for (const auto& block : {stat_block(r.up_sizes), stat_block(r.down_sizes),
                                  stat_block(gaps(r.up_times)), stat_block(gaps(r.down_times))})
            for (double v : block) f[static_cast<size_t>(p++)] = v;
    }
    return seq;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

} // namespace

void write_baselines(const std::vector<std::pair<std::string, BaselineSequence>>& rows,
                     std::ostream& out) {
    for (const auto& [id, seq] : rows) {
        out << id;
        for (const auto& interval : seq)
            for (double v : interval) out << ',' << format_double(v);
        out << '\n';
    }
}

std::vector<std::pair<std::string, BaselineSequence>> read_baselines(std::istream& in) {
    std::vector<std::pair<std::string, BaselineSequence>> rows;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos || comma == 0)
            throw MalformedRow("baseline line " + std::to_string(line_no) +
                               ": expected `sample_id,values...`");
        BaselineSequence seq{};
        size_t pos = comma + 1;
        for (int i = 0; i < kIntervalsPerSample * kIntervalFeatureCount; ++i) {
            size_t next = line.find(',', pos);
            std::string_view tok(line.data() + pos,
                                 (next == std::string::npos ? line.size() : next) - pos);
            double v = 0;
            auto [pe, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || pe != tok.data() + tok.size())
                throw MalformedRow("baseline line " + std::to_string(line_no) +
                                   ": bad value '" + std::string(tok) + "'");
            seq[static_cast<size_t>(i / kIntervalFeatureCount)]
               [static_cast<size_t>(i % kIntervalFeatureCount)] = v;
            if (next == std::string::npos) {
                if (i + 1 != kIntervalsPerSample * kIntervalFeatureCount)
                    throw MalformedRow("baseline line " + std::to_string(line_no) +
                                       ": expected 1200 values, got " + std::to_string(i + 1));
                pos = line.size();
            } else {
                pos = next + 1;
            }
        }
        if (pos != line.size())
            throw MalformedRow("baseline line " + std::to_string(line_no) +
                               ": trailing values beyond 1200");
        rows.emplace_back(line.substr(0, comma), seq);
    }
    return rows;
}

} // namespace ntlc
