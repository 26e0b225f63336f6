#include "ntlc/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ntlc/error.hpp"
#include "ntlc/rng.hpp"

namespace ntlc {

namespace {

constexpr double kNoiseBurstMs = 2000.0;

void validate_distribution(const std::vector<std::pair<uint32_t, double>>& dist,
                           const std::string& name) {
    if (dist.empty()) return;
    double sum = 0;
    for (const auto& [size, p] : dist) {
        if (size < 1) throw BadConfig(name + ": packet size must be >= 1");
        if (p < 0) throw BadConfig(name + ": negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw BadConfig(name + ": packet size probabilities sum to " + std::to_string(sum));
}

uint32_t draw_size(Rng& rng, const std::vector<std::pair<uint32_t, double>>& dist) {
    double u = rng.uniform();
    double acc = 0;
    for (const auto& [size, p] : dist) {
        acc += p;
        if (u < acc) return size;
    }
    return dist.back().first;
}

} // namespace

void ClassProfile::validate() const {
    if (mean_down_rate < 0 || mean_up_rate < 0)
        throw BadConfig(name + ": rates must be >= 0");
    if (burst_on_ms <= 0 || burst_off_ms <= 0)
        throw BadConfig(name + ": on/off means must be > 0");
    if (jitter_fraction < 0 || jitter_fraction >= 1)
        throw BadConfig(name + ": jitter_fraction must be in [0,1)");
    if (mean_down_rate > 0 && pkt_size_down.empty())
        throw BadConfig(name + ": downstream rate set but no packet sizes");
    if (mean_up_rate > 0 && pkt_size_up.empty())
        throw BadConfig(name + ": upstream rate set but no packet sizes");
    validate_distribution(pkt_size_down, name);
    validate_distribution(pkt_size_up, name);
}

std::vector<PacketRecord> generate_flow(const ClassProfile& profile, double duration_ms,
                                        uint64_t seed, const FlowEndpoints& ep) {
    profile.validate();
    if (duration_ms <= 0) throw BadConfig("flow duration must be > 0");

    Rng rng(seed);
    std::vector<PacketRecord> packets;
    if (profile.mean_down_rate <= 0 && profile.mean_up_rate <= 0) return packets;

    // One on/off envelope drives both directions.
    double duty = profile.burst_on_ms / (profile.burst_on_ms + profile.burst_off_ms);
    bool on = rng.uniform() < duty;
    double t = 0;
    double next_down = 0, next_up = 0;  // next emission time per direction
    while (t < duration_ms) {
        double seg_len = rng.exponential(on ? profile.burst_on_ms : profile.burst_off_ms);
        double seg_end = std::min(t + seg_len, duration_ms);
        if (on) {
            next_down = std::max(next_down, t);
            next_up = std::max(next_up, t);
            while (true) {
                // Emit strictly in time order across the two directions so the
                // RNG consumption order is well defined.
                bool have_down = profile.mean_down_rate > 0 && next_down < seg_end;
                bool have_up = profile.mean_up_rate > 0 && next_up < seg_end;
                if (!have_down && !have_up) break;
                bool down = have_down && (!have_up || next_down <= next_up);
                double& next = down ? next_down : next_up;
                uint32_t size = draw_size(rng, down ? profile.pkt_size_down : profile.pkt_size_up);
                PacketRecord rec;
                rec.timestamp_ms = next;
                rec.size_bytes = size;
                if (down) {
                    rec.src_ip = ep.server_ip;
                    rec.dst_ip = ep.client_ip;
                    rec.src_port = ep.server_port;
                    rec.dst_port = ep.client_port;
                } else {
                    rec.src_ip = ep.client_ip;
                    rec.dst_ip = ep.server_ip;
                    rec.src_port = ep.client_port;
                    rec.dst_port = ep.server_port;
                }
                packets.push_back(rec);
                double rate = down ? profile.mean_down_rate : profile.mean_up_rate;
                double gap = static_cast<double>(size) / rate * 1000.0;
                if (profile.jitter_fraction > 0)
                    gap *= 1.0 + profile.jitter_fraction * rng.uniform(-1.0, 1.0);
                next += gap;
            }
        }
        t = seg_end;
        on = !on;
    }
    std::stable_sort(packets.begin(), packets.end(),
                     [](const PacketRecord& a, const PacketRecord& b) {
                         return a.timestamp_ms < b.timestamp_ms;
                     });
    return packets;
}

std::vector<PacketRecord> generate_flow(const ClassProfile& profile, double duration_ms,
                                        uint64_t seed) {
    FlowEndpoints ep;
    ep.client_ip = Ipv4::parse("192.168.0.95");
    ep.server_ip = profile.server_ip.addr ? profile.server_ip : Ipv4::parse("54.192.39.46");
    ep.client_port = 59666;
    return generate_flow(profile, duration_ms, seed, ep);
}

namespace {

ClassProfile default_noise_profile() {
    ClassProfile p;
    p.name = "WebNoise";
    p.mean_down_rate = 60000;
    p.mean_up_rate = 6000;
    p.burst_on_ms = 1e9;  // always on within its burst window
    p.burst_off_ms = 1;
    p.pkt_size_down = {{1514, 0.4}, {583, 0.3}, {133, 0.3}};
    p.pkt_size_up = {{66, 0.7}, {583, 0.3}};
    p.jitter_fraction = 0.5;
    p.server_ip = Ipv4::parse("151.101.1.195");
    return p;
}

} // namespace

TraceSample compose_sample(const std::vector<const ClassProfile*>& profiles, bool web_noise,
                           uint64_t seed, const std::string& sample_id,
                           const ClassProfile* noise_profile) {
    if (profiles.size() > 4)
        throw TooManyClients(std::to_string(profiles.size()) + " profiles; the tunnel holds 4");

    TraceSample sample;
    sample.sample_id = sample_id;
    sample.client_count = static_cast<int>(profiles.size());

    for (size_t i = 0; i < profiles.size(); ++i) {
        const ClassProfile& p = *profiles[i];
        int cls = class_index(p.name);
        if (cls >= 0) sample.labels.add(cls);
        FlowEndpoints ep;
        ep.client_ip = Ipv4::parse("192.168.0." + std::to_string(10 + i));
        ep.server_ip = p.server_ip;
        ep.client_port = static_cast<uint16_t>(49152 + i);
        auto flow = generate_flow(p, kSampleMs, derive_seed(seed, i), ep);
        sample.packets.insert(sample.packets.end(), flow.begin(), flow.end());
    }

    if (web_noise) {
        ClassProfile noise = noise_profile ? *noise_profile : default_noise_profile();
        uint64_t noise_seed = derive_seed(seed, 0x6E6F6973);
        Rng rng(noise_seed);
        double offset = rng.uniform(0.0, kSampleMs - kNoiseBurstMs);
        FlowEndpoints ep;
        ep.client_ip = Ipv4::parse("192.168.0.9");
        ep.server_ip = noise.server_ip;
        ep.client_port = 49151;
        auto burst = generate_flow(noise, kNoiseBurstMs, derive_seed(noise_seed, 1), ep);
        for (auto& pkt : burst) {
            pkt.timestamp_ms += offset;
            sample.packets.push_back(pkt);
        }
    }

    std::stable_sort(sample.packets.begin(), sample.packets.end(),
                     [](const PacketRecord& a, const PacketRecord& b) {
                         return a.timestamp_ms < b.timestamp_ms;
                     });
    return sample;
}

const ClassProfile& ProfileSet::provider(int class_idx) const {
    auto it = providers.find(std::string(kClassNames[static_cast<size_t>(class_idx)]));
    if (it == providers.end())
        throw BadConfig("profiles config lacks a block for " +
                        std::string(kClassNames[static_cast<size_t>(class_idx)]));
    return it->second;
}

namespace {

std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::pair<uint32_t, double>> parse_size_dist(const std::string& text,
                                                         const std::string& where) {
    // "1514:0.9,583:0.1"
    std::vector<std::pair<uint32_t, double>> dist;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw BadConfig(where + ": size distribution entry '" + item + "' lacks ':'");
        dist.emplace_back(static_cast<uint32_t>(std::stoul(item.substr(0, colon))),
                          std::stod(item.substr(colon + 1)));
    }
    return dist;
}

} // namespace

ProfileSet parse_profiles(std::istream& in) {
    ProfileSet set;
    ClassProfile current;
    bool in_block = false;
    auto flush = [&]() {
        if (!in_block) return;
        current.validate();
        if (current.name == "WebNoise")
            set.web_noise = current;
        else if (class_index(current.name) >= 0)
            set.providers[current.name] = current;
        else
            throw BadConfig("unknown profile block [" + current.name + "]");
    };
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            flush();
            current = ClassProfile{};
            current.name = trim(t.substr(1, t.size() - 2));
            in_block = true;
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos || !in_block)
            throw BadConfig("bad profiles line '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key == "mean_down_rate") current.mean_down_rate = std::stod(value);
        else if (key == "mean_up_rate") current.mean_up_rate = std::stod(value);
        else if (key == "burst_on_ms") current.burst_on_ms = std::stod(value);
        else if (key == "burst_off_ms") current.burst_off_ms = std::stod(value);
        else if (key == "pkt_size_down") current.pkt_size_down = parse_size_dist(value, current.name);
        else if (key == "pkt_size_up") current.pkt_size_up = parse_size_dist(value, current.name);
        else if (key == "jitter_fraction") current.jitter_fraction = std::stod(value);
        else if (key == "server_ip") current.server_ip = Ipv4::parse(value);
        else throw BadConfig("unknown profile key '" + key + "'");
    }
    flush();
    return set;
}

ProfileSet load_profiles(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open profiles config '" + path + "'");
    return parse_profiles(in);
}

int DatasetSpec::total_samples() const {
    int n = 0;
    for (const auto& [labels, count] : combination_counts) n += count;
    return n;
}

std::vector<ManifestEntry> dataset_manifest(const DatasetSpec& spec) {
    if (spec.combination_counts.empty())
        throw BadConfig("dataset spec has no combinations");
    std::vector<ManifestEntry> manifest;
    manifest.reserve(static_cast<size_t>(spec.total_samples()));
    int width = 1;
    for (int n = spec.total_samples(); n >= 10; n /= 10) ++width;
    uint64_t index = 0;
    for (const auto& [labels, count] : spec.combination_counts) {
        if (count < 0) throw BadConfig("negative sample count in dataset spec");
        for (int i = 0; i < count; ++i) {
            ManifestEntry e;
            std::string num = std::to_string(index);
            e.sample_id = "s" + std::string(static_cast<size_t>(width) - num.size(), '0') + num;
            e.seed = derive_seed(spec.master_seed, index);
            e.labels = labels;
            e.client_count = labels.count();
            manifest.push_back(std::move(e));
            ++index;
        }
    }
    return manifest;
}

TraceSample generate_sample(const ManifestEntry& entry, const ProfileSet& profiles,
                            bool web_noise) {
    std::vector<const ClassProfile*> active;
    for (int c = 0; c < kNumClasses; ++c)
        if (entry.labels.contains(c)) active.push_back(&profiles.provider(c));
    const ClassProfile* noise = profiles.web_noise ? &*profiles.web_noise : nullptr;
    TraceSample s = compose_sample(active, web_noise, entry.seed, entry.sample_id, noise);
    return s;
}

std::pair<std::vector<TraceSample>, std::vector<ManifestEntry>> generate_dataset(
    const DatasetSpec& spec, const ProfileSet& profiles) {
    auto manifest = dataset_manifest(spec);
    std::vector<TraceSample> samples;
    samples.reserve(manifest.size());
    for (const auto& entry : manifest)
        samples.push_back(generate_sample(entry, profiles, spec.web_noise));
    return {std::move(samples), std::move(manifest)};
}

void write_manifest(const std::vector<ManifestEntry>& manifest, std::ostream& out) {
    for (const auto& e : manifest)
        out << e.sample_id << ',' << e.seed << ',' << e.client_count << ','
            << e.labels.to_string() << '\n';
}

std::vector<ManifestEntry> read_manifest(std::istream& in) {
    std::vector<ManifestEntry> manifest;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<std::string, 4> fields;
        size_t pos = 0;
        for (int f = 0; f < 4; ++f) {
            size_t next = f == 3 ? std::string::npos : line.find(',', pos);
            fields[static_cast<size_t>(f)] =
                line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
            if (f < 3) {
                if (next == std::string::npos)
                    throw MalformedRow("manifest line " + std::to_string(line_no) +
                                       ": expected 4 fields");
                pos = next + 1;
            }
        }
        ManifestEntry e;
        e.sample_id = fields[0];
        e.seed = std::stoull(fields[1]);
        e.client_count = std::stoi(fields[2]);
        e.labels = LabelSet::parse(fields[3]);
        manifest.push_back(std::move(e));
    }
    return manifest;
}

DatasetSpec parse_dataset_spec(std::istream& in, std::string* profiles_path) {
    DatasetSpec spec;
    if (profiles_path) profiles_path->clear();
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos) throw BadConfig("bad dataset spec line '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key == "master_seed") {
            spec.master_seed = std::stoull(value);
        } else if (key == "web_noise") {
            if (value != "true" && value != "false")
                throw BadConfig("web_noise must be true or false");
            spec.web_noise = value == "true";
        } else if (key == "profiles") {
            if (profiles_path) *profiles_path = value;
        } else if (key.rfind("count ", 0) == 0) {
            LabelSet labels = LabelSet::parse(trim(key.substr(6)));
            spec.combination_counts.emplace_back(labels, std::stoi(value));
        } else {
            throw BadConfig("unknown dataset spec key '" + key + "'");
        }
    }
    if (spec.combination_counts.empty())
        throw BadConfig("dataset spec needs at least one `count <labels> = N` line");
    return spec;
}

} // namespace ntlc
