#ifndef NTLC_SIMULATOR_HPP
#define NTLC_SIMULATOR_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ntlc/traffic.hpp"

namespace ntlc {

// Simulated clients live in 192.168.0.0/24; featurization defaults to it.
inline constexpr std::string_view kClientSubnetCidr = "192.168.0.0/24";

// On/off duty-cycle traffic source. Values come from a profiles config file,
// one block per provider; WebNoise is a reserved block name for the synthetic
// per-minute page access.
struct ClassProfile {
    std::string name;
    double mean_down_rate = 0;  // bytes/s while the flow is on
    double mean_up_rate = 0;
    double burst_on_ms = 1000;   // mean on-segment length
    double burst_off_ms = 1000;  // mean off-segment length
    std::vector<std::pair<uint32_t, double>> pkt_size_down;  // (size, probability)
    std::vector<std::pair<uint32_t, double>> pkt_size_up;
    double jitter_fraction = 0;  // uniform +/- fraction on inter-packet gaps
    Ipv4 server_ip;

    void validate() const;  // throws BadConfig
};

struct FlowEndpoints {
    Ipv4 client_ip;
    Ipv4 server_ip;
    uint16_t client_port = 49152;
    uint16_t server_port = 443;
};

// Alternating exponential on/off segments; during on segments each direction
// emits packets at its mean byte rate with jittered gaps. Bit-identical for
// identical (profile, duration, seed, endpoints).
std::vector<PacketRecord> generate_flow(const ClassProfile& profile, double duration_ms,
                                        uint64_t seed, const FlowEndpoints& endpoints);
std::vector<PacketRecord> generate_flow(const ClassProfile& profile, double duration_ms,
                                        uint64_t seed);

// Up to four provider flows plus an optional ~2 s web-noise burst merged into
// one 60 s sample. Labels are the provider names among `profiles`.
TraceSample compose_sample(const std::vector<const ClassProfile*>& profiles, bool web_noise,
                           uint64_t seed, const std::string& sample_id,
                           const ClassProfile* noise_profile = nullptr);

struct ProfileSet {
    std::map<std::string, ClassProfile> providers;  // keyed by class name
    std::optional<ClassProfile> web_noise;

    const ClassProfile& provider(int class_idx) const;  // throws BadConfig when missing
};

ProfileSet parse_profiles(std::istream& in);
ProfileSet load_profiles(const std::string& path);

struct DatasetSpec {
    std::vector<std::pair<LabelSet, int>> combination_counts;
    bool web_noise = true;
    uint64_t master_seed = 0;

    int total_samples() const;
};

struct ManifestEntry {
    std::string sample_id;
    uint64_t seed = 0;
    int client_count = 0;
    LabelSet labels;
};

// Per-sample seeds derive from (master_seed, sample index) so any sample can
// be regenerated in isolation.
std::vector<ManifestEntry> dataset_manifest(const DatasetSpec& spec);
TraceSample generate_sample(const ManifestEntry& entry, const ProfileSet& profiles,
                            bool web_noise);
std::pair<std::vector<TraceSample>, std::vector<ManifestEntry>> generate_dataset(
    const DatasetSpec& spec, const ProfileSet& profiles);

// Manifest file: `sample_id,seed,client_count,label1;label2` per line.
void write_manifest(const std::vector<ManifestEntry>& manifest, std::ostream& out);
std::vector<ManifestEntry> read_manifest(std::istream& in);

// Dataset spec file: `master_seed = ...`, `web_noise = ...`, optional
// `profiles = <path>`, and one `count <label1;label2> = N` line per combination.
DatasetSpec parse_dataset_spec(std::istream& in, std::string* profiles_path);

} // namespace ntlc

#endif
