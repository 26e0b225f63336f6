#ifndef NTLC_TRAFFIC_HPP
#define NTLC_TRAFFIC_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ntlc {

// --- provider classes -------------------------------------------------------

// Fixed class order; checkpoints and multilabel outputs depend on it.
inline constexpr int kNumClasses = 6;
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "Amazon", "CNNNews", "FoxNews", "DailyMotion", "Netflix", "YouTube"};

int class_index(std::string_view name);  // -1 when unknown

// Subset of the six provider classes, stored as a bitmask in class order.
class LabelSet {
public:
    LabelSet() = default;
    static LabelSet from_bits(uint8_t bits) { LabelSet s; s.bits_ = bits & 0x3F; return s; }
    static LabelSet parse(std::string_view text);  // "A;B;C", empty ok

    void add(int class_idx) { bits_ |= static_cast<uint8_t>(1u << class_idx); }
    bool contains(int class_idx) const { return (bits_ >> class_idx) & 1u; }
    int count() const;
    bool empty() const { return bits_ == 0; }
    uint8_t bits() const { return bits_; }
    bool contains_all(LabelSet other) const { return (bits_ & other.bits_) == other.bits_; }

    std::string to_string() const;  // "A;B" in class order

    friend bool operator==(LabelSet a, LabelSet b) { return a.bits_ == b.bits_; }
    friend bool operator<(LabelSet a, LabelSet b) { return a.bits_ < b.bits_; }

private:
    uint8_t bits_ = 0;
};

// --- packets and samples -----------------------------------------------------

struct Ipv4 {
    uint32_t addr = 0;  // host byte order

    static Ipv4 parse(std::string_view text);
    std::string to_string() const;
    friend bool operator==(Ipv4 a, Ipv4 b) { return a.addr == b.addr; }
};

struct Subnet {
    uint32_t network = 0;
    int prefix_len = 0;

    static Subnet parse(std::string_view cidr);  // "192.168.0.0/24"
    bool contains(Ipv4 ip) const;
    std::string to_string() const;
};

struct PacketRecord {
    double timestamp_ms = 0;  // milliseconds from trace start
    uint32_t size_bytes = 0;  // captured frame length
    Ipv4 src_ip, dst_ip;
    uint16_t src_port = 0, dst_port = 0;

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

enum class Direction { Upstream, Downstream };

inline constexpr double kSampleMs = 60000.0;

struct TraceSample {
    std::string sample_id;
    std::vector<PacketRecord> packets;  // sorted, timestamps in [0, 60000)
    LabelSet labels;
    int client_count = 0;
};

// --- operations ---------------------------------------------------------------

// One packet per line: `t_ms size_bytes src_ip dst_ip sport dport`, whitespace
// or comma separated, optional leading header line starting with a letter.
std::vector<PacketRecord> parse_trace(std::istream& in);
std::vector<PacketRecord> parse_trace_file(const std::string& path);
void serialize_trace(const std::vector<PacketRecord>& records, std::ostream& out);

Direction assign_direction(const PacketRecord& record, const Subnet& client_subnet);

// Slices into back-to-back [k*60000, (k+1)*60000) samples with rebased
// timestamps; the trailing partial minute is dropped.
std::vector<TraceSample> slice_minutes(
    const std::vector<PacketRecord>& trace,
    const std::function<LabelSet(double start_ms, double end_ms)>& labels_fn,
    const std::string& id_prefix = "minute");

// Label sidecar: one `sample_id,label1;label2` line per sample.
void write_labels(const std::vector<std::pair<std::string, LabelSet>>& rows,
                  std::ostream& out);
std::vector<std::pair<std::string, LabelSet>> read_labels(std::istream& in);

} // namespace ntlc

#endif
