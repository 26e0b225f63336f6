#include "ntlc/traffic.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ntlc/error.hpp"

namespace ntlc {

int class_index(std::string_view name) {
    for (int i = 0; i < kNumClasses; ++i) {
        if (kClassNames[i] == name) return i;
    }
    return -1;
}

LabelSet LabelSet::parse(std::string_view text) {
    LabelSet out;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t next = text.find(';', pos);
        std::string_view tok = text.substr(pos, next == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : next - pos);
        if (!tok.empty()) {
            int idx = class_index(tok);
            if (idx < 0) throw MalformedRow("unknown class label '" + std::string(tok) + "'");
            out.add(idx);
        }
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

int LabelSet::count() const {
    int n = 0;
    for (int i = 0; i < kNumClasses; ++i) n += contains(i);
    return n;
}

std::string LabelSet::to_string() const {
    std::string s;
    for (int i = 0; i < kNumClasses; ++i) {
        if (!contains(i)) continue;
        if (!s.empty()) s += ';';
        s += kClassNames[i];
    }
    return s;
}

Ipv4 Ipv4::parse(std::string_view text) {
    uint32_t addr = 0;
    size_t pos = 0;
    for (int octet = 0; octet < 4; ++octet) {
        if (pos >= text.size()) throw MalformedRow("bad IPv4 address '" + std::string(text) + "'");
        unsigned value = 0;
        auto [p, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
        if (ec != std::errc() || value > 255)
            throw MalformedRow("bad IPv4 address '" + std::string(text) + "'");
        pos = static_cast<size_t>(p - text.data());
        if (octet < 3) {
            if (pos >= text.size() || text[pos] != '.')
                throw MalformedRow("bad IPv4 address '" + std::string(text) + "'");
            ++pos;
        }
        addr = (addr << 8) | value;
    }
    if (pos != text.size()) throw MalformedRow("bad IPv4 address '" + std::string(text) + "'");
    return Ipv4{addr};
}

std::string Ipv4::to_string() const {
    std::string s;
    for (int shift = 24; shift >= 0; shift -= 8) {
        if (!s.empty()) s += '.';
        s += std::to_string((addr >> shift) & 0xFF);
    }
    return s;
}

Subnet Subnet::parse(std::string_view cidr) {
    size_t slash = cidr.find('/');
    if (slash == std::string_view::npos)
        throw MalformedRow("subnet '" + std::string(cidr) + "' lacks /prefix");
    Ipv4 net = Ipv4::parse(cidr.substr(0, slash));
    int len = 0;
    auto tail = cidr.substr(slash + 1);
    auto [p, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), len);
    if (ec != std::errc() || p != tail.data() + tail.size() || len < 0 || len > 32)
        throw MalformedRow("bad subnet prefix in '" + std::string(cidr) + "'");
    return Subnet{net.addr, len};
}

bool Subnet::contains(Ipv4 ip) const {
    if (prefix_len == 0) return true;
    uint32_t mask = prefix_len == 32 ? 0xFFFFFFFFu : ~(0xFFFFFFFFu >> prefix_len);
    return (ip.addr & mask) == (network & mask);
}

std::string Subnet::to_string() const {
    return Ipv4{network}.to_string() + "/" + std::to_string(prefix_len);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ','))
            ++i;
        size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != ',')
            ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

double parse_double_field(std::string_view tok, const char* what) {
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw MalformedRow(std::string("unparsable ") + what + " '" + std::string(tok) + "'");
    return v;
}

uint64_t parse_uint_field(std::string_view tok, uint64_t max, const char* what) {
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || v > max)
        throw MalformedRow(std::string("unparsable ") + what + " '" + std::string(tok) + "'");
    return v;
}

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

} // namespace

std::vector<PacketRecord> parse_trace(std::istream& in) {
    std::vector<PacketRecord> records;
    std::string line;
    bool first_content_line = true;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view sv(line);
        size_t ws = sv.find_first_not_of(" \t");
        if (ws == std::string_view::npos) continue;
        if (first_content_line && std::isalpha(static_cast<unsigned char>(sv[ws]))) {
            first_content_line = false;  // header row
            continue;
        }
        first_content_line = false;
        auto fields = split_fields(sv);
        if (fields.size() != 6)
            throw MalformedRow("line " + std::to_string(line_no) + ": expected 6 fields, got " +
                               std::to_string(fields.size()));
        PacketRecord rec;
        rec.timestamp_ms = parse_double_field(fields[0], "timestamp");
        if (rec.timestamp_ms < 0)
            throw MalformedRow("line " + std::to_string(line_no) + ": negative timestamp");
        uint64_t size = parse_uint_field(fields[1], 0xFFFFFFFFull, "size");
        if (size < 1)
            throw MalformedRow("line " + std::to_string(line_no) + ": size must be >= 1");
        rec.size_bytes = static_cast<uint32_t>(size);
        rec.src_ip = Ipv4::parse(fields[2]);
        rec.dst_ip = Ipv4::parse(fields[3]);
        rec.src_port = static_cast<uint16_t>(parse_uint_field(fields[4], 65535, "port"));
        rec.dst_port = static_cast<uint16_t>(parse_uint_field(fields[5], 65535, "port"));
        if (!records.empty() && rec.timestamp_ms < records.back().timestamp_ms)
            throw UnorderedTrace("line " + std::to_string(line_no) + ": timestamp " +
                                 format_double(rec.timestamp_ms) + " < previous " +
                                 format_double(records.back().timestamp_ms));
        records.push_back(rec);
    }
    return records;
}

std::vector<PacketRecord> parse_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file '" + path + "'");
    return parse_trace(in);
}

void serialize_trace(const std::vector<PacketRecord>& records, std::ostream& out) {
    out << "t(ms) size(byte) src_ip dst_ip sport dport\n";
    for (const auto& r : records) {
        out << format_double(r.timestamp_ms) << ' ' << r.size_bytes << ' '
            << r.src_ip.to_string() << ' ' << r.dst_ip.to_string() << ' ' << r.src_port
            << ' ' << r.dst_port << '\n';
    }
}

Direction assign_direction(const PacketRecord& record, const Subnet& client_subnet) {
    bool src_in = client_subnet.contains(record.src_ip);
    bool dst_in = client_subnet.contains(record.dst_ip);
    if (src_in == dst_in)
        throw AmbiguousDirection("src " + record.src_ip.to_string() + " and dst " +
                                 record.dst_ip.to_string() + (src_in ? " both inside "
                                                                     : " both outside ") +
                                 client_subnet.to_string());
    return src_in ? Direction::Upstream : Direction::Downstream;
}

std::vector<TraceSample> slice_minutes(
    const std::vector<PacketRecord>& trace,
    const std::function<LabelSet(double, double)>& labels_fn,
    const std::string& id_prefix) {
    std::vector<TraceSample> samples;
    if (trace.empty()) return samples;
    double duration = trace.back().timestamp_ms;
    size_t full_minutes = static_cast<size_t>(duration / kSampleMs);
    samples.reserve(full_minutes);
    size_t cursor = 0;
    for (size_t k = 0; k < full_minutes; ++k) {
        double start = static_cast<double>(k) * kSampleMs;
        double end = start + kSampleMs;
        TraceSample s;
        s.sample_id = id_prefix + "_" + std::to_string(k);
        s.labels = labels_fn(start, end);
        s.client_count = s.labels.count();
        while (cursor < trace.size() && trace[cursor].timestamp_ms < end) {
            PacketRecord r = trace[cursor];
            r.timestamp_ms -= start;
            s.packets.push_back(r);
            ++cursor;
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

void write_labels(const std::vector<std::pair<std::string, LabelSet>>& rows,
                  std::ostream& out) {
    for (const auto& [id, labels] : rows) out << id << ',' << labels.to_string() << '\n';
}

std::vector<std::pair<std::string, LabelSet>> read_labels(std::istream& in) {
    std::vector<std::pair<std::string, LabelSet>> rows;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos || comma == 0)
            throw MalformedRow("labels line " + std::to_string(line_no) +
                               ": expected `sample_id,labels`");
        rows.emplace_back(line.substr(0, comma), LabelSet::parse(line.substr(comma + 1)));
    }
    return rows;
}

} // namespace ntlc
