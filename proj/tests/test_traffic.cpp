#include <doctest.h>

#include <sstream>

#include "ntlc/error.hpp"
#include "ntlc/rng.hpp"
#include "ntlc/traffic.hpp"

using namespace ntlc;

namespace {

std::vector<PacketRecord> parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_trace(in);
}

} // namespace

TEST_CASE("parse_trace reads the documented column layout") {
    auto records = parse_text(
        "t(ms) size(byte) src_ip dst_ip sport dport\n"
        "0.000 1514 54.192.39.46 192.168.0.95 443 59666\n"
        "0.590 66 192.168.0.95 54.192.39.46 59666 443\n");
    REQUIRE(records.size() == 2);
    CHECK(records[0].timestamp_ms == doctest::Approx(0.0));
    CHECK(records[0].size_bytes == 1514);
    CHECK(records[0].src_ip.to_string() == "54.192.39.46");
    CHECK(records[0].dst_ip.to_string() == "192.168.0.95");
    CHECK(records[0].src_port == 443);
    CHECK(records[0].dst_port == 59666);
    CHECK(records[1].size_bytes == 66);
}

TEST_CASE("parse_trace accepts comma-delimited rows and blank lines") {
    auto records = parse_text("\n1.5,100,10.0.0.1,192.168.0.2,80,5555\n\n");
    REQUIRE(records.size() == 1);
    CHECK(records[0].timestamp_ms == doctest::Approx(1.5));
}

TEST_CASE("parse_trace of empty input is an empty list") {
    CHECK(parse_text("").empty());
    CHECK(parse_text("t size src dst sport dport\n").empty());
}

TEST_CASE("parse_trace rejects decreasing timestamps") {
    CHECK_THROWS_AS(parse_text("5.0 10 1.1.1.1 2.2.2.2 1 2\n4.0 10 1.1.1.1 2.2.2.2 1 2\n"),
                    UnorderedTrace);
}

TEST_CASE("parse_trace rejects malformed rows") {
    CHECK_THROWS_AS(parse_text("1.0 10 1.1.1.1 2.2.2.2 1\n"), MalformedRow);  // 5 fields
    CHECK_THROWS_AS(parse_text("abc 10 1.1.1.1 2.2.2.2 1 2\n2 3 4\n"), MalformedRow);
    CHECK_THROWS_AS(parse_text("1.0 0 1.1.1.1 2.2.2.2 1 2\n"), MalformedRow);   // size 0
    CHECK_THROWS_AS(parse_text("1.0 10 1.1.300.1 2.2.2.2 1 2\n"), MalformedRow);
    CHECK_THROWS_AS(parse_text("1.0 10 1.1.1.1 2.2.2.2 1 99999\n"), MalformedRow);
    CHECK_THROWS_AS(parse_text("-1.0 10 1.1.1.1 2.2.2.2 1 2\n"), MalformedRow);
}

TEST_CASE("parse_trace round-trips serialize_trace on random records") {
    Rng rng(2024);
    std::vector<PacketRecord> records;
    double t = 0;
    for (int i = 0; i < 200; ++i) {
        t += rng.uniform(0.0, 7.3);
        PacketRecord r;
        r.timestamp_ms = t;
        r.size_bytes = static_cast<uint32_t>(1 + rng.below(1514));
        r.src_ip = Ipv4{static_cast<uint32_t>(rng.next_u64())};
        r.dst_ip = Ipv4{static_cast<uint32_t>(rng.next_u64())};
        r.src_port = static_cast<uint16_t>(rng.below(65536));
        r.dst_port = static_cast<uint16_t>(rng.below(65536));
        records.push_back(r);
    }
    std::ostringstream out;
    serialize_trace(records, out);
    auto parsed = parse_text(out.str());
    CHECK(parsed == records);
}

TEST_CASE("assign_direction follows the client subnet") {
    Subnet subnet = Subnet::parse("192.168.0.0/24");
    PacketRecord up;
    up.src_ip = Ipv4::parse("192.168.0.95");
    up.dst_ip = Ipv4::parse("54.192.39.46");
    CHECK(assign_direction(up, subnet) == Direction::Upstream);

    PacketRecord down;
    down.src_ip = Ipv4::parse("54.192.39.46");
    down.dst_ip = Ipv4::parse("192.168.0.95");
    CHECK(assign_direction(down, subnet) == Direction::Downstream);

    PacketRecord both;
    both.src_ip = Ipv4::parse("192.168.0.1");
    both.dst_ip = Ipv4::parse("192.168.0.2");
    CHECK_THROWS_AS(assign_direction(both, subnet), AmbiguousDirection);

    PacketRecord neither;
    neither.src_ip = Ipv4::parse("10.0.0.1");
    neither.dst_ip = Ipv4::parse("10.0.0.2");
    CHECK_THROWS_AS(assign_direction(neither, subnet), AmbiguousDirection);
}

TEST_CASE("subnet membership handles prefix edges") {
    CHECK(Subnet::parse("0.0.0.0/0").contains(Ipv4::parse("8.8.8.8")));
    CHECK(Subnet::parse("10.1.2.3/32").contains(Ipv4::parse("10.1.2.3")));
    CHECK_FALSE(Subnet::parse("10.1.2.3/32").contains(Ipv4::parse("10.1.2.4")));
    CHECK_THROWS_AS(Subnet::parse("10.0.0.0/33"), MalformedRow);
    CHECK_THROWS_AS(Subnet::parse("10.0.0.0"), MalformedRow);
}

namespace {

std::vector<PacketRecord> ladder(double step_ms, double end_ms) {
    std::vector<PacketRecord> out;
    for (double t = 0; t < end_ms; t += step_ms) {
        PacketRecord r;
        r.timestamp_ms = t;
        r.size_bytes = 100;
        r.src_ip = Ipv4::parse("192.168.0.5");
        r.dst_ip = Ipv4::parse("1.2.3.4");
        out.push_back(r);
    }
    return out;
}

LabelSet no_labels(double, double) { return LabelSet{}; }

} // namespace

TEST_CASE("slice_minutes emits floor(duration / 60000) samples") {
    auto two = ladder(1000.0, 120000.0 + 1.0);  // last packet at 120000
    auto samples = slice_minutes(two, no_labels);
    CHECK(samples.size() == 2);

    auto partial = ladder(1000.0, 59000.0);
    CHECK(slice_minutes(partial, no_labels).empty());

    CHECK(slice_minutes({}, no_labels).empty());
}

TEST_CASE("slice_minutes rebases timestamps and uses half-open minutes") {
    std::vector<PacketRecord> trace;
    for (double t : {0.0, 59999.0, 60000.0, 61000.0, 125000.0}) {
        PacketRecord r;
        r.timestamp_ms = t;
        r.size_bytes = 50;
        r.src_ip = Ipv4::parse("192.168.0.5");
        r.dst_ip = Ipv4::parse("1.2.3.4");
        trace.push_back(r);
    }
    auto samples = slice_minutes(trace, no_labels, "m");
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].sample_id == "m_0");
    REQUIRE(samples[0].packets.size() == 2);
    // The packet at exactly t=60000 opens sample 2.
    REQUIRE(samples[1].packets.size() == 2);
    CHECK(samples[1].packets[0].timestamp_ms == doctest::Approx(0.0));
    CHECK(samples[1].packets[1].timestamp_ms == doctest::Approx(1000.0));
    for (const auto& s : samples)
        for (const auto& p : s.packets) {
            CHECK(p.timestamp_ms >= 0.0);
            CHECK(p.timestamp_ms < 60000.0);
        }
}

TEST_CASE("label sets parse and print in class order") {
    LabelSet l = LabelSet::parse("YouTube;Amazon");
    CHECK(l.count() == 2);
    CHECK(l.contains(class_index("Amazon")));
    CHECK(l.contains(class_index("YouTube")));
    CHECK(l.to_string() == "Amazon;YouTube");
    CHECK(LabelSet::parse("").empty());
    CHECK_THROWS_AS(LabelSet::parse("NotASite"), MalformedRow);

    std::ostringstream out;
    write_labels({{"s1", l}, {"s2", LabelSet{}}}, out);
    std::istringstream in(out.str());
    auto rows = read_labels(in);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].second == l);
    CHECK(rows[1].second.empty());
}
