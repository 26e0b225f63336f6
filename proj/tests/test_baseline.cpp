#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ntlc/baseline.hpp"
#include "ntlc/rng.hpp"
#include "oracles.hpp"

using namespace ntlc;

namespace {

const Subnet kSubnet = Subnet::parse("192.168.0.0/24");

PacketRecord packet(double t, uint32_t size, bool upstream) {
    PacketRecord r;
    r.timestamp_ms = t;
    r.size_bytes = size;
    r.src_ip = Ipv4::parse(upstream ? "192.168.0.95" : "54.192.39.46");
    r.dst_ip = Ipv4::parse(upstream ? "54.192.39.46" : "192.168.0.95");
    return r;
}

TraceSample random_sample(uint64_t seed, int packets) {
    Rng rng(seed);
    TraceSample s;
    for (int i = 0; i < packets; ++i)
        s.packets.push_back(packet(rng.uniform(0.0, 60000.0),
                                   static_cast<uint32_t>(60 + rng.below(1455)),
                                   rng.below(3) == 0));
    std::sort(s.packets.begin(), s.packets.end(),
              [](const PacketRecord& a, const PacketRecord& b) {
                  return a.timestamp_ms < b.timestamp_ms;
              });
    return s;
}

} // namespace

TEST_CASE("shannon_entropy matches the textbook cases") {
    CHECK(shannon_entropy({7, 7, 7}) == doctest::Approx(0.0));
    CHECK(shannon_entropy({1, 2}) == doctest::Approx(1.0));
    CHECK(shannon_entropy({1, 1, 2, 3}) == doctest::Approx(1.5));
    CHECK(shannon_entropy({}) == 0.0);
    CHECK(shannon_entropy({4.25}) == 0.0);
}

TEST_CASE("shannon_entropy matches the brute-force oracle on seeded series") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> values;
        int n = static_cast<int>(2 + rng.below(60));
        for (int i = 0; i < n; ++i)
            values.push_back(static_cast<double>(rng.below(8)));
        CHECK(shannon_entropy(values) ==
              doctest::Approx(oracle::shannon_entropy_bits(values)).epsilon(1e-12));
    }
}

TEST_CASE("permutation_entropy handles the contract cases") {
    CHECK(permutation_entropy({1, 2, 3, 4, 5, 6}, 3) == doctest::Approx(0.0));
    CHECK(permutation_entropy({1, 3, 2}, 2) == doctest::Approx(1.0));
    CHECK(permutation_entropy({1, 2}, 3) == 0.0);  // shorter than the order
    CHECK_THROWS_AS(permutation_entropy({1, 2, 3}, 1), Error);
}

TEST_CASE("permutation_entropy matches brute force and the log2(n!) bound") {
    Rng rng(47);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> values;
        int n = static_cast<int>(10 + rng.below(50));
        for (int i = 0; i < n; ++i) values.push_back(rng.uniform(0.0, 4.0));
        if (trial % 3 == 0)
            for (auto& v : values) v = std::floor(v);  // force ties
        for (int order = 2; order <= 5; ++order) {
            double got = permutation_entropy(values, order);
            CHECK(got == doctest::Approx(oracle::permutation_entropy_bits(values, order))
                             .epsilon(1e-12));
            double factorial = 1;
            for (int i = 2; i <= order; ++i) factorial *= i;
            CHECK(got <= std::log2(factorial) + 1e-12);
        }
    }
}

TEST_CASE("stat_block on a constant series") {
    auto block = stat_block({5, 5, 5, 5});
    CHECK(block[0] == 5);   // max
    CHECK(block[1] == 5);   // min
    CHECK(block[2] == 5);   // mean
    CHECK(block[3] == 5);   // median
    for (size_t i = 4; i < block.size(); ++i) CHECK(block[i] == 0.0);
}

TEST_CASE("stat_block of an empty list is all zeros") {
    auto block = stat_block({});
    for (double v : block) CHECK(v == 0.0);
}

TEST_CASE("stat_block on [1,2,3,4,100]") {
    auto block = stat_block({1, 2, 3, 4, 100});
    CHECK(block[0] == 100);
    CHECK(block[1] == 1);
    CHECK(block[2] == doctest::Approx(22.0));
    CHECK(block[3] == 3);
    CHECK(block[4] == doctest::Approx(1522.0));  // population variance
    // sigma = sqrt(1522) ~ 39.013; |100-22| = 78 < 2*sigma, > sigma
    CHECK(block[5] == 0.0);
    CHECK(block[6] == 1.0);
    CHECK(block[7] == doctest::Approx(oracle::shannon_entropy_bits({1, 2, 3, 4, 100})));
    CHECK(block[7] == doctest::Approx(std::log2(5.0)));
    for (int order = 2; order <= 5; ++order) {
        CHECK(block[static_cast<size_t>(6 + order)] ==
              doctest::Approx(oracle::permutation_entropy_bits({1, 2, 3, 4, 100}, order)));
        CHECK(block[static_cast<size_t>(6 + order)] == 0.0);  // strictly increasing
    }
}

TEST_CASE("mild outliers always include the extreme ones") {
    Rng rng(63);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> values;
        int n = static_cast<int>(1 + rng.below(40));
        for (int i = 0; i < n; ++i) values.push_back(rng.uniform(-50.0, 50.0));
        auto block = stat_block(values);
        CHECK(block[6] >= block[5]);
    }
}

TEST_CASE("extract_baseline of an idle sample is all zeros") {
    TraceSample s;
    auto seq = extract_baseline(s, kSubnet);
    for (const auto& interval : seq)
        for (double v : interval) CHECK(v == 0.0);
}

TEST_CASE("extract_baseline confines early traffic to interval 0") {
    TraceSample s;
    s.packets = {packet(10.0, 100, false), packet(1500.0, 200, true), packet(2900.0, 300, false)};
    auto seq = extract_baseline(s, kSubnet);
    double first = 0;
    for (double v : seq[0]) first += std::abs(v);
    CHECK(first > 0);
    for (size_t i = 1; i < seq.size(); ++i)
        for (double v : seq[i]) CHECK(v == 0.0);
}

TEST_CASE("interval packet counts sum to the sample packet count") {
    auto s = random_sample(11, 4321);
    auto seq = extract_baseline(s, kSubnet);
    double total = 0;
    for (const auto& f : seq)
        for (int i = 0; i < 6; ++i) total += f[static_cast<size_t>(i)];
    CHECK(total == doctest::Approx(static_cast<double>(s.packets.size())));
}

TEST_CASE("extract_baseline matches an independent reference on seeded samples") {
    for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        auto s = random_sample(seed, 1500);
        auto got = extract_baseline(s, kSubnet);
        auto want = oracle::reference_baseline(s, kSubnet);
        for (int i = 0; i < kIntervalsPerSample; ++i)
            for (int j = 0; j < kIntervalFeatureCount; ++j)
                CHECK(got[static_cast<size_t>(i)][static_cast<size_t>(j)] ==
                      doctest::Approx(want[static_cast<size_t>(i)][static_cast<size_t>(j)])
                          .epsilon(1e-12));
    }
}

TEST_CASE("baseline feature files round-trip") {
    auto s = random_sample(77, 800);
    auto seq = extract_baseline(s, kSubnet);
    std::ostringstream out;
    write_baselines({{"s0", seq}}, out);
    std::istringstream in(out.str());
    auto rows = read_baselines(in);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].first == "s0");
    for (int i = 0; i < kIntervalsPerSample; ++i)
        for (int j = 0; j < kIntervalFeatureCount; ++j)
            CHECK(rows[0].second[static_cast<size_t>(i)][static_cast<size_t>(j)] ==
                  seq[static_cast<size_t>(i)][static_cast<size_t>(j)]);
}
