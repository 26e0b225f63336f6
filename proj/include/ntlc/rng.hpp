#ifndef NTLC_RNG_HPP
#define NTLC_RNG_HPP

#include <cmath>
#include <cstdint>

namespace ntlc {

// splitmix64; used both as a stream generator and to derive independent
// per-sample / per-epoch seeds from one master seed.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    uint64_t s = master ^ (0xA0761D6478BD642FULL * (stream + 1));
    return splitmix64(s);
}

// Deterministic generator with hand-rolled distributions. std::* distributions
// are implementation-defined, which would break reproducibility across
// standard libraries, so the few we need are spelled out here.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n); n > 0
    uint64_t below(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    double exponential(double mean) {
        double u = uniform();
        return -mean * std::log1p(-u);
    }

    template <typename T>
    void shuffle(T* data, size_t n) {
        for (size_t i = n; i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            T tmp = data[i - 1];
            data[i - 1] = data[j];
            data[j] = tmp;
        }
    }

private:
    uint64_t state_;
};

} // namespace ntlc

#endif
