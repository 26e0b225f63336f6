#ifndef NTLC_PARALLEL_HPP
#define NTLC_PARALLEL_HPP

#include <cstdint>

namespace ntlc {

// Loop bodies must write disjoint outputs per index and keep any accumulation
// inside one index strictly ordered; under that contract results are
// bit-identical to the serial loop for any thread count.
template <typename F>
void parallel_for(int64_t begin, int64_t end, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int64_t i = begin; i < end; ++i) {
        body(i);
    }
}

// Skips the fork/join for ranges too small to amortize it.
template <typename F>
void parallel_for_if(bool enable, int64_t begin, int64_t end, F&& body) {
    if (enable) {
        parallel_for(begin, end, body);
    } else {
        for (int64_t i = begin; i < end; ++i) body(i);
    }
}

} // namespace ntlc

#endif
