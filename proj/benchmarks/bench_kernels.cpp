// Compares the OpenMP kernels against their serial references on the tensor
// shapes the classifiers actually use. Build with -DNTLC_BUILD_BENCHMARKS=ON,
// run: ./benchmarks/ntlc_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include <vector>

#include "ntlc/kernels.hpp"
#include "ntlc/rng.hpp"

using namespace ntlc;

namespace {

std::vector<float> random_vec(size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return v;
}

// Embedding projection inside the GRU models: [b*T, k] x [k, 3h].
constexpr int kMatM = 6400, kMatK = 200, kMatN = 192;

void bench_matmul_serial(benchmark::State& state) {
    auto A = random_vec(static_cast<size_t>(kMatM) * kMatK, 1);
    auto B = random_vec(static_cast<size_t>(kMatK) * kMatN, 2);
    std::vector<float> C(static_cast<size_t>(kMatM) * kMatN);
    for (auto _ : state) {
        kernels::serial::matmul(A.data(), B.data(), C.data(), kMatM, kMatK, kMatN);
        benchmark::DoNotOptimize(C.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(kMatM) * kMatK * kMatN);
}
BENCHMARK(bench_matmul_serial);

void bench_matmul_parallel(benchmark::State& state) {
    auto A = random_vec(static_cast<size_t>(kMatM) * kMatK, 1);
    auto B = random_vec(static_cast<size_t>(kMatK) * kMatN, 2);
    std::vector<float> C(static_cast<size_t>(kMatM) * kMatN);
    for (auto _ : state) {
        kernels::matmul(A.data(), B.data(), C.data(), kMatM, kMatK, kMatN);
        benchmark::DoNotOptimize(C.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(kMatM) * kMatK * kMatN);
}
BENCHMARK(bench_matmul_parallel);

// One width-3 branch of the sentence classifier at batch 32.
constexpr int kB = 32, kL = 200, kF = 10, kW = 3, kC = 256;

struct ConvData {
    std::vector<float> x, kern, bias, y, dpre, dk, dbias, dx;
    ConvData()
        : x(random_vec(static_cast<size_t>(kB) * kL * kF, 3)),
          kern(random_vec(static_cast<size_t>(kW) * kF * kC, 4)),
          bias(random_vec(kC, 5)),
          y(static_cast<size_t>(kB) * (kL - kW + 1) * kC),
          dpre(random_vec(y.size(), 6)),
          dk(kern.size()),
          dbias(kC),
          dx(x.size()) {}
    static int64_t flops() {
        return static_cast<int64_t>(kB) * (kL - kW + 1) * kW * kF * kC;
    }
};

void bench_conv_forward_serial(benchmark::State& state) {
    ConvData d;
    for (auto _ : state) {
        kernels::serial::conv1d_forward(d.x.data(), d.kern.data(), d.bias.data(), d.y.data(),
                                        kB, kL, kF, kW, kC, kernels::Act::relu);
        benchmark::DoNotOptimize(d.y.data());
    }
    state.SetItemsProcessed(state.iterations() * ConvData::flops());
}
BENCHMARK(bench_conv_forward_serial);

void bench_conv_forward_parallel(benchmark::State& state) {
    ConvData d;
    for (auto _ : state) {
        kernels::conv1d_forward(d.x.data(), d.kern.data(), d.bias.data(), d.y.data(), kB, kL,
                                kF, kW, kC, kernels::Act::relu);
        benchmark::DoNotOptimize(d.y.data());
    }
    state.SetItemsProcessed(state.iterations() * ConvData::flops());
}
BENCHMARK(bench_conv_forward_parallel);

void bench_conv_backward_serial(benchmark::State& state) {
    ConvData d;
    for (auto _ : state) {
        kernels::serial::conv1d_backward_kernel(d.x.data(), d.dpre.data(), d.dk.data(),
                                                d.dbias.data(), kB, kL, kF, kW, kC);
        kernels::serial::conv1d_backward_input(d.kern.data(), d.dpre.data(), d.dx.data(), kB,
                                               kL, kF, kW, kC);
        benchmark::DoNotOptimize(d.dk.data());
    }
    state.SetItemsProcessed(state.iterations() * 2 * ConvData::flops());
}
BENCHMARK(bench_conv_backward_serial);

void bench_conv_backward_parallel(benchmark::State& state) {
    ConvData d;
    for (auto _ : state) {
        kernels::conv1d_backward_kernel(d.x.data(), d.dpre.data(), d.dk.data(), d.dbias.data(),
                                        kB, kL, kF, kW, kC);
        kernels::conv1d_backward_input(d.kern.data(), d.dpre.data(), d.dx.data(), kB, kL, kF,
                                       kW, kC);
        benchmark::DoNotOptimize(d.dk.data());
    }
    state.SetItemsProcessed(state.iterations() * 2 * ConvData::flops());
}
BENCHMARK(bench_conv_backward_parallel);

} // namespace

BENCHMARK_MAIN();
