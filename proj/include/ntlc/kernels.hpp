#ifndef NTLC_KERNELS_HPP
#define NTLC_KERNELS_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "ntlc/parallel.hpp"

// Hot loops of the differentiation engine. Inner loops are broadcast
// multiply-adds over contiguous memory (no floating-point reductions), and
// every output element is owned by exactly one loop index with a fixed
// accumulation order, so the parallel versions are bit-identical to the
// serial references in kernels::serial for any thread count.

#if defined(__GNUC__) || defined(__clang__)
#define NTLC_RESTRICT __restrict__
#else
#define NTLC_RESTRICT
#endif

namespace ntlc::kernels {

enum class Act { identity, relu, tanh, sigmoid };

template <typename T>
inline T apply_act(T x, Act act) {
    switch (act) {
        case Act::identity: return x;
        case Act::relu: return x > T(0) ? x : T(0);
        case Act::tanh: return std::tanh(x);
        case Act::sigmoid: return T(1) / (T(1) + std::exp(-x));
    }
    return x;
}

// Derivative expressed through the activation output.
template <typename T>
inline T act_grad_from_output(T y, Act act) {
    switch (act) {
        case Act::identity: return T(1);
        case Act::relu: return y > T(0) ? T(1) : T(0);
        case Act::tanh: return T(1) - y * y;
        case Act::sigmoid: return y * (T(1) - y);
    }
    return T(1);
}

// Below this many multiply-adds the fork/join costs more than it buys; the
// recurrent per-step matmuls stay serial, the big projections parallelize.
inline constexpr int64_t kParallelFlopCutoff = 1 << 21;
// dK accumulates register blocks of kColBlock channels over kRowChunk output
// positions; the constants fix the floating-point summation tree, so results
// do not depend on the thread count.
inline constexpr int kColBlock = 32;
inline constexpr int kRowChunk = 128;

template <typename T>
std::vector<T> transpose(const T* M, int rows, int cols) {
    std::vector<T> out(static_cast<size_t>(rows) * static_cast<size_t>(cols));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            out[static_cast<size_t>(c) * static_cast<size_t>(rows) + static_cast<size_t>(r)] =
                M[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)];
    return out;
}

namespace detail {

// C[i,:] = A[i,:] * B for one row i.
template <typename T>
inline void matmul_row(const T* NTLC_RESTRICT a, const T* NTLC_RESTRICT B,
                       T* NTLC_RESTRICT c, int k, int n) {
    for (int j = 0; j < n; ++j) c[j] = T(0);
    for (int l = 0; l < k; ++l) {
        T av = a[l];
        const T* b = B + static_cast<int64_t>(l) * n;
        for (int j = 0; j < n; ++j) c[j] += av * b[j];
    }
}

// dA[i,:] += dC[i,:] * B^T for one row, given B already transposed to [n,k].
template <typename T>
inline void nt_acc_row(const T* NTLC_RESTRICT dc, const T* NTLC_RESTRICT BT,
                       T* NTLC_RESTRICT da, int k, int n) {
    for (int j = 0; j < n; ++j) {
        T dv = dc[j];
        const T* bt = BT + static_cast<int64_t>(j) * k;
        for (int l = 0; l < k; ++l) da[l] += dv * bt[l];
    }
}

// dB[l0:l1,:] += A[:,l0:l1]^T * dC. Row chunks of dC stay cache-resident
// while the dB rows of this block accumulate; per element the adds still run
// in ascending i order, so any block partition gives the same bits.
template <typename T>
inline void tn_acc_rows(const T* NTLC_RESTRICT A, const T* NTLC_RESTRICT dC,
                        T* NTLC_RESTRICT dB, int m, int k, int n, int l0, int l1) {
    for (int i0 = 0; i0 < m; i0 += kRowChunk) {
        int i1 = std::min(m, i0 + kRowChunk);
        for (int l = l0; l < l1; ++l) {
            T* db = dB + static_cast<int64_t>(l) * n;
            for (int i = i0; i < i1; ++i) {
                T av = A[static_cast<int64_t>(i) * k + l];
                const T* dc = dC + static_cast<int64_t>(i) * n;
                for (int j = 0; j < n; ++j) db[j] += av * dc[j];
            }
        }
    }
}

template <typename T>
inline void conv_fwd_cell(const T* NTLC_RESTRICT x, const T* NTLC_RESTRICT kern,
                          const T* NTLC_RESTRICT bias, T* NTLC_RESTRICT y, int len, int feats,
                          int width, int ch, Act act, int64_t out_len, int64_t bt) {
    int b = static_cast<int>(bt / out_len);
    int t0 = static_cast<int>(bt % out_len);
    T* out = y + bt * ch;
    for (int c = 0; c < ch; ++c) out[c] = bias[c];
    const T* xb = x + (static_cast<int64_t>(b) * len + t0) * feats;
    const T* kk = kern;
    for (int t = 0; t < width; ++t) {
        for (int j = 0; j < feats; ++j) {
            T xv = xb[static_cast<int64_t>(t) * feats + j];
            for (int c = 0; c < ch; ++c) out[c] += xv * kk[c];
            kk += ch;
        }
    }
    for (int c = 0; c < ch; ++c) out[c] = apply_act(out[c], act);
}

// Accumulates dK columns [c0,c1) over the whole batch. Register accumulators
// cover a kRowChunk x kColBlock tile so the kernel gradient is touched once
// per chunk instead of once per output position.
template <typename T>
inline void conv_dk_block(const T* NTLC_RESTRICT x, const T* NTLC_RESTRICT dpre,
                          T* NTLC_RESTRICT dk, int batch, int len, int feats,
                          int width, int ch, int c0, int c1) {
    int out_len = len - width + 1;
    int bw = c1 - c0;
    T acc[kColBlock];
    for (int b = 0; b < batch; ++b) {
        const T* xb = x + static_cast<int64_t>(b) * len * feats;
        const T* dp = dpre + static_cast<int64_t>(b) * out_len * ch;
        for (int s0 = 0; s0 < out_len; s0 += kRowChunk) {
            int s1 = std::min(out_len, s0 + kRowChunk);
            for (int t = 0; t < width; ++t) {
                for (int j = 0; j < feats; ++j) {
                    for (int c = 0; c < bw; ++c) acc[c] = T(0);
                    for (int t0 = s0; t0 < s1; ++t0) {
                        T xv = xb[static_cast<int64_t>(t0 + t) * feats + j];
                        const T* row = dp + static_cast<int64_t>(t0) * ch + c0;
                        for (int c = 0; c < bw; ++c) acc[c] += xv * row[c];
                    }
                    T* dkk = dk + (static_cast<int64_t>(t) * feats + j) * ch + c0;
                    for (int c = 0; c < bw; ++c) dkk[c] += acc[c];
                }
            }
        }
    }
}

// Per-channel sums of dpre in one streaming pass.
template <typename T>
inline void conv_dbias(const T* NTLC_RESTRICT dpre, T* NTLC_RESTRICT dbias, int64_t rows,
                       int ch) {
    std::vector<T> acc(static_cast<size_t>(ch), T(0));
    for (int64_t r = 0; r < rows; ++r) {
        const T* row = dpre + r * ch;
        for (int c = 0; c < ch; ++c) acc[static_cast<size_t>(c)] += row[c];
    }
    for (int c = 0; c < ch; ++c) dbias[c] += acc[static_cast<size_t>(c)];
}

// dX for one batch item via a columns buffer: dxcol[t0,:] = dpre[t0,:] * K^T,
// then the scatter back into the padded input layout.
template <typename T>
inline void conv_dx_one(const T* NTLC_RESTRICT KT, const T* NTLC_RESTRICT dp,
                        T* NTLC_RESTRICT dxb, int len, int feats, int width,
                        int ch) {
    int out_len = len - width + 1;
    int wk = width * feats;
    std::vector<T> dxcol(static_cast<size_t>(wk));
    for (int t0 = 0; t0 < out_len; ++t0) {
        for (auto& v : dxcol) v = T(0);
        const T* row = dp + static_cast<int64_t>(t0) * ch;
        for (int c = 0; c < ch; ++c) {
            T dv = row[c];
            const T* kt = KT + static_cast<int64_t>(c) * wk;
            for (int l = 0; l < wk; ++l) dxcol[static_cast<size_t>(l)] += dv * kt[l];
        }
        T* base = dxb + static_cast<int64_t>(t0) * feats;
        for (int l = 0; l < wk; ++l) base[l] += dxcol[static_cast<size_t>(l)];
    }
}

} // namespace detail

namespace serial {

// C[m,n] = A[m,k] * B[k,n]
template <typename T>
void matmul(const T* A, const T* B, T* C, int m, int k, int n) {
    for (int i = 0; i < m; ++i)
        detail::matmul_row(A + static_cast<int64_t>(i) * k, B, C + static_cast<int64_t>(i) * n,
                           k, n);
}

// dA[m,k] += dC[m,n] * B[k,n]^T
template <typename T>
void matmul_nt_acc(const T* dC, const T* B, T* dA, int m, int k, int n) {
    std::vector<T> BT = transpose(B, k, n);
    for (int i = 0; i < m; ++i)
        detail::nt_acc_row(dC + static_cast<int64_t>(i) * n, BT.data(),
                           dA + static_cast<int64_t>(i) * k, k, n);
}

// dB[k,n] += A[m,k]^T * dC[m,n]
template <typename T>
void matmul_tn_acc(const T* A, const T* dC, T* dB, int m, int k, int n) {
    detail::tn_acc_rows(A, dC, dB, m, k, n, 0, k);
}

// y[b,L-w+1,c] = act(sum_{t,j} x[b,t0+t,j] * K[t,j,c] + bias[c])
template <typename T>
void conv1d_forward(const T* x, const T* kern, const T* bias, T* y, int batch, int len,
                    int feats, int width, int ch, Act act) {
    int64_t out_len = len - width + 1;
    for (int64_t bt = 0; bt < batch * out_len; ++bt)
        detail::conv_fwd_cell(x, kern, bias, y, len, feats, width, ch, act, out_len, bt);
}

// dpre must hold dY already multiplied by the activation derivative.
template <typename T>
void conv1d_backward_kernel(const T* x, const T* dpre, T* dk, T* dbias, int batch, int len,
                            int feats, int width, int ch) {
    for (int c0 = 0; c0 < ch; c0 += kColBlock)
        detail::conv_dk_block(x, dpre, dk, batch, len, feats, width, ch, c0,
                              std::min(ch, c0 + kColBlock));
    int64_t out_len = len - width + 1;
    detail::conv_dbias(dpre, dbias, batch * out_len, ch);
}

template <typename T>
void conv1d_backward_input(const T* kern, const T* dpre, T* dx, int batch, int len, int feats,
                           int width, int ch) {
    int out_len = len - width + 1;
    std::vector<T> KT = transpose(kern, width * feats, ch);
    for (int b = 0; b < batch; ++b)
        detail::conv_dx_one(KT.data(), dpre + static_cast<int64_t>(b) * out_len * ch,
                            dx + static_cast<int64_t>(b) * len * feats, len, feats, width, ch);
}

} // namespace serial

template <typename T>
void matmul(const T* A, const T* B, T* C, int m, int k, int n) {
    if (static_cast<int64_t>(m) * k * n < kParallelFlopCutoff || m == 1) {
        serial::matmul(A, B, C, m, k, n);
        return;
    }
    parallel_for(0, m, [&](int64_t i) {
        detail::matmul_row(A + i * k, B, C + i * n, k, n);
    });
}

template <typename T>
void matmul_nt_acc(const T* dC, const T* B, T* dA, int m, int k, int n) {
    if (static_cast<int64_t>(m) * k * n < kParallelFlopCutoff || m == 1) {
        serial::matmul_nt_acc(dC, B, dA, m, k, n);
        return;
    }
    std::vector<T> BT = transpose(B, k, n);
    parallel_for(0, m, [&](int64_t i) {
        detail::nt_acc_row(dC + i * n, BT.data(), dA + i * k, k, n);
    });
}

template <typename T>
void matmul_tn_acc(const T* A, const T* dC, T* dB, int m, int k, int n) {
    if (static_cast<int64_t>(m) * k * n < kParallelFlopCutoff || k == 1) {
        serial::matmul_tn_acc(A, dC, dB, m, k, n);
        return;
    }
    constexpr int kRowsPerBlock = 32;
    int64_t nblocks = (k + kRowsPerBlock - 1) / kRowsPerBlock;
    parallel_for(0, nblocks, [&](int64_t blk) {
        int l0 = static_cast<int>(blk) * kRowsPerBlock;
        detail::tn_acc_rows(A, dC, dB, m, k, n, l0, std::min(k, l0 + kRowsPerBlock));
    });
}

template <typename T>
void conv1d_forward(const T* x, const T* kern, const T* bias, T* y, int batch, int len,
                    int feats, int width, int ch, Act act) {
    int64_t out_len = len - width + 1;
    int64_t cells = batch * out_len;
    if (cells * width * feats * ch < kParallelFlopCutoff) {
        serial::conv1d_forward(x, kern, bias, y, batch, len, feats, width, ch, act);
        return;
    }
    parallel_for(0, cells, [&](int64_t bt) {
        detail::conv_fwd_cell(x, kern, bias, y, len, feats, width, ch, act, out_len, bt);
    });
}

template <typename T>
void conv1d_backward_kernel(const T* x, const T* dpre, T* dk, T* dbias, int batch, int len,
                            int feats, int width, int ch) {
    int64_t out_len = len - width + 1;
    int64_t flops = static_cast<int64_t>(width) * feats * batch * out_len * ch;
    if (flops < kParallelFlopCutoff) {
        serial::conv1d_backward_kernel(x, dpre, dk, dbias, batch, len, feats, width, ch);
        return;
    }
    int64_t nblocks = (ch + kColBlock - 1) / kColBlock;
    parallel_for(0, nblocks, [&](int64_t blk) {
        int c0 = static_cast<int>(blk) * kColBlock;
        detail::conv_dk_block(x, dpre, dk, batch, len, feats, width, ch, c0,
                              std::min(ch, c0 + kColBlock));
    });
    detail::conv_dbias(dpre, dbias, batch * out_len, ch);
}

template <typename T>
void conv1d_backward_input(const T* kern, const T* dpre, T* dx, int batch, int len, int feats,
                           int width, int ch) {
    int out_len = len - width + 1;
    int64_t flops = static_cast<int64_t>(batch) * out_len * width * feats * ch;
    if (flops < kParallelFlopCutoff || batch == 1) {
        serial::conv1d_backward_input(kern, dpre, dx, batch, len, feats, width, ch);
        return;
    }
    std::vector<T> KT = transpose(kern, width * feats, ch);
    parallel_for(0, batch, [&](int64_t b) {
        detail::conv_dx_one(KT.data(), dpre + b * static_cast<int64_t>(out_len) * ch,
                            dx + b * static_cast<int64_t>(len) * feats, len, feats, width, ch);
    });
}

} // namespace ntlc::kernels

#endif
