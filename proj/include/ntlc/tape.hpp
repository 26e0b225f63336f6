#ifndef NTLC_TAPE_HPP
#define NTLC_TAPE_HPP

#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "ntlc/kernels.hpp"
#include "ntlc/tensor.hpp"

namespace ntlc {

// Tapes allocate and free multi-megabyte activation buffers every batch;
// glibc would hand those straight back to the kernel and re-fault them on
// the next batch. Keep them on the heap instead.
inline void tune_allocator_once() {
#if defined(__GLIBC__)
    static const bool done = [] {
        mallopt(M_MMAP_THRESHOLD, 512 * 1024 * 1024);
        mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024);
        return true;
    }();
    (void)done;
#endif
}

using kernels::Act;

// Trainable tensor plus its gradient and the two optimizer moment slots.
template <typename T>
struct Parameter {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    Tensor<T> m1, m2;

    Parameter(std::string n, Tensor<T> v)
        : name(std::move(n)),
          value(std::move(v)),
          grad(value.shape),
          m1(value.shape),
          m2(value.shape) {}
};

// Reverse-mode tape: operations execute eagerly and push a closure that
// replays their gradient in exact reverse order. One tape per forward pass.
template <typename T>
class Tape {
public:
    using Ref = int;

    Tape() { tune_allocator_once(); }
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Ref leaf(Tensor<T> value) {
        nodes_.push_back(Node{std::move(value), {}, nullptr, nullptr});
        Node& n = nodes_.back();
        n.grad = Tensor<T>(n.value.shape);
        return static_cast<Ref>(nodes_.size() - 1);
    }

    Ref param(Parameter<T>& p) {
        nodes_.push_back(Node{{}, {}, &p, nullptr});
        return static_cast<Ref>(nodes_.size() - 1);
    }

    const Tensor<T>& val(Ref r) const {
        const Node& n = nodes_[static_cast<size_t>(r)];
        return n.param ? n.param->value : n.value;
    }

    Tensor<T>& grad(Ref r) {
        Node& n = nodes_[static_cast<size_t>(r)];
        return n.param ? n.param->grad : n.grad;
    }

    size_t size() const { return nodes_.size(); }

    // --- primitive operations -----------------------------------------------

    Ref dense(Ref x, Ref W, Ref b, Act act) {
        const auto& xv = val(x);
        const auto& wv = val(W);
        const auto& bv = val(b);
        require(xv.rank() == 2 && wv.rank() == 2, "dense: x and W must be rank 2");
        int m = xv.dim(0), n = xv.dim(1), p = wv.dim(1);
        require(wv.dim(0) == n, "dense: x " + xv.shape_str() + " vs W " + wv.shape_str());
        require(bv.numel() == p, "dense: bias " + bv.shape_str() + " vs W " + wv.shape_str());
        Tensor<T> y({m, p});
        kernels::matmul(xv.data(), wv.data(), y.data(), m, n, p);
        for (int i = 0; i < m; ++i) {
            T* row = y.data() + static_cast<int64_t>(i) * p;
            for (int j = 0; j < p; ++j) row[j] = kernels::apply_act(row[j] + bv.v[static_cast<size_t>(j)], act);
        }
        return record(std::move(y), [this, x, W, b, act, m, n, p](Ref self) {
            const Tensor<T>& yv = val(self);
            const Tensor<T>& gy = grad(self);
            Tensor<T> dpre({m, p});
            for (int64_t i = 0; i < dpre.numel(); ++i)
                dpre.v[static_cast<size_t>(i)] =
                    gy.v[static_cast<size_t>(i)] *
                    kernels::act_grad_from_output(yv.v[static_cast<size_t>(i)], act);
            kernels::matmul_nt_acc(dpre.data(), val(W).data(), grad(x).data(), m, n, p);
            kernels::matmul_tn_acc(val(x).data(), dpre.data(), grad(W).data(), m, n, p);
            T* db = grad(b).data();
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < p; ++j) db[j] += dpre.v[static_cast<size_t>(i) * static_cast<size_t>(p) + static_cast<size_t>(j)];
        });
    }

    Ref matmul(Ref a, Ref b) {
        const auto& av = val(a);
        const auto& bv = val(b);
        require(av.rank() == 2 && bv.rank() == 2 && av.dim(1) == bv.dim(0),
                "matmul: " + av.shape_str() + " x " + bv.shape_str());
        int m = av.dim(0), k = av.dim(1), n = bv.dim(1);
        Tensor<T> y({m, n});
        kernels::matmul(av.data(), bv.data(), y.data(), m, k, n);
        return record(std::move(y), [this, a, b, m, k, n](Ref self) {
            const Tensor<T>& gy = grad(self);
            kernels::matmul_nt_acc(gy.data(), val(b).data(), grad(a).data(), m, k, n);
            kernels::matmul_tn_acc(val(a).data(), gy.data(), grad(b).data(), m, k, n);
        });
    }

    Ref add(Ref a, Ref b) {
        const auto& av = val(a);
        const auto& bv = val(b);
        require(av.shape == bv.shape,
                "add: " + av.shape_str() + " vs " + bv.shape_str());
        Tensor<T> y(av.shape);
        for (int64_t i = 0; i < y.numel(); ++i)
            y.v[static_cast<size_t>(i)] = av.v[static_cast<size_t>(i)] + bv.v[static_cast<size_t>(i)];
        return record(std::move(y), [this, a, b](Ref self) {
            const Tensor<T>& gy = grad(self);
            accumulate(grad(a), gy);
            accumulate(grad(b), gy);
        });
    }

    Ref mul(Ref a, Ref b) {
        const auto& av = val(a);
        const auto& bv = val(b);
        require(av.shape == bv.shape,
                "mul: " + av.shape_str() + " vs " + bv.shape_str());
        Tensor<T> y(av.shape);
        for (int64_t i = 0; i < y.numel(); ++i)
            y.v[static_cast<size_t>(i)] = av.v[static_cast<size_t>(i)] * bv.v[static_cast<size_t>(i)];
        return record(std::move(y), [this, a, b](Ref self) {
            const Tensor<T>& gy = grad(self);
            const Tensor<T>& av = val(a);
            const Tensor<T>& bv = val(b);
            Tensor<T>& ga = grad(a);
            Tensor<T>& gb = grad(b);
            for (int64_t i = 0; i < gy.numel(); ++i) {
                ga.v[static_cast<size_t>(i)] += gy.v[static_cast<size_t>(i)] * bv.v[static_cast<size_t>(i)];
                gb.v[static_cast<size_t>(i)] += gy.v[static_cast<size_t>(i)] * av.v[static_cast<size_t>(i)];
            }
        });
    }

    Ref one_minus(Ref a) {
        const auto& av = val(a);
        Tensor<T> y(av.shape);
        for (int64_t i = 0; i < y.numel(); ++i)
            y.v[static_cast<size_t>(i)] = T(1) - av.v[static_cast<size_t>(i)];
        return record(std::move(y), [this, a](Ref self) {
            const Tensor<T>& gy = grad(self);
            Tensor<T>& ga = grad(a);
            for (int64_t i = 0; i < gy.numel(); ++i)
                ga.v[static_cast<size_t>(i)] -= gy.v[static_cast<size_t>(i)];
        });
    }

    Ref activation(Ref x, Act act) {
        const auto& xv = val(x);
        Tensor<T> y(xv.shape);
        for (int64_t i = 0; i < y.numel(); ++i)
            y.v[static_cast<size_t>(i)] = kernels::apply_act(xv.v[static_cast<size_t>(i)], act);
        return record(std::move(y), [this, x, act](Ref self) {
            const Tensor<T>& yv = val(self);
            const Tensor<T>& gy = grad(self);
            Tensor<T>& gx = grad(x);
            for (int64_t i = 0; i < gy.numel(); ++i)
                gx.v[static_cast<size_t>(i)] +=
                    gy.v[static_cast<size_t>(i)] *
                    kernels::act_grad_from_output(yv.v[static_cast<size_t>(i)], act);
        });
    }

    // Row gather; ids stay fixed, gradients scatter into the selected rows.
    Ref embedding(const IntTensor& ids, Ref table) {
        const auto& ev = val(table);
        require(ev.rank() == 2, "embedding: table must be rank 2");
        int rows = ev.dim(0), k = ev.dim(1);
        for (int32_t id : ids.v)
            if (id < 0 || id >= rows)
                throw IdOutOfRange("embedding id " + std::to_string(id) + " not in [0, " +
                                   std::to_string(rows) + ")");
        std::vector<int> out_shape = ids.shape;
        out_shape.push_back(k);
        Tensor<T> y(out_shape);
        for (int64_t i = 0; i < ids.numel(); ++i) {
            const T* src = ev.data() + static_cast<int64_t>(ids.v[static_cast<size_t>(i)]) * k;
            std::copy(src, src + k, y.data() + i * k);
        }
        auto ids_copy = std::make_shared<IntTensor>(ids);
        return record(std::move(y), [this, table, ids_copy, k](Ref self) {
            const Tensor<T>& gy = grad(self);
            Tensor<T>& ge = grad(table);
            for (int64_t i = 0; i < ids_copy->numel(); ++i) {
                T* dst = ge.data() + static_cast<int64_t>(ids_copy->v[static_cast<size_t>(i)]) * k;
                const T* src = gy.data() + i * k;
                for (int j = 0; j < k; ++j) dst[j] += src[j];
            }
        });
    }

    Ref conv1d(Ref x, Ref kernel, Ref bias, Act act) {
        const auto& xv = val(x);
        const auto& kv = val(kernel);
        const auto& bv = val(bias);
        require(xv.rank() == 3 && kv.rank() == 3, "conv1d: x and kernel must be rank 3");
        int b = xv.dim(0), L = xv.dim(1), k = xv.dim(2);
        int w = kv.dim(0), c = kv.dim(2);
        require(kv.dim(1) == k, "conv1d: x " + xv.shape_str() + " vs kernel " + kv.shape_str());
        require(w <= L, "conv1d: kernel width exceeds sequence length");
        require(bv.numel() == c, "conv1d: bias size");
        Tensor<T> y({b, L - w + 1, c});
        kernels::conv1d_forward(xv.data(), kv.data(), bv.data(), y.data(), b, L, k, w, c, act);
        return record(std::move(y), [this, x, kernel, bias, act, b, L, k, w, c](Ref self) {
            const Tensor<T>& yv = val(self);
            const Tensor<T>& gy = grad(self);
            Tensor<T> dpre(yv.shape);
            for (int64_t i = 0; i < dpre.numel(); ++i)
                dpre.v[static_cast<size_t>(i)] =
                    gy.v[static_cast<size_t>(i)] *
                    kernels::act_grad_from_output(yv.v[static_cast<size_t>(i)], act);
            kernels::conv1d_backward_kernel(val(x).data(), dpre.data(), grad(kernel).data(),
                                            grad(bias).data(), b, L, k, w, c);
            kernels::conv1d_backward_input(val(kernel).data(), dpre.data(), grad(x).data(), b,
                                           L, k, w, c);
        });
    }

    Ref maxpool_time(Ref x) {
        const auto& xv = val(x);
        require(xv.rank() == 3 && xv.dim(1) >= 1, "maxpool_time: want [b,T,c] with T >= 1");
        int b = xv.dim(0), t = xv.dim(1), c = xv.dim(2);
        Tensor<T> y({b, c});
        auto argmax = std::make_shared<std::vector<int>>(static_cast<size_t>(b) * c, 0);
        // Row-major sweep; first occurrence wins ties.
        for (int i = 0; i < b; ++i) {
            const T* xb = xv.data() + static_cast<int64_t>(i) * t * c;
            T* out = y.data() + static_cast<int64_t>(i) * c;
            int* arg = argmax->data() + static_cast<int64_t>(i) * c;
            std::copy(xb, xb + c, out);
            for (int s = 1; s < t; ++s) {
                const T* row = xb + static_cast<int64_t>(s) * c;
                for (int j = 0; j < c; ++j) {
                    if (row[j] > out[j]) {
                        out[j] = row[j];
                        arg[j] = s;
                    }
                }
            }
        }
        return record(std::move(y), [this, x, argmax, b, t, c](Ref self) {
            const Tensor<T>& gy = grad(self);
            Tensor<T>& gx = grad(x);
            for (int i = 0; i < b; ++i)
                for (int j = 0; j < c; ++j) {
                    int s = (*argmax)[static_cast<size_t>(i) * static_cast<size_t>(c) + static_cast<size_t>(j)];
                    gx.v[(static_cast<size_t>(i) * static_cast<size_t>(t) + static_cast<size_t>(s)) * static_cast<size_t>(c) + static_cast<size_t>(j)] +=
                        gy.v[static_cast<size_t>(i) * static_cast<size_t>(c) + static_cast<size_t>(j)];
                }
        });
    }

    Ref slice_time(Ref x, int t) {
        const auto& xv = val(x);
        require(xv.rank() == 3 && t >= 0 && t < xv.dim(1), "slice_time: index out of range");
        int b = xv.dim(0), T_ = xv.dim(1), k = xv.dim(2);
        Tensor<T> y({b, k});
        for (int i = 0; i < b; ++i)
            std::copy(xv.data() + (static_cast<int64_t>(i) * T_ + t) * k,
                      xv.data() + (static_cast<int64_t>(i) * T_ + t) * k + k,
                      y.data() + static_cast<int64_t>(i) * k);
        return record(std::move(y), [this, x, t, b, T_, k](Ref self) {
            const Tensor<T>& gy = grad(self);
            Tensor<T>& gx = grad(x);
            for (int i = 0; i < b; ++i) {
                T* dst = gx.data() + (static_cast<int64_t>(i) * T_ + t) * k;
                const T* src = gy.data() + static_cast<int64_t>(i) * k;
                for (int j = 0; j < k; ++j) dst[j] += src[j];
            }
        });
    }

    Ref stack_time(const std::vector<Ref>& steps) {
        require(!steps.empty(), "stack_time: no steps");
        const auto& first = val(steps[0]);
        require(first.rank() == 2, "stack_time: steps must be [b,k]");
        int b = first.dim(0), k = first.dim(1);
        int T_ = static_cast<int>(steps.size());
        Tensor<T> y({b, T_, k});
        for (int t = 0; t < T_; ++t) {
            const auto& sv = val(steps[static_cast<size_t>(t)]);
            require(sv.shape == first.shape, "stack_time: inconsistent step shapes");
            for (int i = 0; i < b; ++i)
                std::copy(sv.data() + static_cast<int64_t>(i) * k,
                          sv.data() + static_cast<int64_t>(i) * k + k,
                          y.data() + (static_cast<int64_t>(i) * T_ + t) * k);
        }
        auto steps_copy = std::make_shared<std::vector<Ref>>(steps);
        return record(std::move(y), [this, steps_copy, b, T_, k](Ref self) {
            const Tensor<T>& gy = grad(self);
            for (int t = 0; t < T_; ++t) {
                Tensor<T>& gs = grad((*steps_copy)[static_cast<size_t>(t)]);
                for (int i = 0; i < b; ++i) {
                    const T* src = gy.data() + (static_cast<int64_t>(i) * T_ + t) * k;
                    T* dst = gs.data() + static_cast<int64_t>(i) * k;
                    for (int j = 0; j < k; ++j) dst[j] += src[j];
                }
            }
        });
    }

    Ref slice_cols(Ref x, int begin, int len) {
        const auto& xv = val(x);
        require(xv.rank() == 2 && begin >= 0 && len >= 1 && begin + len <= xv.dim(1),
                "slice_cols: range out of bounds");
        int m = xv.dim(0), n = xv.dim(1);
        Tensor<T> y({m, len});
        for (int i = 0; i < m; ++i)
            std::copy(xv.data() + static_cast<int64_t>(i) * n + begin,
                      xv.data() + static_cast<int64_t>(i) * n + begin + len,
                      y.data() + static_cast<int64_t>(i) * len);
        return record(std::move(y), [this, x, begin, len, m, n](Ref self) {
            const Tensor<T>& gy = grad(self);
            Tensor<T>& gx = grad(x);
            for (int i = 0; i < m; ++i) {
                const T* src = gy.data() + static_cast<int64_t>(i) * len;
                T* dst = gx.data() + static_cast<int64_t>(i) * n + begin;
                for (int j = 0; j < len; ++j) dst[j] += src[j];
            }
        });
    }

    Ref concat_cols(const std::vector<Ref>& parts) {
        require(!parts.empty(), "concat_cols: no parts");
        int m = val(parts[0]).dim(0);
        int total = 0;
        for (Ref p : parts) {
            const auto& pv = val(p);
            require(pv.rank() == 2 && pv.dim(0) == m, "concat_cols: row mismatch");
            total += pv.dim(1);
        }
        Tensor<T> y({m, total});
        int off = 0;
        for (Ref p : parts) {
            const auto& pv = val(p);
            int n = pv.dim(1);
            for (int i = 0; i < m; ++i)
                std::copy(pv.data() + static_cast<int64_t>(i) * n,
                          pv.data() + static_cast<int64_t>(i) * n + n,
                          y.data() + static_cast<int64_t>(i) * total + off);
            off += n;
        }
        auto parts_copy = std::make_shared<std::vector<Ref>>(parts);
        return record(std::move(y), [this, parts_copy, m, total](Ref self) {
            const Tensor<T>& gy = grad(self);
            int off = 0;
            for (Ref p : *parts_copy) {
                Tensor<T>& gp = grad(p);
                int n = val(p).dim(1);
                for (int i = 0; i < m; ++i) {
                    const T* src = gy.data() + static_cast<int64_t>(i) * total + off;
                    T* dst = gp.data() + static_cast<int64_t>(i) * n;
                    for (int j = 0; j < n; ++j) dst[j] += src[j];
                }
                off += n;
            }
        });
    }

    Ref reshape(Ref x, std::vector<int> shape) {
        const auto& xv = val(x);
        require(Tensor<T>::numel_of(shape) == xv.numel(), "reshape: element count mismatch");
        Tensor<T> y(std::move(shape), xv.v);
        return record(std::move(y), [this, x](Ref self) {
            const Tensor<T>& gy = grad(self);
            Tensor<T>& gx = grad(x);
            for (int64_t i = 0; i < gy.numel(); ++i)
                gx.v[static_cast<size_t>(i)] += gy.v[static_cast<size_t>(i)];
        });
    }

    Ref softmax_rows(Ref x) {
        const auto& xv = val(x);
        require(xv.rank() == 2, "softmax_rows: want rank 2");
        int m = xv.dim(0), n = xv.dim(1);
        Tensor<T> y({m, n});
        for (int i = 0; i < m; ++i) {
            const T* row = xv.data() + static_cast<int64_t>(i) * n;
            T* out = y.data() + static_cast<int64_t>(i) * n;
            T mx = row[0];
            for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
            T sum = T(0);
            for (int j = 0; j < n; ++j) {
                out[j] = std::exp(row[j] - mx);
                sum += out[j];
            }
            for (int j = 0; j < n; ++j) out[j] /= sum;
        }
        return record(std::move(y), [this, x, m, n](Ref self) {
            const Tensor<T>& yv = val(self);
            const Tensor<T>& gy = grad(self);
            Tensor<T>& gx = grad(x);
            for (int i = 0; i < m; ++i) {
                const T* yr = yv.data() + static_cast<int64_t>(i) * n;
                const T* gr = gy.data() + static_cast<int64_t>(i) * n;
                T dot = T(0);
                for (int j = 0; j < n; ++j) dot += gr[j] * yr[j];
                T* gxr = gx.data() + static_cast<int64_t>(i) * n;
                for (int j = 0; j < n; ++j) gxr[j] += yr[j] * (gr[j] - dot);
            }
        });
    }

    // out[b,:] = sum_t alpha[b,t] * H[b,t,:]
    Ref weighted_sum_time(Ref H, Ref alpha) {
        const auto& hv = val(H);
        const auto& av = val(alpha);
        require(hv.rank() == 3 && av.rank() == 2 && hv.dim(0) == av.dim(0) &&
                    hv.dim(1) == av.dim(1),
                "weighted_sum_time: H " + hv.shape_str() + " vs alpha " + av.shape_str());
        int b = hv.dim(0), t = hv.dim(1), d = hv.dim(2);
        Tensor<T> y({b, d});
        for (int i = 0; i < b; ++i) {
            T* out = y.data() + static_cast<int64_t>(i) * d;
            for (int s = 0; s < t; ++s) {
                T w = av.v[static_cast<size_t>(i) * static_cast<size_t>(t) + static_cast<size_t>(s)];
                const T* h = hv.data() + (static_cast<int64_t>(i) * t + s) * d;
                for (int j = 0; j < d; ++j) out[j] += w * h[j];
            }
        }
        return record(std::move(y), [this, H, alpha, b, t, d](Ref self) {
            const Tensor<T>& gy = grad(self);
            const Tensor<T>& hv = val(H);
            const Tensor<T>& av = val(alpha);
            Tensor<T>& gh = grad(H);
            Tensor<T>& ga = grad(alpha);
            for (int i = 0; i < b; ++i) {
                const T* gyr = gy.data() + static_cast<int64_t>(i) * d;
                for (int s = 0; s < t; ++s) {
                    int64_t base = (static_cast<int64_t>(i) * t + s) * d;
                    T w = av.v[static_cast<size_t>(i) * static_cast<size_t>(t) + static_cast<size_t>(s)];
                    T dot = T(0);
                    for (int j = 0; j < d; ++j) {
                        gh.v[static_cast<size_t>(base + j)] += w * gyr[j];
                        dot += gyr[j] * hv.v[static_cast<size_t>(base + j)];
                    }
                    ga.v[static_cast<size_t>(i) * static_cast<size_t>(t) + static_cast<size_t>(s)] += dot;
                }
            }
        });
    }

    // Mean binary cross-entropy; predictions clamped to [eps, 1-eps].
    Ref bce_loss(Ref pred, Tensor<T> targets) {
        const auto& pv = val(pred);
        require(pv.shape == targets.shape, "bce_loss: prediction/target shape mismatch");
        const T eps = T(1e-7);
        int64_t count = pv.numel();
        require(count > 0, "bce_loss: empty prediction");
        double loss = 0;
        for (int64_t i = 0; i < count; ++i) {
            double p = std::min(std::max(static_cast<double>(pv.v[static_cast<size_t>(i)]),
                                         static_cast<double>(eps)),
                                1.0 - static_cast<double>(eps));
            double y = static_cast<double>(targets.v[static_cast<size_t>(i)]);
            loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        }
        Tensor<T> out({1});
        out.v[0] = static_cast<T>(loss / static_cast<double>(count));
        auto tg = std::make_shared<Tensor<T>>(std::move(targets));
        return record(std::move(out), [this, pred, tg, eps, count](Ref self) {
            const Tensor<T>& gy = grad(self);
            const Tensor<T>& pv = val(pred);
            Tensor<T>& gp = grad(pred);
            T scale = gy.v[0] / static_cast<T>(count);
            for (int64_t i = 0; i < count; ++i) {
                T p = std::min(std::max(pv.v[static_cast<size_t>(i)], eps), T(1) - eps);
                T y = tg->v[static_cast<size_t>(i)];
                gp.v[static_cast<size_t>(i)] += scale * (-y / p + (T(1) - y) / (T(1) - p));
            }
        });
    }

    // Runs gradient closures in exact reverse execution order.
    void backward(Ref root) {
        require(val(root).numel() == 1, "backward: root must be scalar");
        grad(root).v[0] = T(1);
        for (int i = root; i >= 0; --i)
            if (nodes_[static_cast<size_t>(i)].back) nodes_[static_cast<size_t>(i)].back(static_cast<Ref>(i));
    }

private:
    struct Node {
        Tensor<T> value;
        Tensor<T> grad;
        Parameter<T>* param;
        std::function<void(Ref)> back;
    };

    static void require(bool ok, const std::string& msg) {
        if (!ok) throw ShapeMismatch(msg);
    }

    static void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
        for (int64_t i = 0; i < src.numel(); ++i)
            dst.v[static_cast<size_t>(i)] += src.v[static_cast<size_t>(i)];
    }

    template <typename F>
    Ref record(Tensor<T> value, F&& back) {
        nodes_.push_back(Node{std::move(value), {}, nullptr, std::forward<F>(back)});
        Node& n = nodes_.back();
        n.grad = Tensor<T>(n.value.shape);
        return static_cast<Ref>(nodes_.size() - 1);
    }

    // deque: values/grads handed out by val()/grad() stay valid while later
    // operations are recorded.
    std::deque<Node> nodes_;
};

} // namespace ntlc

#endif
