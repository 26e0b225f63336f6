#ifndef NTLC_TESTS_GRAD_CHECKS_HPP
#define NTLC_TESTS_GRAD_CHECKS_HPP

// Compact finite-difference error probes for every differentiable operation
// and for the assembled architectures; shared by the acceptance suite.

#include "ntlc/nn.hpp"
#include "oracles.hpp"

namespace gradcheck {

using namespace ntlc;

inline Tensor<double> rand_t(std::vector<int> shape, uint64_t seed, double lo = -0.9,
                             double hi = 0.9) {
    Tensor<double> t(std::move(shape));
    Rng rng(seed);
    for (auto& v : t.v) v = rng.uniform(lo, hi);
    return t;
}

// Runs one op graph twice per perturbed cell; build gets leaf refs for each
// tensor in `ts` and must return the op output ref.
template <typename BuildFn>
double op_error(std::vector<Tensor<double>*> ts, BuildFn&& build, uint64_t loss_seed) {
    std::vector<Tensor<double>> grads(ts.size());
    auto run = [&](std::vector<Tensor<double>>* out_grads) {
        Tape<double> tape;
        std::vector<Tape<double>::Ref> refs;
        refs.reserve(ts.size());
        for (auto* t : ts) refs.push_back(tape.leaf(*t));
        auto loss = oracle::weighted_scalar(tape, build(tape, refs), loss_seed);
        if (out_grads) {
            tape.backward(loss);
            for (size_t i = 0; i < refs.size(); ++i) (*out_grads)[i] = tape.grad(refs[i]);
        }
        return tape.val(loss).v[0];
    };
    run(&grads);
    auto rebuild = [&]() { return run(nullptr); };
    std::vector<const Tensor<double>*> views;
    for (auto& g : grads) views.push_back(&g);
    return oracle::max_fd_error(rebuild, ts, views);
}

inline double dense_error() {
    auto x = rand_t({3, 4}, 101), w = rand_t({4, 2}, 102), b = rand_t({2}, 103);
    double worst = 0;
    for (Act act : {Act::identity, Act::relu, Act::tanh, Act::sigmoid})
        worst = std::max(worst, op_error({&x, &w, &b},
                                         [act](Tape<double>& t, auto& r) {
                                             return t.dense(r[0], r[1], r[2], act);
                                         },
                                         11));
    return worst;
}

inline double embedding_error() {
    auto table = rand_t({5, 4}, 104);
    IntTensor ids({2, 3});
    ids.v = {0, 2, 4, 2, 1, 1};
    return op_error({&table},
                    [&ids](Tape<double>& t, auto& r) { return t.embedding(ids, r[0]); }, 13);
}

inline double conv1d_error() {
    auto x = rand_t({2, 7, 2}, 105), k = rand_t({3, 2, 2}, 106), b = rand_t({2}, 107);
    return op_error({&x, &k, &b},
                    [](Tape<double>& t, auto& r) {
                        return t.conv1d(r[0], r[1], r[2], Act::relu);
                    },
                    17);
}

inline double maxpool_error() {
    auto x = rand_t({2, 5, 3}, 108);
    return op_error({&x}, [](Tape<double>& t, auto& r) { return t.maxpool_time(r[0]); }, 19);
}

inline double gru_error(Act cand) {
    int k = 2, h = 3;
    auto x = rand_t({2, 4, k}, 109);
    auto w = rand_t({k, 3 * h}, 110), uzr = rand_t({h, 2 * h}, 111), uh = rand_t({h, h}, 112),
         b = rand_t({3 * h}, 113);
    return op_error({&x, &w, &uzr, &uh, &b},
                    [h, cand](Tape<double>& t, auto& r) {
                        GruRefs<double> g{r[1], r[2], r[3], r[4], h};
                        return gru_layer(t, r[0], g, false, cand, false);
                    },
                    23);
}

inline double bidirectional_error() {
    int k = 2, h = 2;
    auto x = rand_t({2, 4, k}, 114);
    auto wf = rand_t({k, 3 * h}, 115), uzrf = rand_t({h, 2 * h}, 116), uhf = rand_t({h, h}, 117),
         bf = rand_t({3 * h}, 118);
    auto wb = rand_t({k, 3 * h}, 119), uzrb = rand_t({h, 2 * h}, 120), uhb = rand_t({h, h}, 121),
         bb = rand_t({3 * h}, 122);
    return op_error({&x, &wf, &uzrf, &uhf, &bf, &wb, &uzrb, &uhb, &bb},
                    [h](Tape<double>& t, auto& r) {
                        GruRefs<double> f{r[1], r[2], r[3], r[4], h};
                        GruRefs<double> b{r[5], r[6], r[7], r[8], h};
                        return bidirectional_gru(t, r[0], f, b, Act::tanh);
                    },
                    29);
}

inline double lstm_error() {
    int k = 2, h = 3;
    auto x = rand_t({2, 4, k}, 123);
    auto w = rand_t({k, 4 * h}, 124), u = rand_t({h, 4 * h}, 125), b = rand_t({4 * h}, 126);
    return op_error({&x, &w, &u, &b},
                    [h](Tape<double>& t, auto& r) {
                        LstmRefs<double> l{r[1], r[2], r[3], h};
                        return lstm_layer(t, r[0], l, false);
                    },
                    31);
}

inline double attention_error() {
    int d = 2;
    auto h = rand_t({2, 3, d}, 127);
    auto w = rand_t({d, d}, 128), b = rand_t({d}, 129), u = rand_t({d, 1}, 130);
    return op_error({&h, &w, &b, &u},
                    [](Tape<double>& t, auto& r) {
                        AttentionRefs<double> a{r[1], r[2], r[3]};
                        return word_attention(t, r[0], a).context;
                    },
                    37);
}

inline double bce_error() {
    auto p = rand_t({2, 3}, 131, 0.1, 0.9);
    Tensor<double> targets({2, 3}, {1, 0, 1, 0, 0, 1});
    Tensor<double> grad;
    auto run = [&](Tensor<double>* g) {
        Tape<double> tape;
        auto pr = tape.leaf(p);
        auto loss = tape.bce_loss(pr, targets);
        if (g) {
            tape.backward(loss);
            *g = tape.grad(pr);
        }
        return tape.val(loss).v[0];
    };
    run(&grad);
    auto rebuild = [&]() { return run(nullptr); };
    return oracle::max_fd_error(rebuild, {&p}, {&grad});
}

// Composite check of one assembled architecture at batch 2 and a length-8
// input surrogate, with small hidden sizes to keep the sweep quick.
inline double architecture_error(Arch arch) {
    ModelConfig c;
    c.arch = arch;
    c.mode = OutputMode::Categorical2;
    c.seed = 1234 + static_cast<uint64_t>(arch);
    c.embedding_dim = 5;
    c.han_hidden = 3;
    c.berger_hidden = 4;
    c.kim_channels = 3;
    c.cruz_hidden = {4, 3};
    c.cruz_dense_in = 6;
    c.cruz_dense_out = 4;
    auto model = build_model<double>(6, c);
    Batch<double> batch;
    if (arch == Arch::Cruz) {
        Rng rng(7);
        batch.reals = Tensor<double>({2, 8, 60});
        for (auto& v : batch.reals.v) v = rng.uniform(0.0, 1.0);
    } else {
        Rng rng(7);
        batch.tokens = IntTensor({2, 8});
        for (auto& v : batch.tokens.v) v = static_cast<int32_t>(rng.below(7));
    }
    return oracle::model_fd_error(model, batch, 4096 + static_cast<uint64_t>(arch));
}

} // namespace gradcheck

#endif
