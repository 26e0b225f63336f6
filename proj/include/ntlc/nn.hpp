#ifndef NTLC_NN_HPP
#define NTLC_NN_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ntlc/rng.hpp"
#include "ntlc/tape.hpp"

namespace ntlc {

enum class Arch { Han, Kim, Berger, Cruz };
enum class OutputMode { Categorical2, Multilabel6 };

std::string_view arch_name(Arch a);
Arch parse_arch(std::string_view name);  // throws BadConfig

struct ModelConfig {
    Arch arch = Arch::Kim;
    OutputMode mode = OutputMode::Categorical2;
    int embedding_dim = 0;  // 0 picks the architecture default (200 HAN, 10 others)
    int han_hidden = 64;    // per direction
    int berger_hidden = 128;
    int kim_channels = 256;
    int kim_width_min = 1;
    int kim_width_max = 5;
    std::vector<int> cruz_hidden = {64, 64, 32, 32, 16, 16};
    int cruz_dense_in = 128;
    int cruz_dense_out = 64;
    uint64_t seed = 0;

    int outputs() const { return mode == OutputMode::Categorical2 ? 2 : 6; }
    int effective_embedding_dim() const {
        if (embedding_dim > 0) return embedding_dim;
        return arch == Arch::Han ? 200 : 10;
    }
    // Recurrent models get global-norm gradient clipping during training.
    bool is_recurrent() const { return arch != Arch::Kim; }
};

// Input batch; NLP architectures read `tokens`, Cruz reads `reals`.
template <typename T>
struct Batch {
    IntTensor tokens;
    Tensor<T> reals;

    int rows() const {
        return tokens.numel() ? tokens.dim(0) : (reals.numel() ? reals.dim(0) : 0);
    }
};

// --- recurrent / attention layer wiring --------------------------------------

template <typename T>
struct GruRefs {
    typename Tape<T>::Ref w_x, u_zr, u_h, bias;
    int hidden;
};

template <typename T>
struct LstmRefs {
    typename Tape<T>::Ref w_x, u, bias;
    int hidden;
};

template <typename T>
struct AttentionRefs {
    typename Tape<T>::Ref w, bias, context;
};

template <typename T>
struct AttentionOut {
    typename Tape<T>::Ref context;
    typename Tape<T>::Ref weights;
};

// z/r gates sigmoid; candidate state uses `cand_act` on
// x*W_h + (r . h_prev)*U_h; h = z . h_prev + (1-z) . candidate.
template <typename T>
typename Tape<T>::Ref gru_layer(Tape<T>& tape, typename Tape<T>::Ref x, const GruRefs<T>& g,
                                bool reverse_time, Act cand_act, bool return_sequence) {
    const auto& xv = tape.val(x);
    int b = xv.dim(0), steps = xv.dim(1), k = xv.dim(2);
    int h = g.hidden;
    auto xproj = tape.reshape(
        tape.dense(tape.reshape(x, {b * steps, k}), g.w_x, g.bias, Act::identity),
        {b, steps, 3 * h});
    auto state = tape.leaf(Tensor<T>({b, h}));
    std::vector<typename Tape<T>::Ref> states(static_cast<size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        int t = reverse_time ? steps - 1 - i : i;
        auto xp = tape.slice_time(xproj, t);
        auto zr = tape.activation(
            tape.add(tape.slice_cols(xp, 0, 2 * h), tape.matmul(state, g.u_zr)),
            Act::sigmoid);
        auto z = tape.slice_cols(zr, 0, h);
        auto r = tape.slice_cols(zr, h, h);
        auto cand = tape.activation(
            tape.add(tape.slice_cols(xp, 2 * h, h),
                     tape.matmul(tape.mul(r, state), g.u_h)),
            cand_act);
        state = tape.add(tape.mul(z, state), tape.mul(tape.one_minus(z), cand));
        states[static_cast<size_t>(t)] = state;
    }
    return return_sequence ? tape.stack_time(states) : state;
}

// Gate order in the packed projections: input, forget, candidate, output.
template <typename T>
typename Tape<T>::Ref lstm_layer(Tape<T>& tape, typename Tape<T>::Ref x, const LstmRefs<T>& l,
                                 bool return_sequence) {
    const auto& xv = tape.val(x);
    int b = xv.dim(0), steps = xv.dim(1), k = xv.dim(2);
    int h = l.hidden;
    auto xproj = tape.reshape(
        tape.dense(tape.reshape(x, {b * steps, k}), l.w_x, l.bias, Act::identity),
        {b, steps, 4 * h});
    auto state = tape.leaf(Tensor<T>({b, h}));
    auto cell = tape.leaf(Tensor<T>({b, h}));
    std::vector<typename Tape<T>::Ref> states(static_cast<size_t>(steps));
    for (int t = 0; t < steps; ++t) {
        auto pre = tape.add(tape.slice_time(xproj, t), tape.matmul(state, l.u));
        auto gi = tape.activation(tape.slice_cols(pre, 0, h), Act::sigmoid);
        auto gf = tape.activation(tape.slice_cols(pre, h, h), Act::sigmoid);
        auto gc = tape.activation(tape.slice_cols(pre, 2 * h, h), Act::tanh);
        auto go = tape.activation(tape.slice_cols(pre, 3 * h, h), Act::sigmoid);
        cell = tape.add(tape.mul(gf, cell), tape.mul(gi, gc));
        state = tape.mul(go, tape.activation(cell, Act::tanh));
        states[static_cast<size_t>(t)] = state;
    }
    return return_sequence ? tape.stack_time(states) : state;
}

// Forward pass and time-reversed backward pass concatenated per step.
template <typename T>
typename Tape<T>::Ref bidirectional_gru(Tape<T>& tape, typename Tape<T>::Ref x,
                                        const GruRefs<T>& fwd, const GruRefs<T>& bwd,
                                        Act cand_act) {
    const auto& xv = tape.val(x);
    int b = xv.dim(0), steps = xv.dim(1);
    int h = fwd.hidden;
    auto seq_f = gru_layer(tape, x, fwd, false, cand_act, true);
    auto seq_b = gru_layer(tape, x, bwd, true, cand_act, true);
    auto flat = tape.concat_cols({tape.reshape(seq_f, {b * steps, h}),
                                  tape.reshape(seq_b, {b * steps, h})});
    return tape.reshape(flat, {b, steps, 2 * h});
}

// alpha = softmax_t((tanh(h_t W + bias)) . context); output = sum_t alpha_t h_t.
template <typename T>
AttentionOut<T> word_attention(Tape<T>& tape, typename Tape<T>::Ref H,
                               const AttentionRefs<T>& a) {
    const auto& hv = tape.val(H);
    int b = hv.dim(0), steps = hv.dim(1), d = hv.dim(2);
    auto proj = tape.dense(tape.reshape(H, {b * steps, d}), a.w, a.bias, Act::tanh);
    auto scores = tape.reshape(tape.matmul(proj, a.context), {b, steps});
    auto alpha = tape.softmax_rows(scores);
    return {tape.weighted_sum_time(H, alpha), alpha};
}

// --- model -------------------------------------------------------------------

template <typename T>
class Model {
public:
    ModelConfig config;
    int vocab_size = 0;  // ids 1..N; the embedding table holds N+1 rows
    std::vector<std::unique_ptr<Parameter<T>>> params;

    Parameter<T>& add_param(std::string name, std::vector<int> shape) {
        params.push_back(std::make_unique<Parameter<T>>(std::move(name),
                                                        Tensor<T>(std::move(shape))));
        return *params.back();
    }

    Parameter<T>& find(std::string_view name) {
        for (auto& p : params)
            if (p->name == name) return *p;
        throw BadConfig("model has no parameter named '" + std::string(name) + "'");
    }

    int64_t parameter_count() const {
        int64_t n = 0;
        for (const auto& p : params) n += p->value.numel();
        return n;
    }

    // Raw sigmoid activations [batch, outputs]; optionally reports the HAN
    // attention weights for inspection.
    typename Tape<T>::Ref forward(Tape<T>& tape, const Batch<T>& batch,
                                  Tensor<T>* attention_weights = nullptr) {
        switch (config.arch) {
            case Arch::Han: {
                auto emb = tape.embedding(batch.tokens, tape.param(find("embedding.table")));
                int h = config.han_hidden;
                GruRefs<T> f{tape.param(find("gru_fwd.w_x")), tape.param(find("gru_fwd.u_zr")),
                             tape.param(find("gru_fwd.u_h")), tape.param(find("gru_fwd.bias")), h};
                GruRefs<T> r{tape.param(find("gru_bwd.w_x")), tape.param(find("gru_bwd.u_zr")),
                             tape.param(find("gru_bwd.u_h")), tape.param(find("gru_bwd.bias")), h};
                auto H = bidirectional_gru(tape, emb, f, r, Act::tanh);
                AttentionRefs<T> a{tape.param(find("attention.w")), tape.param(find("attention.bias")),
                                   tape.param(find("attention.context"))};
                auto att = word_attention(tape, H, a);
                if (attention_weights) *attention_weights = tape.val(att.weights);
                return tape.dense(att.context, tape.param(find("output.w")),
                                  tape.param(find("output.bias")), Act::sigmoid);
            }
            case Arch::Kim: {
                auto emb = tape.embedding(batch.tokens, tape.param(find("embedding.table")));
                std::vector<typename Tape<T>::Ref> pooled;
                for (int w = config.kim_width_min; w <= config.kim_width_max; ++w) {
                    std::string stem = "conv" + std::to_string(w);
                    auto conv = tape.conv1d(emb, tape.param(find(stem + ".kernel")),
                                            tape.param(find(stem + ".bias")), Act::relu);
                    pooled.push_back(tape.maxpool_time(conv));
                }
                return tape.dense(tape.concat_cols(pooled), tape.param(find("output.w")),
                                  tape.param(find("output.bias")), Act::sigmoid);
            }
            case Arch::Berger: {
                auto emb = tape.embedding(batch.tokens, tape.param(find("embedding.table")));
                GruRefs<T> g{tape.param(find("gru.w_x")), tape.param(find("gru.u_zr")),
                             tape.param(find("gru.u_h")), tape.param(find("gru.bias")),
                             config.berger_hidden};
                auto final_state = gru_layer(tape, emb, g, false, Act::relu, false);
                return tape.dense(final_state, tape.param(find("output.w")),
                                  tape.param(find("output.bias")), Act::sigmoid);
            }
            case Arch::Cruz: {
                const auto& xv = batch.reals;
                int b = xv.dim(0), steps = xv.dim(1), feats = xv.dim(2);
                auto x = tape.leaf(batch.reals);
                // The input dense layer applies identically at every timestep.
                auto lifted = tape.reshape(
                    tape.dense(tape.reshape(x, {b * steps, feats}),
                               tape.param(find("dense_in.w")),
                               tape.param(find("dense_in.bias")), Act::relu),
                    {b, steps, config.cruz_dense_in});
                auto seq = lifted;
                int layers = static_cast<int>(config.cruz_hidden.size());
                for (int i = 0; i < layers; ++i) {
                    std::string stem = "lstm" + std::to_string(i + 1);
                    LstmRefs<T> l{tape.param(find(stem + ".w_x")), tape.param(find(stem + ".u")),
                                  tape.param(find(stem + ".bias")),
                                  config.cruz_hidden[static_cast<size_t>(i)]};
                    seq = lstm_layer(tape, seq, l, i + 1 < layers);
                }
                auto densed = tape.dense(seq, tape.param(find("dense_out.w")),
                                         tape.param(find("dense_out.bias")), Act::relu);
                return tape.dense(densed, tape.param(find("output.w")),
                                  tape.param(find("output.bias")), Act::sigmoid);
            }
        }
        throw BadConfig("unknown architecture");
    }
};

// --- builders ----------------------------------------------------------------

namespace detail {

template <typename T>
void init_uniform(Parameter<T>& p, int fan_in, int fan_out, Rng& rng) {
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& v : p.value.v) v = static_cast<T>(rng.uniform(-limit, limit));
}

inline void check_config(const ModelConfig& config) {
    if (config.outputs() != 2 && config.outputs() != 6)
        throw BadConfig("output mode must be categorical-2 or multilabel-6");
    if (config.effective_embedding_dim() < 1) throw BadConfig("embedding_dim must be >= 1");
}

} // namespace detail

template <typename T>
Model<T> build_han(int vocab_size, const ModelConfig& config) {
    detail::check_config(config);
    if (vocab_size < 1) throw BadConfig("vocab_size must be >= 1");
    if (config.han_hidden < 1) throw BadConfig("han_hidden must be >= 1");
    Model<T> m;
    m.config = config;
    m.config.arch = Arch::Han;
    m.vocab_size = vocab_size;
    int k = m.config.effective_embedding_dim();
    int h = config.han_hidden;
    int d = 2 * h;
    Rng rng(config.seed);
    detail::init_uniform(m.add_param("embedding.table", {vocab_size + 1, k}), vocab_size + 1, k, rng);
    for (const char* stem : {"gru_fwd", "gru_bwd"}) {
        std::string s(stem);
        detail::init_uniform(m.add_param(s + ".w_x", {k, 3 * h}), k, h, rng);
        detail::init_uniform(m.add_param(s + ".u_zr", {h, 2 * h}), h, h, rng);
        detail::init_uniform(m.add_param(s + ".u_h", {h, h}), h, h, rng);
        m.add_param(s + ".bias", {3 * h});
    }
    detail::init_uniform(m.add_param("attention.w", {d, d}), d, d, rng);
    m.add_param("attention.bias", {d});
    detail::init_uniform(m.add_param("attention.context", {d, 1}), d, 1, rng);
    detail::init_uniform(m.add_param("output.w", {d, config.outputs()}), d, config.outputs(), rng);
    m.add_param("output.bias", {config.outputs()});
    return m;
}

template <typename T>
Model<T> build_kim(int vocab_size, const ModelConfig& config) {
    detail::check_config(config);
    if (vocab_size < 1) throw BadConfig("vocab_size must be >= 1");
    if (config.kim_channels < 1) throw BadConfig("kim_channels must be >= 1");
    if (config.kim_width_min < 1 || config.kim_width_max < config.kim_width_min)
        throw BadConfig("bad kim kernel width range");
    Model<T> m;
    m.config = config;
    m.config.arch = Arch::Kim;
    m.vocab_size = vocab_size;
    int k = m.config.effective_embedding_dim();
    int c = config.kim_channels;
    Rng rng(config.seed);
    detail::init_uniform(m.add_param("embedding.table", {vocab_size + 1, k}), vocab_size + 1, k, rng);
    int branches = 0;
    for (int w = config.kim_width_min; w <= config.kim_width_max; ++w, ++branches) {
        std::string stem = "conv" + std::to_string(w);
        detail::init_uniform(m.add_param(stem + ".kernel", {w, k, c}), w * k, c, rng);
        m.add_param(stem + ".bias", {c});
    }
    detail::init_uniform(m.add_param("output.w", {branches * c, config.outputs()}),
                         branches * c, config.outputs(), rng);
    m.add_param("output.bias", {config.outputs()});
    return m;
}

template <typename T>
Model<T> build_berger(int vocab_size, const ModelConfig& config) {
    detail::check_config(config);
    if (vocab_size < 1) throw BadConfig("vocab_size must be >= 1");
    if (config.berger_hidden < 1) throw BadConfig("berger_hidden must be >= 1");
    Model<T> m;
    m.config = config;
    m.config.arch = Arch::Berger;
    m.vocab_size = vocab_size;
    int k = m.config.effective_embedding_dim();
    int h = config.berger_hidden;
    Rng rng(config.seed);
    detail::init_uniform(m.add_param("embedding.table", {vocab_size + 1, k}), vocab_size + 1, k, rng);
    detail::init_uniform(m.add_param("gru.w_x", {k, 3 * h}), k, h, rng);
    detail::init_uniform(m.add_param("gru.u_zr", {h, 2 * h}), h, h, rng);
    detail::init_uniform(m.add_param("gru.u_h", {h, h}), h, h, rng);
    m.add_param("gru.bias", {3 * h});
    detail::init_uniform(m.add_param("output.w", {h, config.outputs()}), h, config.outputs(), rng);
    m.add_param("output.bias", {config.outputs()});
    return m;
}

template <typename T>
Model<T> build_cruz(const ModelConfig& config) {
    detail::check_config(config);
    if (config.cruz_hidden.empty()) throw BadConfig("cruz needs at least one LSTM layer");
    for (int h : config.cruz_hidden)
        if (h < 1) throw BadConfig("cruz hidden sizes must be >= 1");
    Model<T> m;
    m.config = config;
    m.config.arch = Arch::Cruz;
    Rng rng(config.seed);
    int feats = 60;
    detail::init_uniform(m.add_param("dense_in.w", {feats, config.cruz_dense_in}), feats,
                         config.cruz_dense_in, rng);
    m.add_param("dense_in.bias", {config.cruz_dense_in});
    int in = config.cruz_dense_in;
    for (size_t i = 0; i < config.cruz_hidden.size(); ++i) {
        int h = config.cruz_hidden[i];
        std::string stem = "lstm" + std::to_string(i + 1);
        detail::init_uniform(m.add_param(stem + ".w_x", {in, 4 * h}), in, h, rng);
        detail::init_uniform(m.add_param(stem + ".u", {h, 4 * h}), h, h, rng);
        m.add_param(stem + ".bias", {4 * h});
        in = h;
    }
    detail::init_uniform(m.add_param("dense_out.w", {in, config.cruz_dense_out}), in,
                         config.cruz_dense_out, rng);
    m.add_param("dense_out.bias", {config.cruz_dense_out});
    detail::init_uniform(m.add_param("output.w", {config.cruz_dense_out, config.outputs()}),
                         config.cruz_dense_out, config.outputs(), rng);
    m.add_param("output.bias", {config.outputs()});
    return m;
}

template <typename T>
Model<T> build_model(int vocab_size, const ModelConfig& config) {
    switch (config.arch) {
        case Arch::Han: return build_han<T>(vocab_size, config);
        case Arch::Kim: return build_kim<T>(vocab_size, config);
        case Arch::Berger: return build_berger<T>(vocab_size, config);
        case Arch::Cruz: return build_cruz<T>(config);
    }
    throw BadConfig("unknown architecture");
}

template <typename T>
Tensor<T> predict(Model<T>& model, const Batch<T>& batch,
                  Tensor<T>* attention_weights = nullptr) {
    Tape<T> tape;
    auto out = model.forward(tape, batch, attention_weights);
    return tape.val(out);
}

} // namespace ntlc

#endif
