#ifndef NTLC_OPTIM_HPP
#define NTLC_OPTIM_HPP

#include <cmath>
#include <memory>
#include <vector>

#include "ntlc/tape.hpp"

namespace ntlc {

enum class OptimizerKind { Adam, Rmsprop };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double lr = 1e-3;
    double beta1 = 0.9;   // Adam
    double beta2 = 0.999; // Adam
    double rho = 0.9;     // RMSProp
    double eps = 1e-8;
};

template <typename T>
using ParamList = std::vector<std::unique_ptr<Parameter<T>>>;

template <typename T>
void zero_grads(ParamList<T>& params) {
    for (auto& p : params) p->grad.fill(T(0));
}

template <typename T>
double global_grad_norm(const ParamList<T>& params) {
    double sq = 0;
    for (const auto& p : params)
        for (T g : p->grad.v) sq += static_cast<double>(g) * static_cast<double>(g);
    return std::sqrt(sq);
}

template <typename T>
void clip_global_norm(ParamList<T>& params, double max_norm) {
    double norm = global_grad_norm(params);
    if (norm <= max_norm || norm == 0) return;
    T scale = static_cast<T>(max_norm / norm);
    for (auto& p : params)
        for (T& g : p->grad.v) g *= scale;
}

// step_number starts at 1; bias correction uses it directly.
template <typename T>
void adam_step(ParamList<T>& params, const OptimizerConfig& cfg, int64_t step_number) {
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_number));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_number));
    for (auto& p : params) {
        for (size_t i = 0; i < p->value.v.size(); ++i) {
            double g = static_cast<double>(p->grad.v[i]);
            double m = cfg.beta1 * static_cast<double>(p->m1.v[i]) + (1.0 - cfg.beta1) * g;
            double v = cfg.beta2 * static_cast<double>(p->m2.v[i]) + (1.0 - cfg.beta2) * g * g;
            p->m1.v[i] = static_cast<T>(m);
            p->m2.v[i] = static_cast<T>(v);
            double update = cfg.lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
            p->value.v[i] = static_cast<T>(static_cast<double>(p->value.v[i]) - update);
        }
    }
}

template <typename T>
void rmsprop_step(ParamList<T>& params, const OptimizerConfig& cfg) {
    for (auto& p : params) {
        for (size_t i = 0; i < p->value.v.size(); ++i) {
            double g = static_cast<double>(p->grad.v[i]);
            double v = cfg.rho * static_cast<double>(p->m2.v[i]) + (1.0 - cfg.rho) * g * g;
            p->m2.v[i] = static_cast<T>(v);
            double update = cfg.lr * g / (std::sqrt(v) + cfg.eps);
            p->value.v[i] = static_cast<T>(static_cast<double>(p->value.v[i]) - update);
        }
    }
}

// Tracks the Adam step counter so callers just call step() per batch.
template <typename T>
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

    void step(ParamList<T>& params) {
        if (cfg_.kind == OptimizerKind::Adam)
            adam_step(params, cfg_, ++steps_);
        else
            rmsprop_step(params, cfg_);
    }

    const OptimizerConfig& config() const { return cfg_; }

private:
    OptimizerConfig cfg_;
    int64_t steps_ = 0;
};

} // namespace ntlc

#endif
