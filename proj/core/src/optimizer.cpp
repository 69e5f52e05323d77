#include "tvlm/optimizer.hpp"

#include <cmath>

#include "tvlm/errors.hpp"

namespace tvlm {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

AdamW::AdamW(std::vector<ParamPtr> params, AdamWConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    slots_.reserve(params_.size());
    for (const auto& p : params_) {
        slots_.push_back({Tensor(p->value.shape()), Tensor(p->value.shape())});
    }
}

void AdamW::step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Parameter& p = *params_[i];
        if (!p.trainable) continue;
        Slot& s = slots_[i];
        const std::int64_t n = p.value.numel();
        for (std::int64_t j = 0; j < n; ++j) {
            const double g = p.grad[j];
            s.m[j] = cfg_.beta1 * s.m[j] + (1.0 - cfg_.beta1) * g;
            s.v[j] = cfg_.beta2 * s.v[j] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = s.m[j] / bc1;
            const double vhat = s.v[j] / bc2;
            p.value[j] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * p.value[j]);
        }
        p.value.check_finite("adamw_step");
    }
}

double global_grad_norm(const std::vector<ParamPtr>& params) {
    double sq = 0.0;
    for (const auto& p : params) {
        if (!p->trainable) continue;
        for (double g : p->grad.values()) sq += g * g;
    }
    return std::sqrt(sq);
}

double clip_grad_norm(const std::vector<ParamPtr>& params, double max_norm) {
    if (max_norm <= 0.0) throw DomainError("max_norm must be positive");
    const double norm = global_grad_norm(params);
    if (norm > max_norm) {
        const double s = max_norm / norm;
        for (const auto& p : params) {
            if (!p->trainable) continue;
            for (double& g : p->grad.values()) g *= s;
        }
    }
    return norm;
}

double WarmupSchedule::lr_at(std::int64_t step) const {
    if (warmup_steps > 0 && step < warmup_steps) {
        const double f = static_cast<double>(step) / static_cast<double>(warmup_steps);
        return warmup_lr + f * (peak_lr - warmup_lr);
    }
    if (decay_steps <= warmup_steps) return peak_lr;
    if (step >= decay_steps) return min_lr;
    const double f = static_cast<double>(step - warmup_steps) / static_cast<double>(decay_steps - warmup_steps);
    return min_lr + 0.5 * (peak_lr - min_lr) * (1.0 + std::cos(kPi * f));
}

}  // namespace tvlm
