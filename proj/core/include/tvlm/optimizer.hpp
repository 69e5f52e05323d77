#pragma once

#include <cstdint>
#include <vector>

#include "tvlm/autograd.hpp"

namespace tvlm {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.05;
};

// Decoupled weight decay Adam. Only trainable parameters are touched; frozen
// ones stay bitwise identical no matter how many steps run.
class AdamW {
public:
    AdamW(std::vector<ParamPtr> params, AdamWConfig cfg);

    // One update from the gradients currently stored on the parameters.
    void step(double lr);

    std::int64_t steps_taken() const { return t_; }

private:
    struct Slot {
        Tensor m, v;
    };
    std::vector<ParamPtr> params_;
    std::vector<Slot> slots_;
    AdamWConfig cfg_;
    std::int64_t t_ = 0;
};

// L2 norm over every trainable parameter's gradient, treated as one vector.
double global_grad_norm(const std::vector<ParamPtr>& params);

// Scales all trainable gradients down so the global norm is at most max_norm.
// Returns the pre-clip norm.
double clip_grad_norm(const std::vector<ParamPtr>& params, double max_norm);

// Linear ramp from warmup_lr to peak_lr over warmup_steps, then either
// constant (decay_steps = 0) or cosine decay reaching min_lr at decay_steps.
struct WarmupSchedule {
    double warmup_lr = 1e-6;
    double peak_lr = 3e-3;
    std::int64_t warmup_steps = 50;
    std::int64_t decay_steps = 0;
    double min_lr = 0.0;

    double lr_at(std::int64_t step) const;
};

}  // namespace tvlm
