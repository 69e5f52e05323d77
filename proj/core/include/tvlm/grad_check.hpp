#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tvlm/autograd.hpp"
#include "tvlm/rng.hpp"

namespace tvlm {

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::int64_t coords_checked = 0;
    std::string worst_param;
    std::int64_t worst_index = -1;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;

    bool passed(double threshold = 1e-4) const { return max_rel_err <= threshold; }
};

// Compares the recorded-graph gradient of `forward` against central finite
// differences at `coords` randomly sampled parameter coordinates:
//   rel_err = |analytic - (f(θ+ε) - f(θ-ε)) / 2ε| / max(1, |analytic|)
// `forward` must rebuild the loss from current parameter values on every call
// and be deterministic; two baseline runs that disagree (loss value or any
// gradient) raise DeterminismError.
GradCheckReport grad_check(const std::function<Var()>& forward,
                           const std::vector<ParamPtr>& params,
                           Rng& rng,
                           std::int64_t coords = 200,
                           double epsilon = 1e-4);

}  // namespace tvlm
