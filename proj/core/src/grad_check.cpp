#include "tvlm/grad_check.hpp"

#include <cmath>
#include <cstdlib>

#include "tvlm/errors.hpp"

namespace tvlm {

namespace {

double run_loss(const std::function<Var()>& forward) {
    Var loss = forward();
    if (!loss->value.is_scalar()) {
        throw StructuralError("grad_check: forward must produce a scalar loss, got " + loss->value.shape_string());
    }
    return loss->value.scalar_value();
}

}  // namespace

GradCheckReport grad_check(const std::function<Var()>& forward,
                           const std::vector<ParamPtr>& params,
                           Rng& rng,
                           std::int64_t coords,
                           double epsilon) {
    if (params.empty()) throw StructuralError("grad_check: no parameters to check");

    // baseline pass, recorded twice to verify the forward is deterministic
    zero_grads(params);
    Var loss = forward();
    backward(loss);
    const double base = loss->value.scalar_value();
    std::vector<Tensor> grads;
    grads.reserve(params.size());
    for (const auto& p : params) grads.push_back(p->grad);

    zero_grads(params);
    Var loss2 = forward();
    backward(loss2);
    if (loss2->value.scalar_value() != base) {
        throw DeterminismError("grad_check: forward is not deterministic (loss differs across runs)");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& a = grads[i];
        const Tensor& b = params[i]->grad;
        for (std::int64_t j = 0; j < a.numel(); ++j) {
            if (a[j] != b[j]) {
                throw DeterminismError("grad_check: gradient of '" + params[i]->name +
                                       "' differs across identical runs");
            }
        }
    }

    std::int64_t total = 0;
    for (const auto& p : params) total += p->value.numel();
    if (total == 0) throw StructuralError("grad_check: parameters are empty");

    GradCheckReport report;
    for (std::int64_t c = 0; c < coords; ++c) {
        // flat coordinate over the concatenation of all parameters
        std::int64_t flat = rng.uniform_int(total);
        std::size_t pi = 0;
        while (flat >= params[pi]->value.numel()) {
            flat -= params[pi]->value.numel();
            ++pi;
        }
        Parameter& p = *params[pi];
        const double saved = p.value[flat];
        const double analytic = grads[pi][flat];

        p.value[flat] = saved + epsilon;
        const double f_plus = run_loss(forward);
        p.value[flat] = saved - epsilon;
        const double f_minus = run_loss(forward);
        p.value[flat] = saved;

        const double numeric = (f_plus - f_minus) / (2.0 * epsilon);
        const double rel = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
        ++report.coords_checked;
        if (rel > report.max_rel_err || report.worst_index < 0) {
            report.max_rel_err = rel;
            report.worst_param = p.name;
            report.worst_index = flat;
            report.worst_analytic = analytic;
            report.worst_numeric = numeric;
        }
    }
    return report;
}

}  // namespace tvlm
