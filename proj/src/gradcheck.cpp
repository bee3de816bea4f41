#include "prog/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace prog::diff {

GradCheckResult grad_check(const LossExpr& expr, ModelParams& params, double epsilon) {
    Tape tape;
    const int loss = expr(tape, params);
    if (!std::isfinite(tape.scalar_value(loss)))
        throw std::runtime_error("grad_check: loss not finite at the base point");
    std::vector<Tensor> analytic = zero_grads(params);
    tape.backward(loss, analytic);

    GradCheckResult result;
    for (std::size_t p = 0; p < params.count(); ++p) {
        const int slot = static_cast<int>(p);
        Tensor& theta = params[slot];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + epsilon;
            Tape plus;
            const double fp = plus.scalar_value(expr(plus, params));
            theta[i] = saved - epsilon;
            Tape minus;
            const double fm = minus.scalar_value(expr(minus, params));
            theta[i] = saved;

            const double numeric = (fp - fm) / (2.0 * epsilon);
            const double a = analytic[p][i];
            double rel;
            if (!std::isfinite(numeric) || !std::isfinite(a)) {
                rel = std::numeric_limits<double>::infinity();
            } else {
                rel = std::abs(a - numeric) /
                      std::max({std::abs(a), std::abs(numeric), 1e-12});
            }
            if (rel > result.max_rel_error) {
                result.max_rel_error = rel;
                result.worst_param = params.name(slot);
                result.worst_index = i;
                result.analytic = a;
                result.numeric = numeric;
            }
        }
    }
    return result;
}

}  // namespace prog::diff
