#pragma once

#include <functional>
#include <string>
#include <vector>

#include "prog/autodiff.hpp"

namespace prog::diff {

// A differentiable expression: rebuilds its tape from the current parameter
// values and returns the scalar loss node. Must be deterministic so that
// central differences see a pure function of the parameters.
using LossExpr = std::function<int(Tape&, const ModelParams&)>;

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central finite differences against the tape gradient:
// max over components of |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
GradCheckResult grad_check(const LossExpr& expr, ModelParams& params, double epsilon);

}  // namespace prog::diff
