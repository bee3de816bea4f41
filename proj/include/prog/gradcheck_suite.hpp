#pragma once

#include <string>
#include <vector>

#include "prog/gradcheck.hpp"

namespace prog::commands {

struct CheckCase {
    std::string name;
    diff::GradCheckResult result;
    bool pass = false;
};

// Named finite-difference checks covering every layer primitive and every
// training loss (pre-training RMSE/hinge, the censored Weibull NLL in both
// polynomial and exact form, the weighted multi-task loss, the baselines).
// Hinge-bearing cases are constructed away from the kink. When corrupt_hook
// is set, a deliberately broken expression is appended whose detection
// (large reported error) is required for its case to pass.
std::vector<CheckCase> run_gradcheck_suite(double epsilon, double tolerance,
                                           bool corrupt_hook);

}  // namespace prog::commands
