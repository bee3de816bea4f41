#pragma once

#include <vector>

namespace prog::weibull {

// Scale/shape pair in window units. Both strictly positive.
struct WeibullParams {
    double lambda = 1.0;
    double k = 1.0;
};

// One observation for the censored likelihood: time-to-event (failure time
// for failed devices, time to censoring otherwise) and the event indicator.
struct EventSample {
    double t_g = 0.0;
    int delta = 0;  // 1 = failure observed, 0 = censored
};

// Raw two-output head values before the positivity transforms.
struct HeadOutputs {
    double o1 = 0.0;
    double o2 = 0.0;
};

struct Eval {
    double pdf;
    double cdf;
    double hazard;
};

// pdf, cdf and hazard at t > 0.
Eval eval(double t, const WeibullParams& p);

// lambda = exp(o1), k = softplus(o2) with a small floor on k so that
// Gamma(1 + 1/k) stays representable. Returns true in *floored if the
// floor was hit.
WeibullParams transform_outputs(const HeadOutputs& o, bool* floored = nullptr);

// Fourth-order expansion of (t_g/lambda)^k around u = k log(t_g/lambda) = 0,
// used in place of the exact power inside the training likelihood.
double poly_pow(double t_g, const WeibullParams& p);

// Censored negative log-likelihood: the power term applies to every sample,
// delta gates the log-hazard part. use_poly swaps the exact power for
// poly_pow. l2_term is added verbatim.
double nll(const std::vector<std::pair<EventSample, WeibullParams>>& batch,
           double l2_term, bool use_poly);

// lambda * Gamma(1 + 1/k): the distribution mean used as the RUL estimate.
double expected_rul(const WeibullParams& p);

// 1 - exp(-(tau/lambda)^k): probability of failure within horizon tau.
double failure_prob(const WeibullParams& p, double tau);

// Gamma function for x > 0, Lanczos g = 7 with 9 coefficients.
double gamma_fn(double x);

// Digamma for x > 0; backs the gamma_mean derivative.
double digamma(double x);

// Inverse-CDF draw: lambda * (-log u)^(1/k) for u in (0,1).
double sample(const WeibullParams& p, double u);

// Minimum t_g admitted into the likelihood; log(t_g/lambda) diverges at 0.
inline constexpr double kMinEventTime = 0.5;
inline constexpr double kShapeFloor = 1e-3;

}  // namespace prog::weibull
