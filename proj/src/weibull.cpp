#include "prog/weibull.hpp"

#include <cmath>
#include <stdexcept>

#include "prog/autodiff.hpp"

namespace prog::weibull {

Eval eval(double t, const WeibullParams& p) {
    if (!(t > 0.0)) throw std::domain_error("weibull::eval: t must be positive");
    const double ratio = t / p.lambda;
    const double powk = std::pow(ratio, p.k);
    const double hazard = (p.k / p.lambda) * std::pow(ratio, p.k - 1.0);
    const double surv = std::exp(-powk);
    return Eval{hazard * surv, 1.0 - surv, hazard};
}

WeibullParams transform_outputs(const HeadOutputs& o, bool* floored) {
    WeibullParams p;
    p.lambda = std::exp(o.o1);
    p.k = prog::diff::softplus_stable(o.o2);
    bool hit = false;
    if (p.k < kShapeFloor) {
        p.k = kShapeFloor;
        hit = true;
    }
    if (floored) *floored = hit;
    return p;
}

double poly_pow(double t_g, const WeibullParams& p) {
    if (!(t_g > 0.0)) throw std::domain_error("weibull::poly_pow: t_g must be positive");
    const double u = p.k * std::log(t_g / p.lambda);
    return 1.0 + u + u * u / 2.0 + u * u * u / 6.0 + u * u * u * u / 24.0;
}

double nll(const std::vector<std::pair<EventSample, WeibullParams>>& batch,
           double l2_term, bool use_poly) {
    if (batch.empty()) throw std::invalid_argument("weibull::nll: empty batch");
    double acc = 0.0;
    for (const auto& [s, p] : batch) {
        if (!(s.t_g > 0.0)) throw std::domain_error("weibull::nll: t_g must be positive");
        const double log_ratio = std::log(s.t_g / p.lambda);
        const double power =
            use_poly ? poly_pow(s.t_g, p) : std::exp(p.k * log_ratio);
        acc += power;
        if (s.delta)
            acc -= std::log(p.k / p.lambda) + (p.k - 1.0) * log_ratio;
    }
    return acc + l2_term;
}

double expected_rul(const WeibullParams& p) {
    return p.lambda * gamma_fn(1.0 + 1.0 / p.k);
}

double failure_prob(const WeibullParams& p, double tau) {
    if (tau < 0.0) throw std::domain_error("weibull::failure_prob: tau must be nonnegative");
    if (tau == 0.0) return 0.0;
    return -std::expm1(-std::pow(tau / p.lambda, p.k));
}

namespace {

// Lanczos approximation, g = 7, 9 coefficients.
constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

}  // namespace

double gamma_fn(double x) {
    if (!(x > 0.0)) throw std::domain_error("weibull::gamma_fn: x must be positive");
    if (x < 0.5) {
        // reflection: Gamma(x) = pi / (sin(pi x) Gamma(1 - x))
        return M_PI / (std::sin(M_PI * x) * gamma_fn(1.0 - x));
    }
    const double z = x - 1.0;
    double a = kLanczos[0];
    for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z + i);
    const double t = z + 7.5;
    return std::sqrt(2.0 * M_PI) * std::pow(t, z + 0.5) * std::exp(-t) * a;
}

double digamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("weibull::digamma: x must be positive");
    // shift into the asymptotic regime, then Bernoulli series
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv;
    result -= inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 -
              inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    return result;
}

double sample(const WeibullParams& p, double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("weibull::sample: u must be in (0,1)");
    return p.lambda * std::pow(-std::log(u), 1.0 / p.k);
}

}  // namespace prog::weibull
