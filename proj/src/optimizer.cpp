#include "prog/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace prog::diff {

Adam::Adam(const ModelParams& params, Config cfg) : cfg_(cfg) {
    m_.reserve(params.count());
    v_.reserve(params.count());
    for (std::size_t i = 0; i < params.count(); ++i) {
        m_.emplace_back(params[static_cast<int>(i)].shape());
        v_.emplace_back(params[static_cast<int>(i)].shape());
    }
}

void Adam::step(ModelParams& params, const std::vector<Tensor>& grads) {
    if (grads.size() != m_.size())
        throw std::invalid_argument("Adam::step: gradient count mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t p = 0; p < m_.size(); ++p) {
        Tensor& theta = params[static_cast<int>(p)];
        const Tensor& g = grads[p];
        if (!theta.same_shape(g))
            throw std::invalid_argument("Adam::step: gradient shape mismatch");
        Tensor& m = m_[p];
        Tensor& v = v_[p];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

double clip_by_global_norm(std::vector<Tensor>& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& g : grads)
        for (double x : g.values()) sq += x * x;
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double s = max_norm / norm;
        for (auto& g : grads)
            for (double& x : g.values()) x *= s;
    }
    return norm;
}

}  // namespace prog::diff
