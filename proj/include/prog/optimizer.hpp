#pragma once

#include <vector>

#include "prog/tensor.hpp"

namespace prog::diff {

// Adam state: one first/second moment tensor per parameter, shapes fixed
// at construction. The step counter increments before bias correction.
class Adam {
public:
    struct Config {
        double learning_rate = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
    };

    Adam(const ModelParams& params, Config cfg);

    void step(ModelParams& params, const std::vector<Tensor>& grads);

    long step_count() const { return t_; }
    const Config& config() const { return cfg_; }

private:
    Config cfg_;
    long t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

// Global-norm gradient clip; no-op when max_norm <= 0. Returns the norm
// before clipping.
double clip_by_global_norm(std::vector<Tensor>& grads, double max_norm);

}  // namespace prog::diff
