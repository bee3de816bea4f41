#pragma once

#include <functional>
#include <vector>

#include "prog/autodiff.hpp"

namespace prog::diff {

// Builds the tape for one sample and returns the scalar loss node.
// Sample indices refer to the caller's batch ordering.
using SampleLoss = std::function<int(Tape&, const ModelParams&, std::size_t sample)>;

struct BatchResult {
    double loss = 0.0;
    std::vector<Tensor> grads;
};

// Per-sample losses are summed. Gradients accumulate per fixed-size block
// (kBlock samples) and the block partials are then reduced in index order,
// so the arithmetic is identical whether the block loop runs serially or
// under OpenMP: results are bitwise equal across modes and thread counts.
inline constexpr std::size_t kBlock = 16;

BatchResult batch_backward_serial(const SampleLoss& fn, const ModelParams& params,
                                  std::size_t n_samples);
BatchResult batch_backward_parallel(const SampleLoss& fn, const ModelParams& params,
                                    std::size_t n_samples);

// Dispatch on the parallel flag; both paths share the blocked reduction.
BatchResult batch_backward(const SampleLoss& fn, const ModelParams& params,
                           std::size_t n_samples, bool parallel);

// Forward-only sum of per-sample losses, same blocked reduction.
double batch_loss(const SampleLoss& fn, const ModelParams& params,
                  std::size_t n_samples, bool parallel);

}  // namespace prog::diff
