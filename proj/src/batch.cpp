#include "prog/batch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace prog::diff {

namespace {

struct BlockPartial {
    double loss = 0.0;
    std::vector<Tensor> grads;
};

// One block: samples [begin, end) processed in order on one thread.
BlockPartial run_block(const SampleLoss& fn, const ModelParams& params,
                       std::size_t begin, std::size_t end) {
    BlockPartial part;
    part.grads = zero_grads(params);
    Tape tape;
    for (std::size_t s = begin; s < end; ++s) {
        tape.reset();
        const int loss = fn(tape, params, s);
        const double value = tape.scalar_value(loss);
        if (!std::isfinite(value))
            throw std::runtime_error("batch_backward: non-finite sample loss");
        part.loss += value;
        tape.backward(loss, part.grads);
    }
    return part;
}

BatchResult reduce_blocks(std::vector<BlockPartial>& parts, const ModelParams& params) {
    BatchResult out;
    out.grads = zero_grads(params);
    for (auto& part : parts) {
        out.loss += part.loss;
        for (std::size_t p = 0; p < out.grads.size(); ++p) {
            Tensor& acc = out.grads[p];
            const Tensor& g = part.grads[p];
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
        }
    }
    return out;
}

}  // namespace

BatchResult batch_backward_serial(const SampleLoss& fn, const ModelParams& params,
                                  std::size_t n_samples) {
    const std::size_t n_blocks = (n_samples + kBlock - 1) / kBlock;
    std::vector<BlockPartial> parts(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t begin = b * kBlock;
        parts[b] = run_block(fn, params, begin, std::min(begin + kBlock, n_samples));
    }
    return reduce_blocks(parts, params);
}

BatchResult batch_backward_parallel(const SampleLoss& fn, const ModelParams& params,
                                    std::size_t n_samples) {
    const std::size_t n_blocks = (n_samples + kBlock - 1) / kBlock;
    std::vector<BlockPartial> parts(n_blocks);
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (long long b = 0; b < static_cast<long long>(n_blocks); ++b) {
        try {
            const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
            parts[b] = run_block(fn, params, begin, std::min(begin + kBlock, n_samples));
        } catch (...) {
#pragma omp critical
            error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return reduce_blocks(parts, params);
}

BatchResult batch_backward(const SampleLoss& fn, const ModelParams& params,
                           std::size_t n_samples, bool parallel) {
    return parallel ? batch_backward_parallel(fn, params, n_samples)
                    : batch_backward_serial(fn, params, n_samples);
}

double batch_loss(const SampleLoss& fn, const ModelParams& params,
                  std::size_t n_samples, bool parallel) {
    const std::size_t n_blocks = (n_samples + kBlock - 1) / kBlock;
    std::vector<double> partial(n_blocks, 0.0);
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long long b = 0; b < static_cast<long long>(n_blocks); ++b) {
        try {
            const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
            const std::size_t end = std::min(begin + kBlock, n_samples);
            Tape tape;
            double acc = 0.0;
            for (std::size_t s = begin; s < end; ++s) {
                tape.reset();
                acc += tape.scalar_value(fn(tape, params, s));
            }
            partial[b] = acc;
        } catch (...) {
#pragma omp critical
            error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    double total = 0.0;
    for (double v : partial) total += v;
    return total;
}

}  // namespace prog::diff
