#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prog/autodiff.hpp"
#include "prog/batch.hpp"
#include "prog/pipeline.hpp"
#include "prog/weibull.hpp"

namespace prog::models {

enum class ModelKind { DeepWeibull, MultiTask, RulRnn, FpRnn };

std::string kind_name(ModelKind kind);
ModelKind parse_kind(const std::string& name);

// Trunk = one LSTM stack followed by FC-ELU layers; the output layer of each
// head is linear. MultiTask adds an FP head (2-way softmax) and a RUL head
// (rul_head hidden widths, then width 1); the other kinds use a single
// linear head of width 2 (DeepWeibull, FpRnn) or 1 (RulRnn).
struct ArchitectureSpec {
    ModelKind kind = ModelKind::DeepWeibull;
    std::size_t input_width = 0;
    std::size_t window = 0;
    std::size_t lstm_units = 128;
    std::vector<std::size_t> trunk_fc;
    std::vector<std::size_t> rul_head;

    void validate() const;  // throws std::invalid_argument
    std::size_t trunk_output_width() const;
    std::string to_string() const;
};

diff::ModelParams init_params(const ArchitectureSpec& arch, std::uint64_t seed);

struct ForwardOptions {
    bool train_mode = false;
    double dropout_rate = 0.0;
    std::uint64_t dropout_seed = 0;  // full per-sample mask stream seed
};

// Tape builders for gradient-carrying forwards. Node indices index the tape.
struct DwNodes {
    int o1 = -1;
    int o2 = -1;
    int lambda = -1;
    int k = -1;
};
DwNodes dw_forward_tape(diff::Tape& tape, const diff::ModelParams& params,
                        const ArchitectureSpec& arch, const double* values,
                        const ForwardOptions& opts);

struct TaskNodes {
    int logits = -1;  // 2-vector, class 1 = failure (absent for RulRnn)
    int rul = -1;     // scalar (absent for FpRnn)
};
TaskNodes task_forward_tape(diff::Tape& tape, const diff::ModelParams& params,
                            const ArchitectureSpec& arch, const double* values,
                            const ForwardOptions& opts);

// Dropout-free forward for validation and prediction.
struct EvalOutput {
    bool has_fp = false;
    double fp_prob = 0.0;
    bool has_rul = false;
    double rul_raw = 0.0;  // unclipped, window units
    bool has_weibull = false;
    weibull::WeibullParams wb;
};
EvalOutput forward_eval(const ArchitectureSpec& arch, const diff::ModelParams& params,
                        const double* values, double horizon);

enum class Phase { DwPretrain, DwNll, MultiTask, FpOnly, RulOnly };

std::string phase_name(Phase phase);

struct LossOptions {
    Phase phase = Phase::MultiTask;
    bool use_poly = true;        // DwNll: poly_pow instead of the exact power
    double class_weight = 1.0;   // alpha_f on the failure class
    double alpha1 = 1.0;         // FP task weight
    double alpha2 = 1.0;         // RUL task weight
    bool censored_hinge = true;  // RulOnly: include censored windows
    bool train_mode = false;
    double dropout_rate = 0.0;
    std::uint64_t dropout_seed_base = 0;
};

// Indices of the windows a phase can consume (e.g. the NLL rejects
// censor_remaining <= 0, RulOnly without the hinge uses failed only).
std::vector<std::size_t> usable_windows(const std::vector<pipeline::Window>& windows,
                                        Phase phase, bool censored_hinge);

// Per-sample loss builder for batch_backward. The sample index selects
// (*order)[sample] when order is non-null, else windows[sample] directly;
// the trainer re-points order at each minibatch. The L2 penalty is not
// included here — it is batch-level, not per-sample.
diff::SampleLoss make_sample_loss(const ArchitectureSpec& arch,
                                  const std::vector<pipeline::Window>& windows,
                                  const std::vector<std::size_t>* order,
                                  const LossOptions& opts);

struct PredictionRecord {
    std::string device_id;
    std::size_t end_time = 0;
    bool has_fp = false;
    double fp_prob = 0.0;  // RulRnn: monotone surrogate 1 - rul_hat/max_rul
    bool has_rul = false;
    double rul_hat = 0.0;  // clipped to [0, max_rul], window units
    double rul_raw = 0.0;
    bool has_weibull = false;
    weibull::WeibullParams wb;
};

std::vector<PredictionRecord> predict(const ArchitectureSpec& arch,
                                      const diff::ModelParams& params,
                                      const std::vector<pipeline::Window>& windows,
                                      double horizon, double max_rul, bool parallel = true);

}  // namespace prog::models
