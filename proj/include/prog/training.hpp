#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "prog/models.hpp"
#include "prog/pipeline.hpp"

namespace prog::training {

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 256;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    double dropout = 0.1;
    double l2_strength = 0.0;  // alpha_3 (alpha for the DW NLL)
    double class_weight = 1.0;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double horizon = 2.5;   // window units; validation AUC-PR labels use it
    double max_rul = 13.0;  // window units; clips validation RUL predictions
    double grad_clip = 5.0;
    std::uint64_t seed = 1;
    // DwNll: epochs trained on the polynomial-stabilized power before
    // switching to the exact power. max() means poly throughout.
    std::size_t nll_poly_epochs = std::numeric_limits<std::size_t>::max();
    bool censored_hinge = true;  // RulOnly: keep censored windows in the loss
    bool parallel = true;

    void validate() const;  // throws std::invalid_argument
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;  // mean per-window loss including the L2 term
    double l2_term = 0.0;
    double val_metric = 0.0;
    bool improved = false;
};

struct TrainResult {
    diff::ModelParams params;  // best-validation checkpoint
    std::vector<EpochRecord> history;
    std::string metric_name;  // auc_pr | rmse | val_loss | train_loss
    std::size_t best_epoch = 0;
    double best_metric = 0.0;
    bool diverged = false;
};

// Runs one training phase to early stopping. Deterministic for a fixed
// (config, initial params): shuffling, dropout masks and batch reduction all
// derive from cfg.seed.
TrainResult train_phase(models::Phase phase, const models::ArchitectureSpec& arch,
                        diff::ModelParams params,
                        const std::vector<pipeline::Window>& train_windows,
                        const std::vector<pipeline::Window>& val_windows,
                        const TrainConfig& cfg);

void write_history_csv(const std::string& path, const TrainResult& result);

}  // namespace prog::training
