#include "prog/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "prog/metrics.hpp"
#include "prog/optimizer.hpp"
#include "prog/weibull.hpp"

namespace prog::training {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) {
        throw std::invalid_argument("train: learning_rate must be positive");
    }
    if (batch_size == 0) {
        throw std::invalid_argument("train: batch_size must be positive");
    }
    if (max_epochs == 0) {
        throw std::invalid_argument("train: max_epochs must be positive");
    }
    if (patience == 0) {
        throw std::invalid_argument("train: patience must be >= 1");
    }
    if (dropout < 0.0 || dropout >= 1.0) {
        throw std::invalid_argument("train: dropout must be in [0,1)");
    }
    if (l2_strength < 0.0 || class_weight < 0.0 || alpha1 < 0.0 || alpha2 < 0.0) {
        throw std::invalid_argument("train: weights must be nonnegative");
    }
    if (!(horizon > 0.0) || !(max_rul > 0.0)) {
        throw std::invalid_argument("train: horizon and max_rul must be positive");
    }
}

namespace {

struct ValMetric {
    std::string name;
    double value = 0.0;
    double score = 0.0;  // higher is better
};

double l2_value(const diff::ModelParams& params, double strength) {
    if (strength <= 0.0) {
        return 0.0;
    }
    double acc = 0.0;
    for (int slot = 0; slot < static_cast<int>(params.count()); ++slot) {
        if (params.l2_exempt(slot)) {
            continue;
        }
        const Tensor& t = params[slot];
        for (std::size_t i = 0; i < t.size(); ++i) {
            acc += t[i] * t[i];
        }
    }
    return strength * acc;
}

void add_l2_gradient(const diff::ModelParams& params, double strength,
                     std::vector<Tensor>& grads) {
    if (strength <= 0.0) {
        return;
    }
    for (int slot = 0; slot < static_cast<int>(params.count()); ++slot) {
        if (params.l2_exempt(slot)) {
            continue;
        }
        const Tensor& t = params[slot];
        Tensor& g = grads[static_cast<std::size_t>(slot)];
        for (std::size_t i = 0; i < t.size(); ++i) {
            g[i] += 2.0 * strength * t[i];
        }
    }
}

models::LossOptions loss_options(models::Phase phase, const TrainConfig& cfg, bool train_mode,
                                 bool use_poly, std::uint64_t dropout_seed_base) {
    models::LossOptions opts;
    opts.phase = phase;
    opts.use_poly = use_poly;
    opts.class_weight = cfg.class_weight;
    opts.alpha1 = cfg.alpha1;
    opts.alpha2 = cfg.alpha2;
    opts.censored_hinge = cfg.censored_hinge;
    opts.train_mode = train_mode;
    opts.dropout_rate = train_mode ? cfg.dropout : 0.0;
    opts.dropout_seed_base = dropout_seed_base;
    return opts;
}

// Mean eval-mode loss over the phase's usable validation windows.
double validation_loss(models::Phase phase, const models::ArchitectureSpec& arch,
                       const diff::ModelParams& params,
                       const std::vector<pipeline::Window>& val,
                       const std::vector<std::size_t>& usable, const TrainConfig& cfg) {
    // The exact power keeps the fallback metric comparable across the
    // poly-to-exact switch.
    const auto opts = loss_options(phase, cfg, /*train_mode=*/false, /*use_poly=*/false, 0);
    const auto fn = models::make_sample_loss(arch, val, &usable, opts);
    const double total = diff::batch_loss(fn, params, usable.size(), cfg.parallel);
    return total / static_cast<double>(usable.size());
}

ValMetric evaluate_validation(models::Phase phase, const models::ArchitectureSpec& arch,
                              const diff::ModelParams& params,
                              const std::vector<pipeline::Window>& val, const TrainConfig& cfg,
                              double train_loss) {
    ValMetric out;
    const auto usable = models::usable_windows(val, phase, cfg.censored_hinge);
    if (usable.empty()) {
        out.name = "train_loss";
        out.value = train_loss;
        out.score = -train_loss;
        return out;
    }
    switch (phase) {
        case models::Phase::DwPretrain:
        case models::Phase::RulOnly: {
            std::vector<double> preds;
            std::vector<double> targets;
            for (const auto& win : val) {
                if (!win.has_rul) {
                    continue;
                }
                const auto ev =
                    models::forward_eval(arch, params, win.values.data(), cfg.horizon);
                preds.push_back(std::clamp(ev.rul_raw, 0.0, cfg.max_rul));
                targets.push_back(win.rul_target);
            }
            if (!preds.empty()) {
                out.name = "rmse";
                out.value = metrics::rmse(preds, targets);
                out.score = -out.value;
                return out;
            }
            break;
        }
        case models::Phase::DwNll: {
            // The NLL phase checkpoints on its own objective: validation
            // likelihood tracks calibration of (lambda, k) jointly, which the
            // downstream RUL and failure-probability readouts both depend on.
            out.name = "nll";
            out.value = validation_loss(phase, arch, params, val, usable, cfg);
            out.score = -out.value;
            return out;
        }
        case models::Phase::MultiTask:
        case models::Phase::FpOnly: {
            std::vector<metrics::ScoredLabel> scored;
            scored.reserve(val.size());
            for (const auto& win : val) {
                const auto ev =
                    models::forward_eval(arch, params, win.values.data(), cfg.horizon);
                scored.push_back({ev.fp_prob, win.fp_label});
            }
            bool has_pos = false;
            bool has_neg = false;
            for (const auto& s : scored) {
                (s.label == 1 ? has_pos : has_neg) = true;
            }
            if (has_pos && has_neg) {
                out.name = "auc_pr";
                out.value = metrics::pr_auc(scored).area;
                out.score = out.value;
                return out;
            }
            break;
        }
    }
    out.name = "val_loss";
    out.value = validation_loss(phase, arch, params, val, usable, cfg);
    out.score = -out.value;
    return out;
}

}  // namespace

TrainResult train_phase(models::Phase phase, const models::ArchitectureSpec& arch,
                        diff::ModelParams params,
                        const std::vector<pipeline::Window>& train_windows,
                        const std::vector<pipeline::Window>& val_windows,
                        const TrainConfig& cfg) {
    cfg.validate();
    arch.validate();
    const auto usable = models::usable_windows(train_windows, phase, cfg.censored_hinge);
    if (usable.empty()) {
        throw std::invalid_argument("train: no usable windows for phase " +
                                    models::phase_name(phase));
    }
    if (phase == models::Phase::DwPretrain || phase == models::Phase::DwNll ||
        phase == models::Phase::RulOnly) {
        const bool any_failed = std::any_of(usable.begin(), usable.end(), [&](std::size_t i) {
            return train_windows[i].has_rul;
        });
        if (!any_failed) {
            throw std::invalid_argument("train: phase " + models::phase_name(phase) +
                                        " needs failed-device windows");
        }
    }

    diff::Adam::Config adam_cfg;
    adam_cfg.learning_rate = cfg.learning_rate;
    diff::Adam adam(params, adam_cfg);

    TrainResult result;
    result.params = params;
    result.best_epoch = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    std::size_t since_improved = 0;

    std::mt19937_64 shuffle_rng(cfg.seed);
    std::vector<std::size_t> order = usable;
    std::vector<std::size_t> batch;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        const bool use_poly = phase == models::Phase::DwNll && epoch < cfg.nll_poly_epochs;
        const std::uint64_t seed_base = cfg.seed * 0x100000001b3ULL + epoch;
        double epoch_loss = 0.0;
        bool blew_up = false;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            batch.assign(order.begin() + static_cast<long>(start),
                         order.begin() + static_cast<long>(stop));
            const auto opts = loss_options(phase, cfg, /*train_mode=*/true, use_poly, seed_base);
            const auto fn = models::make_sample_loss(arch, train_windows, &batch, opts);
            diff::BatchResult res;
            try {
                res = diff::batch_backward(fn, params, batch.size(), cfg.parallel);
            } catch (const std::runtime_error& err) {
                if (std::strstr(err.what(), "non-finite") == nullptr) {
                    throw;
                }
                blew_up = true;
                break;
            }
            const double inv_n = 1.0 / static_cast<double>(batch.size());
            for (auto& g : res.grads) {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    g[i] *= inv_n;
                }
            }
            double batch_loss = res.loss * inv_n;
            // The L2 penalty is batch-level: added once analytically rather
            // than inside every per-sample tape.
            batch_loss += l2_value(params, cfg.l2_strength);
            add_l2_gradient(params, cfg.l2_strength, res.grads);
            diff::clip_by_global_norm(res.grads, cfg.grad_clip);
            if (!std::isfinite(batch_loss)) {
                blew_up = true;
                break;
            }
            adam.step(params, res.grads);
            epoch_loss += batch_loss * static_cast<double>(batch.size());
        }
        if (blew_up) {
            result.diverged = true;
            break;
        }
        epoch_loss /= static_cast<double>(order.size());

        const ValMetric vm =
            evaluate_validation(phase, arch, params, val_windows, cfg, epoch_loss);
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = epoch_loss;
        rec.l2_term = l2_value(params, cfg.l2_strength);
        rec.val_metric = vm.value;
        rec.improved = vm.score > best_score;
        result.history.push_back(rec);
        if (result.metric_name.empty()) {
            result.metric_name = vm.name;
        }
        if (rec.improved) {
            best_score = vm.score;
            result.best_epoch = epoch;
            result.best_metric = vm.value;
            result.params = params;
            since_improved = 0;
        } else {
            ++since_improved;
            if (since_improved >= cfg.patience) {
                break;
            }
        }
    }
    return result;
}

void write_history_csv(const std::string& path, const TrainResult& result) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "epoch,train_loss,l2_term,val_" << (result.metric_name.empty() ? "metric"
                                                                          : result.metric_name)
        << ",improved\n";
    char buf[160];
    for (const auto& rec : result.history) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%d\n", rec.epoch, rec.train_loss,
                      rec.l2_term, rec.val_metric, rec.improved ? 1 : 0);
        out << buf;
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

}  // namespace prog::training
