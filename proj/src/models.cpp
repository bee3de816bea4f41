#include "prog/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace prog::models {

std::string kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::DeepWeibull: return "dw";
        case ModelKind::MultiTask: return "mtl";
        case ModelKind::RulRnn: return "rul_rnn";
        case ModelKind::FpRnn: return "fp_rnn";
    }
    throw std::logic_error("kind_name: bad enum");
}

ModelKind parse_kind(const std::string& name) {
    if (name == "dw") return ModelKind::DeepWeibull;
    if (name == "mtl") return ModelKind::MultiTask;
    if (name == "rul_rnn") return ModelKind::RulRnn;
    if (name == "fp_rnn") return ModelKind::FpRnn;
    throw std::invalid_argument("unknown model kind '" + name +
                                "' (expected dw, mtl, rul_rnn, fp_rnn)");
}

void ArchitectureSpec::validate() const {
    if (input_width == 0) {
        throw std::invalid_argument("architecture: input_width must be positive");
    }
    if (window == 0) {
        throw std::invalid_argument("architecture: window must be positive");
    }
    if (lstm_units == 0) {
        throw std::invalid_argument("architecture: lstm_units must be positive");
    }
    for (std::size_t wdt : trunk_fc) {
        if (wdt == 0) {
            throw std::invalid_argument("architecture: zero-width trunk layer");
        }
    }
    if (kind == ModelKind::MultiTask) {
        for (std::size_t wdt : rul_head) {
            if (wdt == 0) {
                throw std::invalid_argument("architecture: zero-width rul head layer");
            }
        }
    } else if (!rul_head.empty()) {
        throw std::invalid_argument("architecture: rul_head is MultiTask-only");
    }
}

std::size_t ArchitectureSpec::trunk_output_width() const {
    return trunk_fc.empty() ? lstm_units : trunk_fc.back();
}

std::string ArchitectureSpec::to_string() const {
    std::ostringstream os;
    os << "LSTM(" << lstm_units << ")";
    for (std::size_t wdt : trunk_fc) {
        os << "-FC(" << wdt << ")";
    }
    switch (kind) {
        case ModelKind::DeepWeibull:
        case ModelKind::FpRnn:
            os << "-FC(2)";
            break;
        case ModelKind::RulRnn:
            os << "-FC(1)";
            break;
        case ModelKind::MultiTask: {
            os << "---[FP: FC(2), RUL:";
            for (std::size_t wdt : rul_head) {
                os << " FC(" << wdt << ")-";
            }
            os << (rul_head.empty() ? " " : "") << "FC(1)]";
            break;
        }
    }
    return os.str();
}

namespace {

void init_uniform(Tensor& t, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = dist(rng);
    }
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

diff::ModelParams init_params(const ArchitectureSpec& arch, std::uint64_t seed) {
    arch.validate();
    std::mt19937_64 rng(seed);
    diff::ModelParams params;
    const std::size_t H = arch.lstm_units;
    const std::size_t d = arch.input_width;

    Tensor wx = Tensor::matrix(4 * H, d);
    init_uniform(wx, glorot_bound(d, H), rng);
    params.add("lstm.Wx", std::move(wx));

    Tensor wh = Tensor::matrix(4 * H, H);
    init_uniform(wh, glorot_bound(H, H), rng);
    params.add("lstm.Wh", std::move(wh));

    Tensor b = Tensor::vector(4 * H);
    for (std::size_t i = H; i < 2 * H; ++i) {
        b[i] = 1.0;  // forget-gate bias starts open
    }
    params.add("lstm.b", std::move(b), /*bias_exempt=*/true);

    auto add_fc = [&](const std::string& name, std::size_t in, std::size_t out) {
        Tensor w = Tensor::matrix(out, in);
        init_uniform(w, glorot_bound(in, out), rng);
        params.add(name + ".W", std::move(w));
        params.add(name + ".b", Tensor::vector(out), /*bias_exempt=*/true);
    };

    std::size_t width = H;
    for (std::size_t i = 0; i < arch.trunk_fc.size(); ++i) {
        add_fc("trunk" + std::to_string(i), width, arch.trunk_fc[i]);
        width = arch.trunk_fc[i];
    }
    switch (arch.kind) {
        case ModelKind::DeepWeibull:
        case ModelKind::FpRnn:
            add_fc("head", width, 2);
            break;
        case ModelKind::RulRnn:
            add_fc("head", width, 1);
            break;
        case ModelKind::MultiTask: {
            add_fc("fp_head", width, 2);
            std::size_t rw = width;
            for (std::size_t i = 0; i < arch.rul_head.size(); ++i) {
                add_fc("rul" + std::to_string(i), rw, arch.rul_head[i]);
                rw = arch.rul_head[i];
            }
            add_fc("rul_out", rw, 1);
            break;
        }
    }
    return params;
}

namespace {

struct DropoutState {
    bool active = false;
    double rate = 0.0;
    std::mt19937_64 rng;
};

DropoutState make_dropout(const ForwardOptions& opts) {
    DropoutState st;
    st.active = opts.train_mode && opts.dropout_rate > 0.0;
    st.rate = opts.dropout_rate;
    if (st.active) {
        st.rng.seed(opts.dropout_seed);
    }
    return st;
}

// Inverted dropout: kept units are scaled by 1/(1-rate) so evaluation runs
// mask-free. The mask enters the tape as a constant.
int maybe_dropout(diff::Tape& tape, int node, std::size_t width, DropoutState& st) {
    if (!st.active) {
        return node;
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Tensor mask = Tensor::vector(width);
    const double keep_scale = 1.0 / (1.0 - st.rate);
    for (std::size_t i = 0; i < width; ++i) {
        mask[i] = unif(st.rng) < st.rate ? 0.0 : keep_scale;
    }
    return tape.mul(node, tape.input(std::move(mask)));
}

int trunk_forward(diff::Tape& tape, const diff::ModelParams& params,
                  const ArchitectureSpec& arch, const double* values, DropoutState& drop) {
    const std::size_t H = arch.lstm_units;
    const std::size_t d = arch.input_width;
    const int wx = tape.param(params, params.slot("lstm.Wx"));
    const int wh = tape.param(params, params.slot("lstm.Wh"));
    const int b = tape.param(params, params.slot("lstm.b"));
    int h = tape.input(Tensor::vector(H));
    int c = tape.input(Tensor::vector(H));
    for (std::size_t step = 0; step < arch.window; ++step) {
        Tensor x = Tensor::vector(d);
        std::copy(values + step * d, values + (step + 1) * d, x.data());
        const int xin = tape.input(std::move(x));
        const int z = tape.add(tape.add(tape.matvec(wx, xin), tape.matvec(wh, h)), b);
        const int gi = tape.sigmoid(tape.slice(z, 0, H));
        const int gf = tape.sigmoid(tape.slice(z, H, H));
        const int gg = tape.tanh_(tape.slice(z, 2 * H, H));
        const int go = tape.sigmoid(tape.slice(z, 3 * H, H));
        c = tape.add(tape.mul(gf, c), tape.mul(gi, gg));
        h = tape.mul(go, tape.tanh_(c));
    }
    int cur = maybe_dropout(tape, h, H, drop);
    for (std::size_t i = 0; i < arch.trunk_fc.size(); ++i) {
        const std::string stem = "trunk" + std::to_string(i);
        const int w = tape.param(params, params.slot(stem + ".W"));
        const int bb = tape.param(params, params.slot(stem + ".b"));
        cur = tape.elu(tape.add(tape.matvec(w, cur), bb));
        cur = maybe_dropout(tape, cur, arch.trunk_fc[i], drop);
    }
    return cur;
}

int linear_head(diff::Tape& tape, const diff::ModelParams& params, const std::string& stem,
                int input) {
    const int w = tape.param(params, params.slot(stem + ".W"));
    const int b = tape.param(params, params.slot(stem + ".b"));
    return tape.add(tape.matvec(w, input), b);
}

// max(x, floor) = relu(x - floor) + floor, elementwise on a scalar node.
int floor_at(diff::Tape& tape, int node, double floor) {
    return tape.add_scalar(tape.relu(tape.add_scalar(node, -floor)), floor);
}

}  // namespace

DwNodes dw_forward_tape(diff::Tape& tape, const diff::ModelParams& params,
                        const ArchitectureSpec& arch, const double* values,
                        const ForwardOptions& opts) {
    if (arch.kind != ModelKind::DeepWeibull) {
        throw std::invalid_argument("dw_forward_tape: architecture is not DeepWeibull");
    }
    DropoutState drop = make_dropout(opts);
    const int trunk = trunk_forward(tape, params, arch, values, drop);
    const int head = linear_head(tape, params, "head", trunk);
    DwNodes out;
    out.o1 = tape.slice(head, 0, 1);
    out.o2 = tape.slice(head, 1, 1);
    out.lambda = tape.exp_(out.o1);
    out.k = floor_at(tape, tape.softplus(out.o2), weibull::kShapeFloor);
    return out;
}

TaskNodes task_forward_tape(diff::Tape& tape, const diff::ModelParams& params,
                            const ArchitectureSpec& arch, const double* values,
                            const ForwardOptions& opts) {
    DropoutState drop = make_dropout(opts);
    const int trunk = trunk_forward(tape, params, arch, values, drop);
    TaskNodes out;
    switch (arch.kind) {
        case ModelKind::DeepWeibull:
            throw std::invalid_argument("task_forward_tape: use dw_forward_tape for DeepWeibull");
        case ModelKind::FpRnn:
            out.logits = linear_head(tape, params, "head", trunk);
            break;
        case ModelKind::RulRnn:
            out.rul = linear_head(tape, params, "head", trunk);
            break;
        case ModelKind::MultiTask: {
            out.logits = linear_head(tape, params, "fp_head", trunk);
            int cur = trunk;
            for (std::size_t i = 0; i < arch.rul_head.size(); ++i) {
                const std::string stem = "rul" + std::to_string(i);
                cur = tape.elu(linear_head(tape, params, stem, cur));
                cur = maybe_dropout(tape, cur, arch.rul_head[i], drop);
            }
            out.rul = linear_head(tape, params, "rul_out", cur);
            break;
        }
    }
    return out;
}

EvalOutput forward_eval(const ArchitectureSpec& arch, const diff::ModelParams& params,
                        const double* values, double horizon) {
    diff::Tape tape;
    ForwardOptions opts;  // eval mode, no dropout
    EvalOutput out;
    if (arch.kind == ModelKind::DeepWeibull) {
        const DwNodes nodes = dw_forward_tape(tape, params, arch, values, opts);
        out.has_weibull = true;
        out.wb.lambda = tape.scalar_value(nodes.lambda);
        out.wb.k = tape.scalar_value(nodes.k);
        out.has_fp = true;
        out.fp_prob = weibull::failure_prob(out.wb, horizon);
        out.has_rul = true;
        out.rul_raw = weibull::expected_rul(out.wb);
        return out;
    }
    const TaskNodes nodes = task_forward_tape(tape, params, arch, values, opts);
    if (nodes.logits >= 0) {
        const Tensor& logits = tape.value(nodes.logits);
        const double m = std::max(logits[0], logits[1]);
        const double e0 = std::exp(logits[0] - m);
        const double e1 = std::exp(logits[1] - m);
        out.has_fp = true;
        out.fp_prob = e1 / (e0 + e1);
    }
    if (nodes.rul >= 0) {
        out.has_rul = true;
        out.rul_raw = tape.scalar_value(nodes.rul);
    }
    return out;
}

std::string phase_name(Phase phase) {
    switch (phase) {
        case Phase::DwPretrain: return "dw_pretrain";
        case Phase::DwNll: return "dw_nll";
        case Phase::MultiTask: return "mtl";
        case Phase::FpOnly: return "fp";
        case Phase::RulOnly: return "rul";
    }
    throw std::logic_error("phase_name: bad enum");
}

std::vector<std::size_t> usable_windows(const std::vector<pipeline::Window>& windows,
                                        Phase phase, bool censored_hinge) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& win = windows[i];
        bool ok = false;
        switch (phase) {
            case Phase::DwPretrain:
            case Phase::DwNll:
                // Censored windows with no remaining life carry no signal and
                // the likelihood rejects t_g = 0.
                ok = win.has_rul || (win.censored && win.censor_remaining > 0.0);
                break;
            case Phase::MultiTask:
            case Phase::FpOnly:
                ok = true;
                break;
            case Phase::RulOnly:
                ok = win.has_rul || (censored_hinge && win.censored);
                break;
        }
        if (ok) {
            out.push_back(i);
        }
    }
    return out;
}

namespace {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    // splitmix64: decorrelates per-window dropout streams from the base seed.
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

diff::SampleLoss make_sample_loss(const ArchitectureSpec& arch,
                                  const std::vector<pipeline::Window>& windows,
                                  const std::vector<std::size_t>* order,
                                  const LossOptions& opts) {
    arch.validate();
    return [&arch, &windows, order, opts](diff::Tape& tape, const diff::ModelParams& params,
                                          std::size_t sample) -> int {
        const std::size_t idx = order ? (*order)[sample] : sample;
        const pipeline::Window& win = windows[idx];
        ForwardOptions fwd;
        fwd.train_mode = opts.train_mode;
        fwd.dropout_rate = opts.dropout_rate;
        fwd.dropout_seed = mix_seed(opts.dropout_seed_base, idx);

        switch (opts.phase) {
            case Phase::DwPretrain: {
                const DwNodes nodes = dw_forward_tape(tape, params, arch, win.values.data(), fwd);
                const int rul = tape.gamma_mean(nodes.lambda, nodes.k);
                if (win.has_rul) {
                    return tape.square(tape.add_scalar(rul, -win.rul_target));
                }
                // Censored constraint: max(censor_remaining - rul, 0).
                return tape.relu(tape.add_scalar(tape.scale(rul, -1.0), win.censor_remaining));
            }
            case Phase::DwNll: {
                const DwNodes nodes = dw_forward_tape(tape, params, arch, win.values.data(), fwd);
                const double t_raw = win.has_rul ? win.rul_target : win.censor_remaining;
                const double t_g = std::max(t_raw, weibull::kMinEventTime);
                const double ln_t = std::log(t_g);
                // a = ln t_g - ln lambda, with ln lambda = o1 exactly.
                const int a = tape.add_scalar(tape.scale(nodes.o1, -1.0), ln_t);
                const int u = tape.mul(nodes.k, a);
                const int power = opts.use_poly ? tape.poly_exp4(u) : tape.exp_(u);
                if (!win.has_rul) {
                    return power;  // censored: -log survival
                }
                const int lnk = tape.log_(nodes.k);
                const int km1 = tape.add_scalar(nodes.k, -1.0);
                const int event = tape.add(tape.sub(lnk, nodes.o1), tape.mul(km1, a));
                return tape.sub(power, event);
            }
            case Phase::MultiTask: {
                const TaskNodes nodes = task_forward_tape(tape, params, arch, win.values.data(),
                                                          fwd);
                const double weight = win.fp_label == 1 ? opts.class_weight : 1.0;
                const int ce = tape.weighted_ce2(nodes.logits, win.fp_label, weight);
                int rul_term = -1;
                if (win.has_rul) {
                    rul_term = tape.square(tape.add_scalar(nodes.rul, -win.rul_target));
                } else {
                    rul_term = tape.relu(
                        tape.add_scalar(tape.scale(nodes.rul, -1.0), win.censor_remaining));
                }
                return tape.add(tape.scale(ce, opts.alpha1), tape.scale(rul_term, opts.alpha2));
            }
            case Phase::FpOnly: {
                const TaskNodes nodes = task_forward_tape(tape, params, arch, win.values.data(),
                                                          fwd);
                const double weight = win.fp_label == 1 ? opts.class_weight : 1.0;
                return tape.weighted_ce2(nodes.logits, win.fp_label, weight);
            }
            case Phase::RulOnly: {
                const TaskNodes nodes = task_forward_tape(tape, params, arch, win.values.data(),
                                                          fwd);
                if (win.has_rul) {
                    return tape.square(tape.add_scalar(nodes.rul, -win.rul_target));
                }
                return tape.relu(
                    tape.add_scalar(tape.scale(nodes.rul, -1.0), win.censor_remaining));
            }
        }
        throw std::logic_error("make_sample_loss: bad phase");
    };
}

std::vector<PredictionRecord> predict(const ArchitectureSpec& arch,
                                      const diff::ModelParams& params,
                                      const std::vector<pipeline::Window>& windows,
                                      double horizon, double max_rul, bool parallel) {
    arch.validate();
    if (!(horizon > 0.0) || !(max_rul > 0.0)) {
        throw std::invalid_argument("predict: horizon and max_rul must be positive");
    }
    for (const auto& win : windows) {
        if (win.values.size() != arch.window * arch.input_width) {
            throw std::invalid_argument("predict: window width mismatch");
        }
    }
    std::vector<PredictionRecord> out(windows.size());
    const long n = static_cast<long>(windows.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
#endif
    for (long i = 0; i < n; ++i) {
        const auto& win = windows[static_cast<std::size_t>(i)];
        const EvalOutput ev = forward_eval(arch, params, win.values.data(), horizon);
        PredictionRecord rec;
        rec.device_id = win.device_id;
        rec.end_time = win.end_time;
        if (ev.has_rul) {
            rec.has_rul = true;
            rec.rul_raw = ev.rul_raw;
            rec.rul_hat = std::clamp(ev.rul_raw, 0.0, max_rul);
        }
        if (ev.has_fp) {
            rec.has_fp = true;
            rec.fp_prob = ev.fp_prob;
        } else if (arch.kind == ModelKind::RulRnn) {
            // Monotone surrogate score: thresholding RUL from above is the
            // same ranking as 1 - rul/max_rul, kept in [0,1].
            rec.has_fp = true;
            rec.fp_prob = 1.0 - rec.rul_hat / max_rul;
        }
        if (ev.has_weibull) {
            rec.has_weibull = true;
            rec.wb = ev.wb;
        }
        out[static_cast<std::size_t>(i)] = std::move(rec);
    }
    return out;
}

}  // namespace prog::models
