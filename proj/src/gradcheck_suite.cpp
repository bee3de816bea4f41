#include "prog/gradcheck_suite.hpp"

#include <cstddef>
#include <random>
#include <utility>

#include "prog/autodiff.hpp"
#include "prog/models.hpp"
#include "prog/pipeline.hpp"

namespace prog::commands {

namespace {

void fill_random(Tensor& t, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> normal(0.0, scale);
    for (auto& v : t.values()) {
        v = normal(rng);
    }
}

std::vector<double> random_values(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> out(n);
    for (auto& v : out) {
        v = unif(rng);
    }
    return out;
}

pipeline::Window toy_window(std::mt19937_64& rng, std::size_t w, std::size_t d, bool failed,
                            double t_or_c, int fp_label) {
    pipeline::Window win;
    win.device_id = "toy";
    win.end_time = w;
    win.values = random_values(w * d, rng);
    if (failed) {
        win.fp_label = fp_label;
        win.has_rul = true;
        win.rul_target = t_or_c;
    } else {
        win.censored = true;
        win.censor_remaining = t_or_c;
    }
    return win;
}

// Mixed batch: failed windows with targets away from the clamp, censored
// windows with remaining times away from the hinge kink at random init.
std::vector<pipeline::Window> toy_batch(std::size_t w, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<pipeline::Window> windows;
    windows.push_back(toy_window(rng, w, d, true, 1.7, 1));
    windows.push_back(toy_window(rng, w, d, true, 0.9, 0));
    windows.push_back(toy_window(rng, w, d, true, 2.8, 1));
    windows.push_back(toy_window(rng, w, d, false, 2.6, 0));
    windows.push_back(toy_window(rng, w, d, false, 0.4, 0));
    windows.push_back(toy_window(rng, w, d, false, 3.1, 0));
    return windows;
}

diff::LossExpr mean_loss_expr(models::ArchitectureSpec arch,
                              std::vector<pipeline::Window> windows, models::LossOptions opts,
                              double l2) {
    return [arch = std::move(arch), windows = std::move(windows), opts,
            l2](diff::Tape& tape, const diff::ModelParams& params) -> int {
        const diff::SampleLoss fn = models::make_sample_loss(arch, windows, nullptr, opts);
        int total = -1;
        for (std::size_t s = 0; s < windows.size(); ++s) {
            const int node = fn(tape, params, s);
            total = total < 0 ? node : tape.add(total, node);
        }
        int loss = tape.scale(total, 1.0 / static_cast<double>(windows.size()));
        if (l2 > 0.0) {
            loss = tape.add(loss, diff::l2_penalty(tape, params, l2));
        }
        return loss;
    };
}

CheckCase evaluate_case(std::string name, const diff::LossExpr& expr,
                        diff::ModelParams& params, double epsilon, double tolerance,
                        bool must_detect = false) {
    CheckCase c;
    c.name = std::move(name);
    c.result = diff::grad_check(expr, params, epsilon);
    c.pass = must_detect ? c.result.max_rel_error > 1e-2 : c.result.max_rel_error < tolerance;
    return c;
}

}  // namespace

std::vector<CheckCase> run_gradcheck_suite(double epsilon, double tolerance,
                                           bool corrupt_hook) {
    std::vector<CheckCase> cases;

    // --- raw layer primitives -------------------------------------------
    {
        std::mt19937_64 rng(101);
        diff::ModelParams params;
        params.add("W", Tensor::matrix(3, 4));
        params.add("b", Tensor::vector(3), /*bias_exempt=*/true);
        fill_random(params.get("W"), rng, 0.6);
        fill_random(params.get("b"), rng, 0.4);
        const std::vector<double> x = random_values(4, rng);
        const diff::LossExpr expr = [x](diff::Tape& tape,
                                        const diff::ModelParams& p) -> int {
            const int xin = tape.input(Tensor({4}, x));
            const int h = tape.elu(tape.add(tape.matvec(tape.param(p, p.slot("W")), xin),
                                            tape.param(p, p.slot("b"))));
            return tape.sum(h);
        };
        cases.push_back(evaluate_case("fc_elu", expr, params, epsilon, tolerance));
    }
    {
        std::mt19937_64 rng(102);
        diff::ModelParams params;
        params.add("W", Tensor::matrix(4, 3));
        fill_random(params.get("W"), rng, 0.8);
        const std::vector<double> x = random_values(3, rng);
        const diff::LossExpr expr = [x](diff::Tape& tape,
                                        const diff::ModelParams& p) -> int {
            const int xin = tape.input(Tensor({3}, x));
            const int z = tape.matvec(tape.param(p, p.slot("W")), xin);
            return tape.sum(tape.softplus(tape.tanh_(tape.sigmoid(z))));
        };
        cases.push_back(evaluate_case("activation_chain", expr, params, epsilon, tolerance));
    }
    {
        std::mt19937_64 rng(103);
        diff::ModelParams params;
        params.add("W", Tensor::matrix(2, 3));
        params.add("b", Tensor::vector(2), true);
        fill_random(params.get("W"), rng, 0.7);
        fill_random(params.get("b"), rng, 0.3);
        const std::vector<double> x0 = random_values(3, rng);
        const std::vector<double> x1 = random_values(3, rng);
        const diff::LossExpr expr = [x0, x1](diff::Tape& tape,
                                             const diff::ModelParams& p) -> int {
            const int w = tape.param(p, p.slot("W"));
            const int b = tape.param(p, p.slot("b"));
            const int l0 = tape.add(tape.matvec(w, tape.input(Tensor({3}, x0))), b);
            const int l1 = tape.add(tape.matvec(w, tape.input(Tensor({3}, x1))), b);
            return tape.scale(tape.add(tape.weighted_ce2(l0, 1, 3.0),
                                       tape.weighted_ce2(l1, 0, 3.0)),
                              0.5);
        };
        cases.push_back(evaluate_case("weighted_ce2", expr, params, epsilon, tolerance));
    }
    {
        std::mt19937_64 rng(104);
        diff::ModelParams params;
        params.add("W", Tensor::matrix(2, 3));
        params.add("b", Tensor::vector(2), true);
        fill_random(params.get("W"), rng, 0.5);
        fill_random(params.get("b"), rng, 0.3);
        const std::vector<double> x = random_values(3, rng);
        const diff::LossExpr expr = [x](diff::Tape& tape,
                                        const diff::ModelParams& p) -> int {
            const int o = tape.add(tape.matvec(tape.param(p, p.slot("W")),
                                               tape.input(Tensor({3}, x))),
                                   tape.param(p, p.slot("b")));
            const int lam = tape.exp_(tape.slice(o, 0, 1));
            const int sp = tape.softplus(tape.slice(o, 1, 1));
            const int k = tape.add_scalar(tape.relu(tape.add_scalar(sp, -1e-3)), 1e-3);
            const int rul = tape.gamma_mean(lam, k);
            return tape.square(tape.add_scalar(rul, -2.0));
        };
        cases.push_back(evaluate_case("gamma_mean", expr, params, epsilon, tolerance));
    }
    {
        std::mt19937_64 rng(105);
        diff::ModelParams params;
        params.add("W", Tensor::matrix(3, 4));
        fill_random(params.get("W"), rng, 0.5);
        const std::vector<double> x = random_values(4, rng);
        const diff::LossExpr expr = [x](diff::Tape& tape,
                                        const diff::ModelParams& p) -> int {
            const int z = tape.matvec(tape.param(p, p.slot("W")), tape.input(Tensor({4}, x)));
            return tape.sum(tape.poly_exp4(z));
        };
        cases.push_back(evaluate_case("poly_exp4", expr, params, epsilon, tolerance));
    }

    // --- production forwards and losses ---------------------------------
    models::ArchitectureSpec dw;
    dw.kind = models::ModelKind::DeepWeibull;
    dw.input_width = 3;
    dw.window = 4;
    dw.lstm_units = 6;
    dw.trunk_fc = {5};

    {
        models::ArchitectureSpec tiny = dw;
        tiny.trunk_fc = {};
        tiny.window = 2;
        diff::ModelParams params = models::init_params(tiny, 301);
        std::mt19937_64 rng(106);
        const std::vector<double> values = random_values(tiny.window * tiny.input_width, rng);
        const models::ForwardOptions fo;
        const diff::LossExpr expr = [tiny, values, fo](diff::Tape& tape,
                                                       const diff::ModelParams& p) -> int {
            const models::DwNodes nodes =
                models::dw_forward_tape(tape, p, tiny, values.data(), fo);
            return tape.add(tape.square(nodes.o1), tape.square(nodes.o2));
        };
        cases.push_back(evaluate_case("lstm_head", expr, params, epsilon, tolerance));
    }

    const std::vector<pipeline::Window> dw_batch = toy_batch(dw.window, dw.input_width, 201);
    {
        diff::ModelParams params = models::init_params(dw, 302);
        models::LossOptions opts;
        opts.phase = models::Phase::DwPretrain;
        cases.push_back(evaluate_case("dw_pretrain",
                                      mean_loss_expr(dw, dw_batch, opts, 0.0), params,
                                      epsilon, tolerance));
    }
    {
        diff::ModelParams params = models::init_params(dw, 303);
        models::LossOptions opts;
        opts.phase = models::Phase::DwNll;
        opts.use_poly = true;
        cases.push_back(evaluate_case("dw_nll_poly",
                                      mean_loss_expr(dw, dw_batch, opts, 0.01), params,
                                      epsilon, tolerance));
        opts.use_poly = false;
        cases.push_back(evaluate_case("dw_nll_exact",
                                      mean_loss_expr(dw, dw_batch, opts, 0.01), params,
                                      epsilon, tolerance));
    }

    models::ArchitectureSpec mtl;
    mtl.kind = models::ModelKind::MultiTask;
    mtl.input_width = 3;
    mtl.window = 3;
    mtl.lstm_units = 5;
    mtl.trunk_fc = {4};
    mtl.rul_head = {3};
    const std::vector<pipeline::Window> mtl_batch = toy_batch(mtl.window, mtl.input_width, 202);
    {
        diff::ModelParams params = models::init_params(mtl, 304);
        models::LossOptions opts;
        opts.phase = models::Phase::MultiTask;
        opts.class_weight = 3.0;
        opts.alpha1 = 1.0;
        opts.alpha2 = 0.7;
        cases.push_back(evaluate_case("mtl_loss",
                                      mean_loss_expr(mtl, mtl_batch, opts, 0.01), params,
                                      epsilon, tolerance));
        opts.train_mode = true;
        opts.dropout_rate = 0.25;
        opts.dropout_seed_base = 99;
        cases.push_back(evaluate_case("mtl_dropout",
                                      mean_loss_expr(mtl, mtl_batch, opts, 0.0), params,
                                      epsilon, tolerance));
    }
    {
        models::ArchitectureSpec fp = mtl;
        fp.kind = models::ModelKind::FpRnn;
        fp.rul_head = {};
        diff::ModelParams params = models::init_params(fp, 305);
        models::LossOptions opts;
        opts.phase = models::Phase::FpOnly;
        opts.class_weight = 2.5;
        cases.push_back(evaluate_case("fp_ce", mean_loss_expr(fp, mtl_batch, opts, 0.0),
                                      params, epsilon, tolerance));
    }
    {
        models::ArchitectureSpec rul = mtl;
        rul.kind = models::ModelKind::RulRnn;
        rul.rul_head = {};
        diff::ModelParams params = models::init_params(rul, 306);
        models::LossOptions opts;
        opts.phase = models::Phase::RulOnly;
        opts.censored_hinge = true;
        cases.push_back(evaluate_case("rul_hinge", mean_loss_expr(rul, mtl_batch, opts, 0.0),
                                      params, epsilon, tolerance));
    }

    if (corrupt_hook) {
        std::mt19937_64 rng(107);
        diff::ModelParams params;
        params.add("W", Tensor::matrix(2, 3));
        params.add("b", Tensor::vector(2), true);
        fill_random(params.get("W"), rng, 0.5);
        fill_random(params.get("b"), rng, 0.5);
        const std::vector<double> x = random_values(3, rng);
        // The bias enters the loss value as a plain number instead of a tape
        // leaf, so the analytic gradient misses it: the checker must flag it.
        const diff::LossExpr expr = [x](diff::Tape& tape,
                                        const diff::ModelParams& p) -> int {
            const int h = tape.matvec(tape.param(p, p.slot("W")), tape.input(Tensor({3}, x)));
            return tape.add_scalar(tape.sum(h), p.get("b")[0]);
        };
        cases.push_back(
            evaluate_case("corrupt_hook_detected", expr, params, epsilon, tolerance, true));
    }

    return cases;
}

}  // namespace prog::commands
