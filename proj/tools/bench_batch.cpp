// Benchmark: serial vs OpenMP batch gradient accumulation on the multi-task
// loss. The blocked reduction makes both paths bitwise identical, which is
// verified here on top of the timing comparison.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "prog/batch.hpp"
#include "prog/models.hpp"
#include "prog/pipeline.hpp"

namespace {

std::vector<prog::pipeline::Window> make_windows(std::size_t n, std::size_t w, std::size_t d,
                                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<prog::pipeline::Window> windows(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& win = windows[i];
        win.device_id = "bench_" + std::to_string(i);
        win.end_time = w;
        win.values.resize(w * d);
        for (auto& v : win.values) {
            v = unif(rng);
        }
        if (i % 3 == 0) {
            win.censored = true;
            win.censor_remaining = 2.0 + unif(rng);
        } else {
            win.has_rul = true;
            win.rul_target = 1.5 + unif(rng);
            win.fp_label = i % 5 == 0 ? 1 : 0;
        }
    }
    return windows;
}

double time_ms(const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP batch backward benchmark"};
    std::size_t n_windows = 512;
    std::size_t repeats = 5;
    std::size_t lstm_units = 64;
    std::size_t window = 10;
    std::size_t width = 14;
    app.add_option("--windows", n_windows, "batch size");
    app.add_option("--repeats", repeats, "timed repetitions per mode");
    app.add_option("--lstm", lstm_units, "LSTM units");
    app.add_option("--window", window, "window length");
    app.add_option("--width", width, "feature width");
    CLI11_PARSE(app, argc, argv);

    prog::models::ArchitectureSpec arch;
    arch.kind = prog::models::ModelKind::MultiTask;
    arch.input_width = width;
    arch.window = window;
    arch.lstm_units = lstm_units;
    arch.trunk_fc = {static_cast<std::size_t>(lstm_units / 2), 32};
    arch.rul_head = {16};

    const auto params = prog::models::init_params(arch, 7);
    const auto windows = make_windows(n_windows, window, width, 11);
    prog::models::LossOptions opts;
    opts.phase = prog::models::Phase::MultiTask;
    opts.class_weight = 10.0;
    const auto fn = prog::models::make_sample_loss(arch, windows, nullptr, opts);

    std::printf("arch %s, %zu windows, %zu repeats\n", arch.to_string().c_str(), n_windows,
                repeats);

    // Warm-up and parity check.
    const auto serial = prog::diff::batch_backward_serial(fn, params, windows.size());
    const auto parallel = prog::diff::batch_backward_parallel(fn, params, windows.size());
    bool identical = serial.loss == parallel.loss;
    for (std::size_t p = 0; identical && p < serial.grads.size(); ++p) {
        for (std::size_t i = 0; identical && i < serial.grads[p].size(); ++i) {
            identical = serial.grads[p][i] == parallel.grads[p][i];
        }
    }
    std::printf("bitwise parity: %s\n", identical ? "identical" : "MISMATCH");

    double serial_ms = 0.0;
    double parallel_ms = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
        serial_ms += time_ms([&] {
            (void)prog::diff::batch_backward_serial(fn, params, windows.size());
        });
        parallel_ms += time_ms([&] {
            (void)prog::diff::batch_backward_parallel(fn, params, windows.size());
        });
    }
    serial_ms /= static_cast<double>(repeats);
    parallel_ms /= static_cast<double>(repeats);
    std::printf("serial:   %9.2f ms/batch\n", serial_ms);
    std::printf("parallel: %9.2f ms/batch\n", parallel_ms);
    std::printf("speedup:  %9.2fx\n", serial_ms / parallel_ms);
    return identical ? 0 : 1;
}
