#include "prog/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "prog/checkpoint.hpp"
#include "prog/gradcheck_suite.hpp"
#include "prog/metrics.hpp"
#include "prog/models.hpp"
#include "prog/pipeline.hpp"
#include "prog/synth.hpp"
#include "prog/training.hpp"
#include "prog/weibull.hpp"

namespace prog::commands {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Configuration/input problems exit 2; numeric/training problems exit 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ComputeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path);
    }
    try {
        return json::parse(in, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
    } catch (const json::parse_error& err) {
        throw ConfigError(path + ": " + err.what());
    }
}

void apply_overrides(json& cfg, const std::vector<std::string>& overrides) {
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("override must look like dotted.key=value: " + item);
        }
        std::string pointer = "/" + item.substr(0, eq);
        std::replace(pointer.begin(), pointer.end(), '.', '/');
        const std::string raw = item.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;  // unquoted strings pass through
        }
        try {
            cfg[json::json_pointer(pointer)] = value;
        } catch (const json::exception& err) {
            throw ConfigError("override " + item + ": " + err.what());
        }
    }
}

template <typename T>
T get_or(const json& block, const std::string& key, T fallback) {
    if (!block.is_object() || !block.contains(key)) {
        return fallback;
    }
    try {
        return block.at(key).get<T>();
    } catch (const json::exception& err) {
        throw ConfigError("config key '" + key + "': " + err.what());
    }
}

template <typename T>
T require(const json& block, const std::string& key, const std::string& where) {
    if (!block.is_object() || !block.contains(key)) {
        throw ConfigError("config is missing required key " + where + "." + key);
    }
    try {
        return block.at(key).get<T>();
    } catch (const json::exception& err) {
        throw ConfigError("config key " + where + "." + key + ": " + err.what());
    }
}

// A misspelled key would otherwise silently fall back to its default, so
// every parsed block rejects keys it does not know.
void check_keys(const json& block, std::initializer_list<const char*> allowed,
                const std::string& where) {
    if (!block.is_object()) {
        return;
    }
    for (const auto& [key, value] : block.items()) {
        (void)value;
        bool known = false;
        for (const char* candidate : allowed) {
            if (key == candidate) {
                known = true;
                break;
            }
        }
        if (!known) {
            std::string expected;
            for (const char* candidate : allowed) {
                if (!expected.empty()) {
                    expected += ", ";
                }
                expected += candidate;
            }
            throw ConfigError(where + ": unknown key '" + key + "' (expected one of: " +
                              expected + ")");
        }
    }
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) {
            throw ConfigError("cannot write " + tmp);
        }
        out << content;
        if (!out) {
            throw ConfigError("write failed for " + tmp);
        }
    }
    fs::rename(tmp, path);
}

void write_json_atomic(const std::string& path, const json& value) {
    write_text_atomic(path, value.dump(2) + "\n");
}

// ---------------------------------------------------------------- dataset --

struct DatasetConfig {
    std::string kind;
    std::string path;
    std::string subset = "FD001";
    std::string model = "ST4000DM000";
    std::string stem = "synth";
    std::string prepared_dir;
    pipeline::WindowingConfig windowing;
    bool balance = false;
    std::uint64_t balance_seed = 7;
    double val_fraction = 0.3;
    std::uint64_t split_seed = 11;
};

DatasetConfig parse_dataset(const json& root) {
    if (!root.contains("dataset")) {
        throw ConfigError("config is missing the dataset block");
    }
    const json& block = root.at("dataset");
    check_keys(block,
               {"kind", "path", "subset", "model", "stem", "prepared_dir", "windowing",
                "balance", "balance_seed", "val_fraction", "split_seed"},
               "dataset");
    DatasetConfig ds;
    ds.kind = require<std::string>(block, "kind", "dataset");
    if (ds.kind != "cmapss" && ds.kind != "backblaze" && ds.kind != "synth") {
        throw ConfigError("dataset.kind must be cmapss, backblaze or synth");
    }
    ds.path = require<std::string>(block, "path", "dataset");
    ds.subset = get_or<std::string>(block, "subset", ds.subset);
    ds.model = get_or<std::string>(block, "model", ds.model);
    ds.stem = get_or<std::string>(block, "stem", ds.stem);
    ds.prepared_dir = require<std::string>(block, "prepared_dir", "dataset");
    if (block.contains("windowing")) {
        const json& win = block.at("windowing");
        check_keys(win, {"w", "stride", "tau_f", "tau_e", "max_rul"}, "dataset.windowing");
        ds.windowing.w = get_or<std::size_t>(win, "w", ds.windowing.w);
        ds.windowing.stride = get_or<std::size_t>(win, "stride", ds.windowing.stride);
        ds.windowing.tau_f = get_or<double>(win, "tau_f", ds.windowing.tau_f);
        ds.windowing.tau_e = get_or<double>(win, "tau_e", ds.windowing.tau_e);
        ds.windowing.max_rul = get_or<double>(win, "max_rul", ds.windowing.max_rul);
    }
    try {
        ds.windowing.validate();
    } catch (const std::exception& err) {
        throw ConfigError(err.what());
    }
    ds.balance = get_or<bool>(block, "balance", ds.balance);
    ds.balance_seed = get_or<std::uint64_t>(block, "balance_seed", ds.balance_seed);
    ds.val_fraction = get_or<double>(block, "val_fraction", ds.val_fraction);
    ds.split_seed = get_or<std::uint64_t>(block, "split_seed", ds.split_seed);
    if (ds.val_fraction < 0.0 || ds.val_fraction >= 1.0) {
        throw ConfigError("dataset.val_fraction must be in [0,1)");
    }
    return ds;
}

json dataset_json(const DatasetConfig& ds) {
    return json{{"kind", ds.kind},
                {"path", ds.path},
                {"subset", ds.subset},
                {"model", ds.model},
                {"stem", ds.stem},
                {"prepared_dir", ds.prepared_dir},
                {"windowing",
                 {{"w", ds.windowing.w},
                  {"stride", ds.windowing.stride},
                  {"tau_f", ds.windowing.tau_f},
                  {"tau_e", ds.windowing.tau_e},
                  {"max_rul", ds.windowing.max_rul}}},
                {"balance", ds.balance},
                {"balance_seed", ds.balance_seed},
                {"val_fraction", ds.val_fraction},
                {"split_seed", ds.split_seed}};
}

// ------------------------------------------------------------------ model --

struct ModelConfig {
    models::ModelKind kind = models::ModelKind::DeepWeibull;
    std::size_t lstm_units = 128;
    std::vector<std::size_t> trunk_fc;
    std::vector<std::size_t> rul_head;
    training::TrainConfig train;
    bool pretrain_enabled = true;
    std::size_t pretrain_max_epochs = 60;
    std::size_t pretrain_patience = 10;
    std::size_t repeat = 1;
};

ModelConfig parse_model(const json& root) {
    if (!root.contains("model")) {
        throw ConfigError("config is missing the model block");
    }
    const json& block = root.at("model");
    check_keys(block, {"kind", "lstm_units", "trunk_fc", "rul_head", "train"}, "model");
    ModelConfig mc;
    try {
        mc.kind = models::parse_kind(require<std::string>(block, "kind", "model"));
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    mc.lstm_units = get_or<std::size_t>(block, "lstm_units", mc.lstm_units);
    mc.trunk_fc = get_or<std::vector<std::size_t>>(block, "trunk_fc", mc.trunk_fc);
    mc.rul_head = get_or<std::vector<std::size_t>>(block, "rul_head", mc.rul_head);

    const json train = block.contains("train") ? block.at("train") : json::object();
    check_keys(train,
               {"learning_rate", "batch_size", "max_epochs", "patience", "dropout",
                "l2_strength", "class_weight", "alpha1", "alpha2", "grad_clip", "seed",
                "censored_hinge", "parallel", "nll_poly_epochs", "pretrain"},
               "model.train");
    auto& tc = mc.train;
    tc.learning_rate = get_or<double>(train, "learning_rate", tc.learning_rate);
    tc.batch_size = get_or<std::size_t>(train, "batch_size", tc.batch_size);
    tc.max_epochs = get_or<std::size_t>(train, "max_epochs", tc.max_epochs);
    tc.patience = get_or<std::size_t>(train, "patience", tc.patience);
    tc.dropout = get_or<double>(train, "dropout", tc.dropout);
    tc.l2_strength = get_or<double>(train, "l2_strength", tc.l2_strength);
    tc.class_weight = get_or<double>(train, "class_weight", tc.class_weight);
    tc.alpha1 = get_or<double>(train, "alpha1", tc.alpha1);
    tc.alpha2 = get_or<double>(train, "alpha2", tc.alpha2);
    tc.grad_clip = get_or<double>(train, "grad_clip", tc.grad_clip);
    tc.seed = get_or<std::uint64_t>(train, "seed", tc.seed);
    tc.censored_hinge = get_or<bool>(train, "censored_hinge", tc.censored_hinge);
    tc.parallel = get_or<bool>(train, "parallel", tc.parallel);
    const long long poly_epochs = get_or<long long>(train, "nll_poly_epochs", -1);
    tc.nll_poly_epochs = poly_epochs < 0 ? std::numeric_limits<std::size_t>::max()
                                         : static_cast<std::size_t>(poly_epochs);
    if (train.contains("pretrain")) {
        const json& pre = train.at("pretrain");
        check_keys(pre, {"enabled", "max_epochs", "patience"}, "model.train.pretrain");
        mc.pretrain_enabled = get_or<bool>(pre, "enabled", true);
        mc.pretrain_max_epochs = get_or<std::size_t>(pre, "max_epochs", mc.pretrain_max_epochs);
        mc.pretrain_patience = get_or<std::size_t>(pre, "patience", mc.pretrain_patience);
    }
    mc.repeat = get_or<std::size_t>(root, "repeat", mc.repeat);
    if (mc.repeat == 0) {
        throw ConfigError("repeat must be >= 1");
    }
    return mc;
}

json train_json(const training::TrainConfig& tc, const ModelConfig& mc) {
    json out{{"learning_rate", tc.learning_rate},
             {"batch_size", tc.batch_size},
             {"max_epochs", tc.max_epochs},
             {"patience", tc.patience},
             {"dropout", tc.dropout},
             {"l2_strength", tc.l2_strength},
             {"class_weight", tc.class_weight},
             {"alpha1", tc.alpha1},
             {"alpha2", tc.alpha2},
             {"grad_clip", tc.grad_clip},
             {"seed", tc.seed},
             {"censored_hinge", tc.censored_hinge},
             {"parallel", tc.parallel},
             {"nll_poly_epochs",
              tc.nll_poly_epochs == std::numeric_limits<std::size_t>::max()
                  ? -1
                  : static_cast<long long>(tc.nll_poly_epochs)}};
    if (mc.kind == models::ModelKind::DeepWeibull) {
        out["pretrain"] = json{{"enabled", mc.pretrain_enabled},
                               {"max_epochs", mc.pretrain_max_epochs},
                               {"patience", mc.pretrain_patience}};
    }
    return out;
}

json model_json(const ModelConfig& mc) {
    return json{{"kind", models::kind_name(mc.kind)},
                {"lstm_units", mc.lstm_units},
                {"trunk_fc", mc.trunk_fc},
                {"rul_head", mc.rul_head},
                {"train", train_json(mc.train, mc)}};
}

struct EvalConfig {
    double horizon_raw = 0.0;  // 0 = derive tau_f + tau_e from windowing
    std::size_t confusion_bins = 6;
    std::string windows_path;  // empty = prepared_dir/windows_test.csv
    std::string output_dir;    // empty = checkpoint directory
};

EvalConfig parse_eval(const json& root) {
    EvalConfig ec;
    if (root.contains("evaluation")) {
        const json& block = root.at("evaluation");
        check_keys(block, {"horizon", "confusion_bins", "windows", "output_dir"},
                   "evaluation");
        ec.horizon_raw = get_or<double>(block, "horizon", ec.horizon_raw);
        ec.confusion_bins = get_or<std::size_t>(block, "confusion_bins", ec.confusion_bins);
        ec.windows_path = get_or<std::string>(block, "windows", ec.windows_path);
        ec.output_dir = get_or<std::string>(block, "output_dir", ec.output_dir);
    }
    if (ec.confusion_bins == 0) {
        throw ConfigError("evaluation.confusion_bins must be >= 1");
    }
    return ec;
}

json eval_json(const EvalConfig& ec, double resolved_horizon) {
    return json{{"horizon", resolved_horizon},
                {"confusion_bins", ec.confusion_bins},
                {"windows", ec.windows_path},
                {"output_dir", ec.output_dir}};
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------- prepare --

struct LoadedData {
    std::vector<pipeline::SensorSequence> train;
    std::vector<pipeline::SensorSequence> test;
    bool has_test = false;
    std::vector<std::string> warnings;
};

LoadedData load_dataset(const DatasetConfig& ds) {
    LoadedData data;
    if (ds.kind == "cmapss") {
        pipeline::CmapssData raw = pipeline::load_cmapss(ds.path, ds.subset);
        data.train = std::move(raw.train);
        data.test = std::move(raw.test);
        data.has_test = true;
    } else if (ds.kind == "backblaze") {
        data.train = pipeline::load_backblaze(ds.path, ds.model,
                                              pipeline::default_smart_columns(),
                                              &data.warnings);
        if (data.train.empty()) {
            throw ConfigError("backblaze ingest matched no devices for model " + ds.model);
        }
    } else {
        data.train = pipeline::load_synth_sequences(ds.path, ds.stem + "_train");
        const fs::path test_file = fs::path(ds.path) / (ds.stem + "_test_devices.csv");
        if (fs::exists(test_file)) {
            data.test = pipeline::load_synth_sequences(ds.path, ds.stem + "_test");
            data.has_test = true;
        }
    }
    return data;
}

struct SplitWindows {
    pipeline::WindowSet set;
    std::size_t devices = 0;
    std::size_t positives = 0;
};

SplitWindows window_split(const std::vector<pipeline::SensorSequence>& seqs,
                          const pipeline::WindowingConfig& wcfg, std::size_t d,
                          std::vector<std::string>* warnings) {
    SplitWindows out;
    out.set.w = wcfg.w;
    out.set.d = d;
    out.devices = seqs.size();
    for (const auto& seq : seqs) {
        auto wins = pipeline::make_windows(seq, wcfg, warnings);
        for (auto& win : wins) {
            if (win.fp_label == 1) {
                ++out.positives;
            }
            out.set.windows.push_back(std::move(win));
        }
    }
    return out;
}

json split_summary(const SplitWindows& split) {
    const std::size_t n = split.set.windows.size();
    return json{{"devices", split.devices},
                {"windows", n},
                {"positives", split.positives},
                {"positive_fraction",
                 n == 0 ? 0.0 : static_cast<double>(split.positives) / static_cast<double>(n)}};
}

int run_prepare(const std::string& config_path, const std::vector<std::string>& overrides) {
    json cfg = load_config_file(config_path);
    apply_overrides(cfg, overrides);
    const DatasetConfig ds = parse_dataset(cfg);

    LoadedData data = load_dataset(ds);
    if (ds.balance) {
        try {
            data.train = pipeline::balance_devices(data.train, ds.balance_seed);
        } catch (const std::invalid_argument& err) {
            throw ConfigError(err.what());
        }
    }
    auto [train_seqs, val_seqs] = pipeline::split_devices(data.train, ds.val_fraction,
                                                          ds.split_seed);
    pipeline::NormalizationStats stats;
    try {
        stats = pipeline::fit_normalizer(train_seqs);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    pipeline::apply_normalizer(stats, train_seqs);
    pipeline::apply_normalizer(stats, val_seqs);
    if (data.has_test) {
        pipeline::apply_normalizer(stats, data.test);
    }

    const std::size_t d = stats.kept.size();
    SplitWindows train_w = window_split(train_seqs, ds.windowing, d, &data.warnings);
    SplitWindows val_w = window_split(val_seqs, ds.windowing, d, &data.warnings);
    SplitWindows test_w;
    if (data.has_test) {
        test_w = window_split(data.test, ds.windowing, d, &data.warnings);
    }
    if (train_w.set.windows.empty()) {
        throw ConfigError("prepare produced no training windows; check windowing config");
    }

    std::vector<std::size_t> dropped;
    for (std::size_t c = 0, k = 0; c < stats.input_width; ++c) {
        if (k < stats.kept.size() && stats.kept[k] == c) {
            ++k;
        } else {
            dropped.push_back(c);
        }
    }

    const std::size_t pool_windows = train_w.set.windows.size() + val_w.set.windows.size();
    const std::size_t pool_positives = train_w.positives + val_w.positives;
    const double pool_fraction =
        pool_windows == 0 ? 0.0
                          : static_cast<double>(pool_positives) / static_cast<double>(pool_windows);

    json summary{{"train", split_summary(train_w)},
                 {"val", split_summary(val_w)},
                 {"feature_width", d},
                 {"dropped_columns", dropped},
                 {"train_pool_positive_fraction", pool_fraction},
                 {"warnings", data.warnings}};
    if (data.has_test) {
        summary["test"] = split_summary(test_w);
    }

    fs::create_directories(ds.prepared_dir);
    const fs::path dir(ds.prepared_dir);
    pipeline::save_windows((dir / "windows_train.csv").string(), train_w.set);
    pipeline::save_windows((dir / "windows_val.csv").string(), val_w.set);
    if (data.has_test) {
        pipeline::save_windows((dir / "windows_test.csv").string(), test_w.set);
    }
    pipeline::save_normalizer((dir / "normalizer.txt").string(), stats);
    write_json_atomic((dir / "prepare_summary.json").string(), summary);
    write_json_atomic((dir / "resolved_config.json").string(), json{{"dataset", dataset_json(ds)}});

    std::cout << "prepared " << ds.kind << " data into " << ds.prepared_dir << "\n"
              << "  train: " << train_w.devices << " devices, " << train_w.set.windows.size()
              << " windows (" << train_w.positives << " positive)\n"
              << "  val:   " << val_w.devices << " devices, " << val_w.set.windows.size()
              << " windows (" << val_w.positives << " positive)\n";
    if (data.has_test) {
        std::cout << "  test:  " << test_w.devices << " devices, " << test_w.set.windows.size()
                  << " windows\n";
    }
    std::cout << "  positive-window fraction (train pool): " << fmt17(pool_fraction * 100.0)
              << "%\n"
              << "  features kept: " << d << "/" << stats.input_width << "\n";
    for (const auto& warning : data.warnings) {
        std::cout << "  note: " << warning << "\n";
    }
    return 0;
}

// ------------------------------------------------------------------ synth --

int run_synth(const std::string& config_path, const std::vector<std::string>& overrides) {
    json cfg = load_config_file(config_path);
    apply_overrides(cfg, overrides);
    const json block = cfg.contains("synth") ? cfg.at("synth") : json::object();
    check_keys(block,
               {"n_train", "n_test", "d", "signal_channels", "a", "b", "k",
                "censor_fraction", "noise_sd", "max_length", "seed"},
               "synth");
    pipeline::SynthConfig sc;
    sc.n_train = get_or<std::size_t>(block, "n_train", sc.n_train);
    sc.n_test = get_or<std::size_t>(block, "n_test", sc.n_test);
    sc.d = get_or<std::size_t>(block, "d", sc.d);
    sc.signal_channels = get_or<std::size_t>(block, "signal_channels", sc.signal_channels);
    sc.a = get_or<double>(block, "a", sc.a);
    sc.b = get_or<double>(block, "b", sc.b);
    sc.k_true = get_or<double>(block, "k", sc.k_true);
    sc.censor_fraction = get_or<double>(block, "censor_fraction", sc.censor_fraction);
    sc.noise_sd = get_or<double>(block, "noise_sd", sc.noise_sd);
    sc.max_length = get_or<std::size_t>(block, "max_length", sc.max_length);
    sc.seed = get_or<std::uint64_t>(block, "seed", sc.seed);
    const std::string out_dir = require<std::string>(cfg, "output_dir", "(root)");
    const std::string stem = get_or<std::string>(cfg, "stem", std::string("synth"));
    try {
        sc.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }

    const pipeline::SynthResult result = pipeline::synth_weibull(sc);
    fs::create_directories(out_dir);
    pipeline::save_synth_sequences(out_dir, stem + "_train", result.train);
    if (!result.test.empty()) {
        pipeline::save_synth_sequences(out_dir, stem + "_test", result.test);
    }
    pipeline::save_synth_truth((fs::path(out_dir) / (stem + "_truth.csv")).string(),
                               result.truth);

    std::size_t censored = 0;
    for (const auto& t : result.truth) {
        if (!t.failed) {
            ++censored;
        }
    }
    const double share = static_cast<double>(censored) / static_cast<double>(result.truth.size());

    json resolved{{"synth",
                   {{"n_train", sc.n_train},
                    {"n_test", sc.n_test},
                    {"d", sc.d},
                    {"signal_channels", sc.signal_channels},
                    {"a", sc.a},
                    {"b", sc.b},
                    {"k", sc.k_true},
                    {"censor_fraction", sc.censor_fraction},
                    {"noise_sd", sc.noise_sd},
                    {"max_length", sc.max_length},
                    {"seed", sc.seed}}},
                  {"stem", stem},
                  {"output_dir", out_dir}};
    write_json_atomic((fs::path(out_dir) / "resolved_config.json").string(), resolved);

    std::cout << "synthesized " << result.truth.size() << " devices (" << result.train.size()
              << " train, " << result.test.size() << " test) into " << out_dir << "\n"
              << "  censored share: " << fmt17(share * 100.0) << "%\n";
    return 0;
}

// ------------------------------------------------------------------ train --

struct RunArtifacts {
    json summary;
    bool diverged = false;
};

json arch_json(const models::ArchitectureSpec& arch) {
    return json{{"kind", models::kind_name(arch.kind)},
                {"input_width", arch.input_width},
                {"window", arch.window},
                {"lstm_units", arch.lstm_units},
                {"trunk_fc", arch.trunk_fc},
                {"rul_head", arch.rul_head},
                {"layout", arch.to_string()}};
}

models::ArchitectureSpec arch_from_json(const json& block) {
    models::ArchitectureSpec arch;
    try {
        arch.kind = models::parse_kind(require<std::string>(block, "kind", "architecture"));
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    arch.input_width = require<std::size_t>(block, "input_width", "architecture");
    arch.window = require<std::size_t>(block, "window", "architecture");
    arch.lstm_units = require<std::size_t>(block, "lstm_units", "architecture");
    arch.trunk_fc = get_or<std::vector<std::size_t>>(block, "trunk_fc", {});
    arch.rul_head = get_or<std::vector<std::size_t>>(block, "rul_head", {});
    try {
        arch.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    return arch;
}

RunArtifacts run_single_training(const models::ArchitectureSpec& arch, const ModelConfig& mc,
                                 const training::TrainConfig& tc, const DatasetConfig& ds,
                                 const pipeline::WindowSet& train_set,
                                 const pipeline::WindowSet& val_set, const std::string& run_dir,
                                 double horizon_raw) {
    fs::create_directories(run_dir);
    const fs::path dir(run_dir);

    diff::ModelParams params = models::init_params(arch, tc.seed);
    RunArtifacts out;
    json phases = json::array();

    training::TrainResult final_result;
    if (arch.kind == models::ModelKind::DeepWeibull) {
        training::TrainConfig pre_cfg = tc;
        pre_cfg.max_epochs = mc.pretrain_max_epochs;
        pre_cfg.patience = mc.pretrain_patience;
        training::TrainResult pre = training::train_phase(
            models::Phase::DwPretrain, arch, std::move(params), train_set.windows,
            val_set.windows, pre_cfg);
        training::write_history_csv((dir / "history_pretrain.csv").string(), pre);
        phases.push_back(json{{"phase", "dw_pretrain"},
                              {"metric", pre.metric_name},
                              {"best_epoch", pre.best_epoch},
                              {"best_metric", pre.best_metric},
                              {"epochs_run", pre.history.size()},
                              {"diverged", pre.diverged}});
        if (pre.diverged) {
            out.diverged = true;
            final_result = std::move(pre);
        } else {
            final_result = training::train_phase(models::Phase::DwNll, arch,
                                                 std::move(pre.params), train_set.windows,
                                                 val_set.windows, tc);
        }
    } else {
        models::Phase phase = models::Phase::MultiTask;
        if (arch.kind == models::ModelKind::FpRnn) {
            phase = models::Phase::FpOnly;
        } else if (arch.kind == models::ModelKind::RulRnn) {
            phase = models::Phase::RulOnly;
        }
        final_result = training::train_phase(phase, arch, std::move(params), train_set.windows,
                                             val_set.windows, tc);
    }
    out.diverged = out.diverged || final_result.diverged;
    training::write_history_csv((dir / "history.csv").string(), final_result);
    diff::save_checkpoint(final_result.params, (dir / "checkpoint.txt").string());
    phases.push_back(json{{"phase", arch.kind == models::ModelKind::DeepWeibull
                                        ? "dw_nll"
                                        : models::kind_name(arch.kind)},
                          {"metric", final_result.metric_name},
                          {"best_epoch", final_result.best_epoch},
                          {"best_metric", final_result.best_metric},
                          {"epochs_run", final_result.history.size()},
                          {"diverged", final_result.diverged}});

    json manifest{{"format", "prog-manifest-v1"},
                  {"model_kind", models::kind_name(arch.kind)},
                  {"architecture", arch_json(arch)},
                  {"windowing", dataset_json(ds).at("windowing")},
                  {"train", train_json(tc, mc)},
                  {"horizon", horizon_raw},
                  {"normalizer", (fs::path(ds.prepared_dir) / "normalizer.txt").string()},
                  {"checkpoint", "checkpoint.txt"},
                  {"phases", phases}};
    write_json_atomic((dir / "manifest.json").string(), manifest);

    out.summary = json{{"seed", tc.seed},
                       {"metric", final_result.metric_name},
                       {"best_metric", final_result.best_metric},
                       {"best_epoch", final_result.best_epoch},
                       {"epochs_run", final_result.history.size()},
                       {"diverged", out.diverged},
                       {"run_dir", run_dir}};
    return out;
}

int run_train(const std::string& config_path, const std::vector<std::string>& overrides) {
    json cfg = load_config_file(config_path);
    apply_overrides(cfg, overrides);
    const DatasetConfig ds = parse_dataset(cfg);
    const ModelConfig mc = parse_model(cfg);
    const EvalConfig ec = parse_eval(cfg);
    const std::string out_dir = require<std::string>(cfg, "output_dir", "(root)");

    if (mc.kind == models::ModelKind::DeepWeibull && !mc.pretrain_enabled) {
        throw ConfigError(
            "Deep Weibull training requires the RUL pre-training phase; "
            "set model.train.pretrain.enabled = true (the likelihood phase "
            "expects a pre-trained network)");
    }

    const fs::path prep(ds.prepared_dir);
    pipeline::WindowSet train_set;
    pipeline::WindowSet val_set;
    try {
        train_set = pipeline::load_windows((prep / "windows_train.csv").string());
        val_set = pipeline::load_windows((prep / "windows_val.csv").string());
    } catch (const std::exception& err) {
        throw ConfigError(std::string("loading prepared windows: ") + err.what());
    }
    if (val_set.w != train_set.w || val_set.d != train_set.d) {
        throw ConfigError("train/val window files disagree on shape");
    }

    models::ArchitectureSpec arch;
    arch.kind = mc.kind;
    arch.input_width = train_set.d;
    arch.window = train_set.w;
    arch.lstm_units = mc.lstm_units;
    arch.trunk_fc = mc.trunk_fc;
    arch.rul_head = mc.rul_head;
    try {
        arch.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }

    const double w = static_cast<double>(ds.windowing.w);
    const double horizon_raw =
        ec.horizon_raw > 0.0 ? ec.horizon_raw : ds.windowing.tau_f + ds.windowing.tau_e;
    training::TrainConfig base_tc = mc.train;
    base_tc.horizon = horizon_raw / w;
    base_tc.max_rul = ds.windowing.max_rul / w;
    try {
        base_tc.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }

    fs::create_directories(out_dir);
    json resolved{{"dataset", dataset_json(ds)},
                  {"model", model_json(mc)},
                  {"evaluation", eval_json(ec, horizon_raw)},
                  {"output_dir", out_dir},
                  {"repeat", mc.repeat}};
    write_json_atomic((fs::path(out_dir) / "resolved_config.json").string(), resolved);

    json runs = json::array();
    std::vector<double> metrics_seen;
    bool any_diverged = false;
    std::string metric_name;
    for (std::size_t r = 0; r < mc.repeat; ++r) {
        training::TrainConfig tc = base_tc;
        tc.seed = base_tc.seed + r;  // derived repeat seeds
        const std::string run_dir =
            mc.repeat == 1 ? out_dir
                           : (fs::path(out_dir) / ("run_" + std::to_string(r))).string();
        RunArtifacts art;
        try {
            art = run_single_training(arch, mc, tc, ds, train_set, val_set, run_dir,
                                      horizon_raw);
        } catch (const std::invalid_argument& err) {
            throw ConfigError(err.what());
        }
        any_diverged = any_diverged || art.diverged;
        metric_name = art.summary.at("metric").get<std::string>();
        metrics_seen.push_back(art.summary.at("best_metric").get<double>());
        runs.push_back(art.summary);
        std::cout << "run " << r << ": best " << metric_name << " = "
                  << fmt17(metrics_seen.back()) << " (epoch "
                  << art.summary.at("best_epoch").get<std::size_t>() << ")"
                  << (art.diverged ? " [diverged]" : "") << "\n";
    }

    double mean = 0.0;
    for (double v : metrics_seen) {
        mean += v;
    }
    mean /= static_cast<double>(metrics_seen.size());
    double sd = 0.0;
    if (metrics_seen.size() > 1) {
        for (double v : metrics_seen) {
            sd += (v - mean) * (v - mean);
        }
        sd = std::sqrt(sd / static_cast<double>(metrics_seen.size() - 1));
    }
    json summary{{"metric", metric_name},
                 {"runs", runs},
                 {"mean", mean},
                 {"stddev", sd},
                 {"diverged", any_diverged}};
    write_json_atomic((fs::path(out_dir) / "summary.json").string(), summary);
    std::cout << "summary: mean " << metric_name << " = " << fmt17(mean) << " +- " << fmt17(sd)
              << " over " << metrics_seen.size() << " run(s)\n";
    if (any_diverged) {
        std::cerr << "training diverged; last good checkpoint retained\n";
        return 1;
    }
    return 0;
}

// --------------------------------------------------------------- evaluate --

json load_manifest(const std::string& checkpoint_dir) {
    const fs::path dir(checkpoint_dir);
    const std::string path = (dir / "manifest.json").string();
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open manifest " + path);
    }
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& err) {
        throw ConfigError(path + ": " + err.what());
    }
}

pipeline::WindowingConfig windowing_from_manifest(const json& manifest) {
    if (!manifest.contains("windowing")) {
        throw ConfigError("manifest has no windowing block");
    }
    const json& win = manifest.at("windowing");
    pipeline::WindowingConfig wcfg;
    wcfg.w = require<std::size_t>(win, "w", "manifest.windowing");
    wcfg.stride = require<std::size_t>(win, "stride", "manifest.windowing");
    wcfg.tau_f = require<double>(win, "tau_f", "manifest.windowing");
    wcfg.tau_e = require<double>(win, "tau_e", "manifest.windowing");
    wcfg.max_rul = require<double>(win, "max_rul", "manifest.windowing");
    try {
        wcfg.validate();
    } catch (const std::exception& err) {
        throw ConfigError(std::string("manifest windowing: ") + err.what());
    }
    return wcfg;
}

double resolve_horizon(const EvalConfig& ec, const json& manifest,
                       const pipeline::WindowingConfig& wcfg) {
    if (ec.horizon_raw > 0.0) {
        return ec.horizon_raw;
    }
    if (manifest.contains("horizon")) {
        return manifest.at("horizon").get<double>();
    }
    return wcfg.tau_f + wcfg.tau_e;
}

void write_curve_csv(const std::string& path, const metrics::Curve& curve, const char* xname,
                     const char* yname) {
    std::ostringstream os;
    os << xname << ',' << yname << ",threshold\n";
    for (const auto& pt : curve.points) {
        os << fmt17(pt.x) << ',' << fmt17(pt.y) << ',' << fmt17(pt.threshold) << "\n";
    }
    write_text_atomic(path, os.str());
}

void write_confusion_csv(const std::string& path, const metrics::ConfusionMatrix& cm) {
    std::ostringstream os;
    os << "edges";
    for (double e : cm.edges) {
        os << ',' << fmt17(e);
    }
    os << "\n";
    for (std::size_t r = 0; r < cm.counts.size(); ++r) {
        os << "row" << r;
        for (std::size_t c = 0; c < cm.counts[r].size(); ++c) {
            os << ',' << cm.counts[r][c];
        }
        os << "\n";
    }
    os << "clipped," << cm.clipped << "\n";
    write_text_atomic(path, os.str());
}

int run_evaluate(const std::string& config_path, const std::vector<std::string>& overrides,
                 const std::string& checkpoint_dir_arg) {
    json cfg = load_config_file(config_path);
    apply_overrides(cfg, overrides);
    const EvalConfig ec = parse_eval(cfg);
    const std::string ckpt_dir = !checkpoint_dir_arg.empty()
                                     ? checkpoint_dir_arg
                                     : get_or<std::string>(cfg, "checkpoint_dir", std::string());
    if (ckpt_dir.empty()) {
        throw ConfigError("no checkpoint directory given (argument or checkpoint_dir key)");
    }

    const json manifest = load_manifest(ckpt_dir);
    const models::ArchitectureSpec arch = arch_from_json(manifest.at("architecture"));
    const pipeline::WindowingConfig wcfg = windowing_from_manifest(manifest);
    diff::ModelParams params;
    try {
        params = diff::load_checkpoint(
            (fs::path(ckpt_dir) / manifest.at("checkpoint").get<std::string>()).string());
    } catch (const std::exception& err) {
        throw ConfigError(std::string("loading checkpoint: ") + err.what());
    }

    std::string windows_path = ec.windows_path;
    if (windows_path.empty()) {
        if (!cfg.contains("dataset")) {
            throw ConfigError("no windows file: set evaluation.windows or a dataset block");
        }
        const DatasetConfig ds = parse_dataset(cfg);
        windows_path = (fs::path(ds.prepared_dir) / "windows_test.csv").string();
    }
    pipeline::WindowSet wset;
    try {
        wset = pipeline::load_windows(windows_path);
    } catch (const std::exception& err) {
        throw ConfigError(std::string("loading windows: ") + err.what());
    }
    if (wset.w != arch.window || wset.d != arch.input_width) {
        throw ConfigError("architecture/manifest mismatch: windows are w=" +
                          std::to_string(wset.w) + " d=" + std::to_string(wset.d) +
                          " but the checkpoint expects w=" + std::to_string(arch.window) +
                          " d=" + std::to_string(arch.input_width));
    }
    if (wset.windows.empty()) {
        throw ConfigError("no windows to evaluate in " + windows_path);
    }

    const double w = static_cast<double>(wcfg.w);
    const double horizon_raw = resolve_horizon(ec, manifest, wcfg);
    const double max_rul_wu = wcfg.max_rul / w;

    const auto records =
        models::predict(arch, params, wset.windows, horizon_raw / w, max_rul_wu);

    metrics::EvalReport report;
    metrics::Curve roc;
    metrics::Curve pr;
    const bool model_has_rul = !records.empty() && records.front().has_rul;
    const bool model_has_fp = !records.empty() && records.front().has_fp;

    std::vector<double> rul_pred_raw;
    std::vector<double> rul_truth_raw;
    std::vector<metrics::ScoredLabel> scored;
    std::vector<double> fp_scores;
    std::vector<double> rul_preds_wu;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& win = wset.windows[i];
        const auto& rec = records[i];
        if (model_has_rul && win.has_rul) {
            rul_pred_raw.push_back(rec.rul_hat * w);
            rul_truth_raw.push_back(win.rul_target * w);
        }
        if (model_has_fp) {
            scored.push_back({rec.fp_prob, win.fp_label});
        }
        if (model_has_fp && model_has_rul) {
            fp_scores.push_back(rec.fp_prob);
            rul_preds_wu.push_back(rec.rul_hat);
        }
    }

    try {
        if (model_has_rul && !rul_pred_raw.empty()) {
            report.has_rul = true;
            report.rmse = metrics::rmse(rul_pred_raw, rul_truth_raw);
        }
        if (model_has_fp) {
            roc = metrics::roc_auc(scored);
            pr = metrics::pr_auc(scored);
            report.auc_roc = roc.area;
            report.auc_pr = pr.area;
        }
        if (!fp_scores.empty()) {
            report.has_spearman = true;
            report.spearman_consistency = metrics::spearman(fp_scores, rul_preds_wu);
        }
        if (report.has_rul) {
            std::vector<double> edges;
            for (std::size_t b = 0; b <= ec.confusion_bins; ++b) {
                edges.push_back(wcfg.max_rul * static_cast<double>(b) /
                                static_cast<double>(ec.confusion_bins));
            }
            report.confusion = metrics::rul_confusion(rul_pred_raw, rul_truth_raw, edges);
        }
    } catch (const std::invalid_argument& err) {
        throw ComputeError(std::string("metric computation: ") + err.what());
    }

    const std::string out_dir = !ec.output_dir.empty() ? ec.output_dir : ckpt_dir;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_text_atomic((dir / "eval_report.json").string(), metrics::to_json(report));
    if (model_has_fp) {
        write_curve_csv((dir / "roc_curve.csv").string(), roc, "fpr", "tpr");
        write_curve_csv((dir / "pr_curve.csv").string(), pr, "recall", "precision");
    }
    if (report.has_rul) {
        write_confusion_csv((dir / "confusion.csv").string(), report.confusion);
    }
    std::cout << metrics::to_json(report);
    return 0;
}

// ---------------------------------------------------------------- predict --

int run_predict(const std::string& config_path, const std::vector<std::string>& overrides,
                const std::string& checkpoint_dir, const std::string& windows_path,
                const std::string& output_path) {
    json cfg = load_config_file(config_path);
    apply_overrides(cfg, overrides);
    const EvalConfig ec = parse_eval(cfg);
    if (checkpoint_dir.empty() || windows_path.empty() || output_path.empty()) {
        throw ConfigError("predict needs a checkpoint directory, a windows file and an output");
    }
    const json manifest = load_manifest(checkpoint_dir);
    const models::ArchitectureSpec arch = arch_from_json(manifest.at("architecture"));
    const pipeline::WindowingConfig wcfg = windowing_from_manifest(manifest);
    diff::ModelParams params;
    try {
        params = diff::load_checkpoint(
            (fs::path(checkpoint_dir) / manifest.at("checkpoint").get<std::string>()).string());
    } catch (const std::exception& err) {
        throw ConfigError(std::string("loading checkpoint: ") + err.what());
    }
    pipeline::WindowSet wset;
    try {
        wset = pipeline::load_windows(windows_path);
    } catch (const std::exception& err) {
        throw ConfigError(std::string("loading windows: ") + err.what());
    }
    if (wset.w != arch.window || wset.d != arch.input_width) {
        throw ConfigError("window file shape does not match the checkpoint architecture");
    }

    const double w = static_cast<double>(wcfg.w);
    const double horizon_raw = resolve_horizon(ec, manifest, wcfg);
    const auto records = models::predict(arch, params, wset.windows, horizon_raw / w,
                                         wcfg.max_rul / w);

    // The network works in window units; the CSV reports RUL and the Weibull
    // scale in the time base of the input data (cycles or days). k is a shape
    // parameter and carries no unit.
    std::ostringstream os;
    os << "device_id,end_time,fp_prob,rul_hat,rul_raw,lambda,k\n";
    for (const auto& rec : records) {
        os << rec.device_id << ',' << rec.end_time << ','
           << (rec.has_fp ? fmt17(rec.fp_prob) : "") << ','
           << (rec.has_rul ? fmt17(rec.rul_hat * w) : "") << ','
           << (rec.has_rul ? fmt17(rec.rul_raw * w) : "") << ','
           << (rec.has_weibull ? fmt17(rec.wb.lambda * w) : "") << ','
           << (rec.has_weibull ? fmt17(rec.wb.k) : "") << "\n";
    }
    if (const fs::path parent = fs::path(output_path).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
    write_text_atomic(output_path, os.str());
    std::cout << "wrote " << records.size() << " prediction rows to " << output_path << "\n";
    return 0;
}

// -------------------------------------------------------------- gradcheck --

int run_gradcheck(const std::string& config_path, const std::vector<std::string>& overrides) {
    json cfg = json::object();
    if (!config_path.empty()) {
        cfg = load_config_file(config_path);
    }
    apply_overrides(cfg, overrides);
    const double epsilon = get_or<double>(cfg, "epsilon", 1e-5);
    const double tolerance = get_or<double>(cfg, "tolerance", 1e-5);
    const bool corrupt_hook = get_or<bool>(cfg, "corrupt_hook", false);

    const auto cases = run_gradcheck_suite(epsilon, tolerance, corrupt_hook);
    bool all_pass = true;
    for (const auto& c : cases) {
        std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name
                  << "  max_rel_error=" << fmt17(c.result.max_rel_error) << "  (worst "
                  << c.result.worst_param << "[" << c.result.worst_index
                  << "]: analytic=" << fmt17(c.result.analytic)
                  << " numeric=" << fmt17(c.result.numeric) << ")\n";
        all_pass = all_pass && c.pass;
    }
    std::cout << (all_pass ? "gradcheck: all checks passed\n"
                           : "gradcheck: FAILURES detected\n");
    return all_pass ? 0 : 1;
}

}  // namespace

// Public wrappers: map error classes onto exit codes.

namespace {

template <typename Fn>
int guard(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& err) {
        std::cerr << what << ": " << err.what() << "\n";
        return 2;
    } catch (const ComputeError& err) {
        std::cerr << what << ": " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << what << ": " << err.what() << "\n";
        return 1;
    }
}

}  // namespace

int cmd_prepare(const std::string& config_path, const std::vector<std::string>& overrides) {
    return guard("prepare", [&] { return run_prepare(config_path, overrides); });
}

int cmd_synth(const std::string& config_path, const std::vector<std::string>& overrides) {
    return guard("synth", [&] { return run_synth(config_path, overrides); });
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides) {
    return guard("train", [&] { return run_train(config_path, overrides); });
}

int cmd_evaluate(const std::string& config_path, const std::vector<std::string>& overrides,
                 const std::string& checkpoint_dir) {
    return guard("evaluate",
                 [&] { return run_evaluate(config_path, overrides, checkpoint_dir); });
}

int cmd_predict(const std::string& config_path, const std::vector<std::string>& overrides,
                const std::string& checkpoint_dir, const std::string& windows_path,
                const std::string& output_path) {
    return guard("predict", [&] {
        return run_predict(config_path, overrides, checkpoint_dir, windows_path, output_path);
    });
}

int cmd_gradcheck(const std::string& config_path, const std::vector<std::string>& overrides) {
    return guard("gradcheck", [&] { return run_gradcheck(config_path, overrides); });
}

}  // namespace prog::commands
