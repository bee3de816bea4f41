#include "prog/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace prog::pipeline {

namespace {

double parse_double(const std::string& token, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) {
            throw std::invalid_argument("trailing junk");
        }
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(where + ": cannot parse number '" + token + "'");
    }
}

long parse_long(const std::string& token, const std::string& where) {
    try {
        std::size_t used = 0;
        const long v = std::stol(token, &used);
        if (used != token.size()) {
            throw std::invalid_argument("trailing junk");
        }
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(where + ": cannot parse integer '" + token + "'");
    }
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        out.push_back(tok);
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void WindowingConfig::validate() const {
    if (w < 1) {
        throw std::invalid_argument("windowing: w must be >= 1");
    }
    if (stride < 1) {
        throw std::invalid_argument("windowing: stride must be >= 1");
    }
    if (tau_f < 0.0) {
        throw std::invalid_argument("windowing: tau_f must be >= 0");
    }
    if (!(tau_e > 0.0)) {
        throw std::invalid_argument("windowing: tau_e must be > 0");
    }
    if (!(max_rul > tau_f + tau_e)) {
        throw std::invalid_argument("windowing: max_rul must exceed tau_f + tau_e");
    }
}

CmapssData load_cmapss(const std::string& dir, const std::string& subset) {
    namespace fs = std::filesystem;
    auto load_split = [&](const std::string& file, bool failed,
                          const std::string& tag) -> std::vector<SensorSequence> {
        const std::string path = (fs::path(dir) / file).string();
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error("cannot open " + path);
        }
        // unit ids are small positive integers; a map keeps them sorted.
        std::map<long, std::vector<std::vector<double>>> units;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string where = file + ":" + std::to_string(lineno);
            const auto toks = split_ws(line);
            if (toks.empty()) {
                continue;
            }
            if (toks.size() != 26) {
                throw std::runtime_error(where + ": expected 26 columns, got " +
                                         std::to_string(toks.size()));
            }
            const long unit = parse_long(toks[0], where);
            const long cycle = parse_long(toks[1], where);
            if (unit < 1) {
                throw std::runtime_error(where + ": unit id must be positive");
            }
            auto& rows = units[unit];
            if (cycle != static_cast<long>(rows.size()) + 1) {
                throw std::runtime_error(where + ": cycle " + std::to_string(cycle) +
                                         " breaks the gap-free 1..n order for unit " +
                                         std::to_string(unit));
            }
            std::vector<double> feat(24);
            for (std::size_t c = 0; c < 24; ++c) {
                feat[c] = parse_double(toks[c + 2], where);
            }
            rows.push_back(std::move(feat));
        }
        std::vector<SensorSequence> out;
        out.reserve(units.size());
        for (auto& [unit, rows] : units) {
            SensorSequence seq;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%s_%s_%03ld", subset.c_str(), tag.c_str(), unit);
            seq.device_id = buf;
            seq.censor_time = rows.size();
            seq.failed = failed;
            if (failed) {
                seq.failure_time = seq.censor_time;
            }
            seq.observations = std::move(rows);
            out.push_back(std::move(seq));
        }
        return out;
    };

    CmapssData data;
    data.train = load_split("train_" + subset + ".txt", true, "train");
    data.test = load_split("test_" + subset + ".txt", false, "test");

    const std::string rul_path = (fs::path(dir) / ("RUL_" + subset + ".txt")).string();
    std::ifstream rul_in(rul_path);
    if (!rul_in) {
        throw std::runtime_error("cannot open " + rul_path);
    }
    std::vector<double> ruls;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(rul_in, line)) {
        ++lineno;
        const auto toks = split_ws(line);
        if (toks.empty()) {
            continue;
        }
        if (toks.size() != 1) {
            throw std::runtime_error("RUL_" + subset + ".txt:" + std::to_string(lineno) +
                                     ": expected one value per line");
        }
        ruls.push_back(parse_double(toks[0], "RUL_" + subset + ".txt:" + std::to_string(lineno)));
    }
    if (ruls.size() != data.test.size()) {
        throw std::runtime_error("RUL_" + subset + ".txt lists " + std::to_string(ruls.size()) +
                                 " values for " + std::to_string(data.test.size()) +
                                 " test units");
    }
    for (std::size_t i = 0; i < ruls.size(); ++i) {
        if (ruls[i] < 0.0) {
            throw std::runtime_error("RUL_" + subset + ".txt: negative residual life");
        }
        data.test[i].residual_truth = ruls[i];
    }
    return data;
}

const std::vector<std::string>& default_smart_columns() {
    // 13 attribute pairs (raw + normalized) = 26 features.
    static const std::vector<std::string> cols = {
        "smart_1_normalized",   "smart_1_raw",   "smart_5_normalized",   "smart_5_raw",
        "smart_7_normalized",   "smart_7_raw",   "smart_9_normalized",   "smart_9_raw",
        "smart_12_normalized",  "smart_12_raw",  "smart_187_normalized", "smart_187_raw",
        "smart_188_normalized", "smart_188_raw", "smart_193_normalized", "smart_193_raw",
        "smart_194_normalized", "smart_194_raw", "smart_197_normalized", "smart_197_raw",
        "smart_198_normalized", "smart_198_raw", "smart_199_normalized", "smart_199_raw",
        "smart_241_normalized", "smart_241_raw"};
    return cols;
}

std::vector<SensorSequence> load_backblaze(const std::string& dir, const std::string& model,
                                           const std::vector<std::string>& smart_columns,
                                           std::vector<std::string>* warnings) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            files.push_back(entry.path().string());
        }
    }
    if (files.empty()) {
        throw std::runtime_error("load_backblaze: no csv files under " + dir);
    }
    std::sort(files.begin(), files.end());  // YYYY-MM-DD names sort by date

    struct Device {
        std::size_t first_day = 0;  // global day index of first row
        std::size_t last_day = 0;   // global day index of last accepted row
        bool failed = false;
        bool closed = false;  // stopped extending (failure or a day gap)
        std::vector<std::vector<double>> rows;
    };
    const std::size_t d = smart_columns.size();
    std::unordered_map<std::string, Device> devices;
    std::vector<std::string> serial_order;

    for (std::size_t day = 0; day < files.size(); ++day) {
        std::ifstream in(files[day]);
        if (!in) {
            throw std::runtime_error("cannot open " + files[day]);
        }
        const std::string base = fs::path(files[day]).filename().string();
        std::string line;
        if (!std::getline(in, line)) {
            throw std::runtime_error(base + ": empty file");
        }
        const auto header = split_csv(line);
        std::unordered_map<std::string, std::size_t> col;
        for (std::size_t i = 0; i < header.size(); ++i) {
            col[header[i]] = i;
        }
        for (const char* req : {"date", "serial_number", "model", "failure"}) {
            if (!col.count(req)) {
                throw std::runtime_error(base + ": missing required column " + std::string(req));
            }
        }
        std::vector<long> feat_idx(d, -1);
        for (std::size_t f = 0; f < d; ++f) {
            auto it = col.find(smart_columns[f]);
            feat_idx[f] = it == col.end() ? -1 : static_cast<long>(it->second);
        }
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) {
                continue;
            }
            const auto toks = split_csv(line);
            if (toks.size() < header.size()) {
                throw std::runtime_error(base + ":" + std::to_string(lineno) +
                                         ": expected " + std::to_string(header.size()) +
                                         " columns, got " + std::to_string(toks.size()));
            }
            if (toks[col["model"]] != model) {
                continue;
            }
            const std::string& serial = toks[col["serial_number"]];
            auto [it, inserted] = devices.try_emplace(serial);
            Device& dev = it->second;
            if (inserted) {
                serial_order.push_back(serial);
                dev.first_day = day;
                dev.last_day = day;  // adjusted below
            } else {
                if (day <= dev.last_day) {
                    throw std::runtime_error(base + ":" + std::to_string(lineno) +
                                             ": non-monotone date for serial " + serial);
                }
                if (dev.closed) {
                    continue;  // rows after failure or after a gap are ignored
                }
                if (day != dev.last_day + 1) {
                    // A missing day would be interval censoring; keep the
                    // contiguous prefix and right-censor there.
                    dev.closed = true;
                    if (warnings) {
                        warnings->push_back("serial " + serial + ": day gap before " + base +
                                            "; sequence truncated");
                    }
                    continue;
                }
            }
            dev.last_day = day;
            std::vector<double> row(d, std::nan(""));
            for (std::size_t f = 0; f < d; ++f) {
                if (feat_idx[f] >= 0) {
                    const std::string& tok = toks[static_cast<std::size_t>(feat_idx[f])];
                    if (!tok.empty()) {
                        row[f] = parse_double(tok, base + ":" + std::to_string(lineno));
                    }
                }
                if (std::isnan(row[f]) && !dev.rows.empty()) {
                    row[f] = dev.rows.back()[f];  // forward fill
                }
            }
            dev.rows.push_back(std::move(row));
            const std::string& flag = toks[col["failure"]];
            if (flag == "1") {
                dev.failed = true;
                dev.closed = true;
            } else if (flag != "0" && !flag.empty()) {
                throw std::runtime_error(base + ":" + std::to_string(lineno) +
                                         ": failure flag must be 0 or 1");
            }
        }
    }

    std::vector<SensorSequence> out;
    out.reserve(serial_order.size());
    for (const auto& serial : serial_order) {
        Device& dev = devices[serial];
        SensorSequence seq;
        seq.device_id = serial;
        seq.censor_time = dev.rows.size();
        seq.failed = dev.failed;
        if (dev.failed) {
            seq.failure_time = seq.censor_time;
        }
        seq.observations = std::move(dev.rows);
        out.push_back(std::move(seq));
    }
    if (out.empty() && warnings) {
        warnings->push_back("model filter '" + model + "' matched no rows");
    }
    return out;
}

double cap_rul(double remaining, double max_rul) {
    if (remaining < 0.0) {
        throw std::invalid_argument("cap_rul: negative remaining life");
    }
    return std::min(remaining, max_rul);
}

std::vector<Window> make_windows(const SensorSequence& seq, const WindowingConfig& cfg,
                                 std::vector<std::string>* warnings) {
    cfg.validate();
    std::vector<Window> out;
    if (seq.censor_time < cfg.w) {
        if (warnings) {
            warnings->push_back("device " + seq.device_id + ": only " +
                                std::to_string(seq.censor_time) + " observations for window " +
                                std::to_string(cfg.w) + "; skipped");
        }
        return out;
    }
    if (seq.observations.size() != seq.censor_time) {
        throw std::invalid_argument("device " + seq.device_id +
                                    ": observation count does not match censor_time");
    }
    // Test devices with ground-truth residual life behave like devices failing
    // at the virtual time c_p + residual, which places every window on the
    // same label geometry the training split uses.
    const bool as_failed = seq.failed || seq.has_residual_truth();
    const double fail_time = seq.failed
                                 ? static_cast<double>(seq.failure_time)
                                 : static_cast<double>(seq.censor_time) + seq.residual_truth;
    const double w = static_cast<double>(cfg.w);
    const std::size_t dim = seq.observations.front().size();
    for (std::size_t t = cfg.w; t <= seq.censor_time; t += cfg.stride) {
        Window win;
        win.device_id = seq.device_id;
        win.end_time = t;
        if (as_failed) {
            const double remaining = fail_time - static_cast<double>(t);
            if (remaining < cfg.tau_f) {
                continue;  // filter region
            }
            win.fp_label = remaining < cfg.tau_f + cfg.tau_e ? 1 : 0;
            win.has_rul = true;
            win.rul_target = cap_rul(remaining, cfg.max_rul) / w;
        } else {
            win.censored = true;
            win.censor_remaining = static_cast<double>(seq.censor_time - t) / w;
        }
        win.values.resize(cfg.w * dim);
        for (std::size_t r = 0; r < cfg.w; ++r) {
            const auto& obs = seq.observations[t - cfg.w + r];
            if (obs.size() != dim) {
                throw std::invalid_argument("device " + seq.device_id + ": ragged observations");
            }
            std::copy(obs.begin(), obs.end(), win.values.begin() + static_cast<long>(r * dim));
        }
        out.push_back(std::move(win));
    }
    return out;
}

NormalizationStats fit_normalizer(const std::vector<SensorSequence>& train) {
    if (train.empty()) {
        throw std::invalid_argument("fit_normalizer: empty training set");
    }
    const std::size_t d = train.front().observations.empty()
                              ? 0
                              : train.front().observations.front().size();
    if (d == 0) {
        throw std::invalid_argument("fit_normalizer: no features");
    }
    std::vector<double> sum(d, 0.0);
    std::vector<std::size_t> count(d, 0);
    for (const auto& seq : train) {
        for (const auto& row : seq.observations) {
            if (row.size() != d) {
                throw std::invalid_argument("fit_normalizer: inconsistent feature width");
            }
            for (std::size_t c = 0; c < d; ++c) {
                if (!std::isnan(row[c])) {
                    sum[c] += row[c];
                    ++count[c];
                }
            }
        }
    }
    std::vector<double> mean(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        if (count[c] > 0) {
            mean[c] = sum[c] / static_cast<double>(count[c]);
        }
    }
    std::vector<double> ssd(d, 0.0);
    for (const auto& seq : train) {
        for (const auto& row : seq.observations) {
            for (std::size_t c = 0; c < d; ++c) {
                if (!std::isnan(row[c])) {
                    const double dv = row[c] - mean[c];
                    ssd[c] += dv * dv;
                }
            }
        }
    }
    NormalizationStats stats;
    stats.input_width = d;
    for (std::size_t c = 0; c < d; ++c) {
        if (count[c] == 0) {
            continue;  // all-missing column: drop
        }
        const double var = ssd[c] / static_cast<double>(count[c]);
        const double sd = std::sqrt(var);
        // Constant column: drop. The relative term absorbs the accumulation
        // rounding a large-magnitude constant leaves behind in the two-pass
        // moments (a column of 518.67 repeated ends up with sd ~ 1e-11).
        if (sd <= 1e-12 || sd <= 1e-9 * std::abs(mean[c])) {
            continue;
        }
        stats.kept.push_back(c);
        stats.mean.push_back(mean[c]);
        stats.stdev.push_back(sd);
    }
    if (stats.kept.empty()) {
        throw std::invalid_argument("fit_normalizer: every feature is constant");
    }
    return stats;
}

void apply_normalizer(const NormalizationStats& stats, std::vector<SensorSequence>& seqs) {
    for (auto& seq : seqs) {
        for (auto& row : seq.observations) {
            if (row.size() != stats.input_width) {
                throw std::invalid_argument("apply_normalizer: width mismatch for device " +
                                            seq.device_id);
            }
            std::vector<double> out(stats.kept.size());
            for (std::size_t i = 0; i < stats.kept.size(); ++i) {
                const double v = row[stats.kept[i]];
                out[i] = std::isnan(v) ? 0.0 : (v - stats.mean[i]) / stats.stdev[i];
            }
            row = std::move(out);
        }
    }
}

std::vector<SensorSequence> balance_devices(const std::vector<SensorSequence>& devices,
                                            std::uint64_t seed) {
    std::vector<std::size_t> failed;
    std::vector<std::size_t> other;
    for (std::size_t i = 0; i < devices.size(); ++i) {
        (devices[i].failed ? failed : other).push_back(i);
    }
    if (failed.empty()) {
        throw std::invalid_argument("balance_devices: no failed devices");
    }
    std::vector<bool> keep(devices.size(), false);
    for (std::size_t i : failed) {
        keep[i] = true;
    }
    if (other.size() <= failed.size()) {
        for (std::size_t i : other) {
            keep[i] = true;
        }
    } else {
        std::mt19937_64 rng(seed);
        std::shuffle(other.begin(), other.end(), rng);
        for (std::size_t j = 0; j < failed.size(); ++j) {
            keep[other[j]] = true;
        }
    }
    std::vector<SensorSequence> out;
    for (std::size_t i = 0; i < devices.size(); ++i) {
        if (keep[i]) {
            out.push_back(devices[i]);
        }
    }
    return out;
}

std::pair<std::vector<SensorSequence>, std::vector<SensorSequence>> split_devices(
    const std::vector<SensorSequence>& devices, double val_fraction, std::uint64_t seed) {
    if (val_fraction < 0.0 || val_fraction >= 1.0) {
        throw std::invalid_argument("split_devices: val_fraction must be in [0,1)");
    }
    std::vector<std::size_t> order(devices.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t n_val = static_cast<std::size_t>(
        std::floor(val_fraction * static_cast<double>(devices.size()) + 0.5));
    if (val_fraction > 0.0 && n_val == 0 && devices.size() >= 2) {
        n_val = 1;
    }
    if (n_val >= devices.size() && !devices.empty()) {
        n_val = devices.size() - 1;
    }
    std::vector<bool> in_val(devices.size(), false);
    for (std::size_t j = 0; j < n_val; ++j) {
        in_val[order[j]] = true;
    }
    std::pair<std::vector<SensorSequence>, std::vector<SensorSequence>> out;
    for (std::size_t i = 0; i < devices.size(); ++i) {
        (in_val[i] ? out.second : out.first).push_back(devices[i]);
    }
    return out;
}

void save_windows(const std::string& path, const WindowSet& set) {
    std::ofstream outf(path);
    if (!outf) {
        throw std::runtime_error("cannot write " + path);
    }
    outf << "# prog-windows v1 w=" << set.w << " d=" << set.d << " n=" << set.windows.size()
         << "\n";
    outf << "device_id,end_time,f,rul_target,censored,censor_remaining";
    for (std::size_t i = 0; i < set.w * set.d; ++i) {
        outf << ",x" << i;
    }
    outf << "\n";
    for (const auto& win : set.windows) {
        if (win.values.size() != set.w * set.d) {
            throw std::invalid_argument("save_windows: window size mismatch");
        }
        outf << win.device_id << ',' << win.end_time << ',' << win.fp_label << ','
             << (win.has_rul ? fmt17(win.rul_target) : "") << ',' << (win.censored ? 1 : 0) << ','
             << (win.censored ? fmt17(win.censor_remaining) : "");
        for (double v : win.values) {
            outf << ',' << fmt17(v);
        }
        outf << "\n";
    }
    if (!outf) {
        throw std::runtime_error("write failed for " + path);
    }
}

WindowSet load_windows(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": empty file");
    }
    WindowSet set;
    {
        std::istringstream is(line);
        std::string tag;
        is >> tag;  // '#'
        is >> tag;  // 'prog-windows'
        if (tag != "prog-windows") {
            throw std::runtime_error(path + ": not a window file");
        }
        std::string version;
        is >> version;
        if (version != "v1") {
            throw std::runtime_error(path + ": unsupported version " + version);
        }
        std::string kv;
        while (is >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                continue;
            }
            const std::string key = kv.substr(0, eq);
            const long value = parse_long(kv.substr(eq + 1), path + " header");
            if (key == "w") {
                set.w = static_cast<std::size_t>(value);
            } else if (key == "d") {
                set.d = static_cast<std::size_t>(value);
            }
        }
    }
    if (set.w == 0 || set.d == 0) {
        throw std::runtime_error(path + ": header missing w/d");
    }
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": missing column header");
    }
    const std::size_t expected = 6 + set.w * set.d;
    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto toks = split_csv(line);
        const std::string where = path + ":" + std::to_string(lineno);
        if (toks.size() != expected) {
            throw std::runtime_error(where + ": expected " + std::to_string(expected) +
                                     " columns, got " + std::to_string(toks.size()));
        }
        Window win;
        win.device_id = toks[0];
        win.end_time = static_cast<std::size_t>(parse_long(toks[1], where));
        win.fp_label = static_cast<int>(parse_long(toks[2], where));
        if (!toks[3].empty()) {
            win.has_rul = true;
            win.rul_target = parse_double(toks[3], where);
        }
        win.censored = parse_long(toks[4], where) != 0;
        if (!toks[5].empty()) {
            win.censor_remaining = parse_double(toks[5], where);
        }
        win.values.resize(set.w * set.d);
        for (std::size_t i = 0; i < win.values.size(); ++i) {
            win.values[i] = parse_double(toks[6 + i], where);
        }
        set.windows.push_back(std::move(win));
    }
    return set;
}

void save_normalizer(const std::string& path, const NormalizationStats& stats) {
    std::ofstream outf(path);
    if (!outf) {
        throw std::runtime_error("cannot write " + path);
    }
    outf << "# prog-normalizer v1 input_width=" << stats.input_width
         << " kept=" << stats.kept.size() << "\n";
    outf << "column,mean,stdev\n";
    for (std::size_t i = 0; i < stats.kept.size(); ++i) {
        outf << stats.kept[i] << ',' << fmt17(stats.mean[i]) << ',' << fmt17(stats.stdev[i])
             << "\n";
    }
    if (!outf) {
        throw std::runtime_error("write failed for " + path);
    }
}

NormalizationStats load_normalizer(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": empty file");
    }
    NormalizationStats stats;
    {
        std::istringstream is(line);
        std::string tag;
        is >> tag >> tag;
        if (tag != "prog-normalizer") {
            throw std::runtime_error(path + ": not a normalizer file");
        }
        std::string kv;
        while (is >> kv) {
            const auto eq = kv.find('=');
            if (eq != std::string::npos && kv.substr(0, eq) == "input_width") {
                stats.input_width =
                    static_cast<std::size_t>(parse_long(kv.substr(eq + 1), path + " header"));
            }
        }
    }
    std::getline(in, line);  // column header
    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto toks = split_csv(line);
        const std::string where = path + ":" + std::to_string(lineno);
        if (toks.size() != 3) {
            throw std::runtime_error(where + ": expected 3 columns");
        }
        stats.kept.push_back(static_cast<std::size_t>(parse_long(toks[0], where)));
        stats.mean.push_back(parse_double(toks[1], where));
        stats.stdev.push_back(parse_double(toks[2], where));
    }
    return stats;
}

double positive_fraction(const std::vector<Window>& windows) {
    if (windows.empty()) {
        throw std::invalid_argument("positive_fraction: no windows");
    }
    std::size_t pos = 0;
    for (const auto& win : windows) {
        if (win.fp_label == 1) {
            ++pos;
        }
    }
    return static_cast<double>(pos) / static_cast<double>(windows.size());
}

}  // namespace prog::pipeline
