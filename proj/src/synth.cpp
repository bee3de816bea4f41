#include "prog/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace prog::pipeline {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

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

// Strictly-in-(0,1) uniform; avoids log(0) in the inverse CDF.
double open_uniform(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double u = dist(rng);
    while (u <= 0.0 || u >= 1.0) {
        u = dist(rng);
    }
    return u;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_train == 0) {
        throw std::invalid_argument("synth: n_train must be positive");
    }
    if (d == 0 || signal_channels == 0 || signal_channels > d) {
        throw std::invalid_argument("synth: need 1 <= signal_channels <= d");
    }
    if (!(k_true > 0.0)) {
        throw std::invalid_argument("synth: k_true must be positive");
    }
    if (censor_fraction < 0.0 || censor_fraction >= 1.0) {
        throw std::invalid_argument("synth: censor_fraction must be in [0,1)");
    }
    if (!(noise_sd >= 0.0)) {
        throw std::invalid_argument("synth: noise_sd must be >= 0");
    }
    if (max_length < 2) {
        throw std::invalid_argument("synth: max_length too small");
    }
}

SynthResult synth_weibull(const SynthConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif_z(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double inf = std::numeric_limits<double>::infinity();
    // P(C < T) = 1 / (1 + (lambda_c/lambda)^k) = q  =>  lambda_c = lambda * ((1-q)/q)^(1/k)
    const double q = cfg.censor_fraction;
    const double censor_ratio = q > 0.0 ? std::pow((1.0 - q) / q, 1.0 / cfg.k_true) : inf;

    SynthResult result;
    const std::size_t total = cfg.n_train + cfg.n_test;
    for (std::size_t idx = 0; idx < total; ++idx) {
        const bool is_test = idx >= cfg.n_train;
        SynthTruth truth;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "synth_%05zu", idx);
        truth.device_id = buf;
        truth.z = unif_z(rng);
        truth.lambda = std::exp(cfg.a * truth.z + cfg.b);
        truth.k = cfg.k_true;
        const weibull::WeibullParams event_dist{truth.lambda, cfg.k_true};
        truth.event_time = weibull::sample(event_dist, open_uniform(rng));
        truth.censor_draw = inf;
        if (q > 0.0) {
            const weibull::WeibullParams censor_dist{truth.lambda * censor_ratio, cfg.k_true};
            truth.censor_draw = weibull::sample(censor_dist, open_uniform(rng));
        }

        double horizon = std::min(truth.event_time, truth.censor_draw);
        truth.failed = truth.event_time <= truth.censor_draw;
        std::size_t c_p;
        if (truth.failed) {
            // The device is seen up to and including the failure day.
            c_p = static_cast<std::size_t>(std::ceil(horizon));
        } else {
            c_p = static_cast<std::size_t>(std::floor(horizon));
        }
        if (c_p > cfg.max_length) {
            c_p = cfg.max_length;
            truth.failed = false;  // administratively censored at the cap
        }
        if (c_p < 1) {
            c_p = 1;  // failure within the first day: one observation exists
        }

        SensorSequence seq;
        seq.device_id = truth.device_id;
        seq.censor_time = c_p;
        seq.failed = truth.failed;
        if (truth.failed) {
            seq.failure_time = c_p;
        }
        seq.observations.resize(c_p);
        for (std::size_t t = 0; t < c_p; ++t) {
            auto& row = seq.observations[t];
            row.resize(cfg.d);
            for (std::size_t j = 0; j < cfg.d; ++j) {
                if (j < cfg.signal_channels) {
                    row[j] = truth.z + cfg.noise_sd * gauss(rng);
                } else {
                    row[j] = gauss(rng);
                }
            }
        }
        (is_test ? result.test : result.train).push_back(std::move(seq));
        result.truth.push_back(std::move(truth));
    }
    return result;
}

std::vector<weibull::EventSample> censored_weibull_draws(std::size_t n, double lambda, double k,
                                                         double censor_fraction,
                                                         std::uint64_t seed) {
    if (n == 0) {
        throw std::invalid_argument("censored_weibull_draws: n must be positive");
    }
    if (censor_fraction < 0.0 || censor_fraction >= 1.0) {
        throw std::invalid_argument("censored_weibull_draws: censor_fraction must be in [0,1)");
    }
    const weibull::WeibullParams event_dist{lambda, k};
    const double q = censor_fraction;
    const double ratio = q > 0.0 ? std::pow((1.0 - q) / q, 1.0 / k) : 0.0;
    std::mt19937_64 rng(seed);
    std::vector<weibull::EventSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t_event = weibull::sample(event_dist, open_uniform(rng));
        double t = t_event;
        int delta = 1;
        if (q > 0.0) {
            const weibull::WeibullParams censor_dist{lambda * ratio, k};
            const double t_censor = weibull::sample(censor_dist, open_uniform(rng));
            if (t_censor < t_event) {
                t = t_censor;
                delta = 0;
            }
        }
        out.push_back({t, delta});
    }
    return out;
}

void save_synth_sequences(const std::string& dir, const std::string& stem,
                          const std::vector<SensorSequence>& seqs) {
    namespace fs = std::filesystem;
    const std::string data_path = (fs::path(dir) / (stem + "_data.csv")).string();
    const std::string dev_path = (fs::path(dir) / (stem + "_devices.csv")).string();
    const std::size_t d = seqs.empty() || seqs.front().observations.empty()
                              ? 0
                              : seqs.front().observations.front().size();
    std::ofstream data(data_path);
    if (!data) {
        throw std::runtime_error("cannot write " + data_path);
    }
    data << "device_id,t";
    for (std::size_t j = 0; j < d; ++j) {
        data << ",x" << j;
    }
    data << "\n";
    std::ofstream dev(dev_path);
    if (!dev) {
        throw std::runtime_error("cannot write " + dev_path);
    }
    dev << "device_id,censor_time,failed\n";
    for (const auto& seq : seqs) {
        dev << seq.device_id << ',' << seq.censor_time << ',' << (seq.failed ? 1 : 0) << "\n";
        for (std::size_t t = 0; t < seq.observations.size(); ++t) {
            data << seq.device_id << ',' << (t + 1);
            for (double v : seq.observations[t]) {
                data << ',' << fmt17(v);
            }
            data << "\n";
        }
    }
    if (!data || !dev) {
        throw std::runtime_error("write failed under " + dir);
    }
}

std::vector<SensorSequence> load_synth_sequences(const std::string& dir,
                                                 const std::string& stem) {
    namespace fs = std::filesystem;
    const std::string data_path = (fs::path(dir) / (stem + "_data.csv")).string();
    const std::string dev_path = (fs::path(dir) / (stem + "_devices.csv")).string();

    std::ifstream dev(dev_path);
    if (!dev) {
        throw std::runtime_error("cannot open " + dev_path);
    }
    std::vector<SensorSequence> seqs;
    std::unordered_map<std::string, std::size_t> index;
    std::string line;
    std::getline(dev, line);  // header
    std::size_t lineno = 1;
    while (std::getline(dev, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto toks = split_csv(line);
        const std::string where = dev_path + ":" + std::to_string(lineno);
        if (toks.size() != 3) {
            throw std::runtime_error(where + ": expected 3 columns");
        }
        SensorSequence seq;
        seq.device_id = toks[0];
        seq.censor_time = static_cast<std::size_t>(parse_double(toks[1], where));
        seq.failed = toks[2] == "1";
        if (seq.failed) {
            seq.failure_time = seq.censor_time;
        }
        index[seq.device_id] = seqs.size();
        seqs.push_back(std::move(seq));
    }

    std::ifstream data(data_path);
    if (!data) {
        throw std::runtime_error("cannot open " + data_path);
    }
    std::getline(data, line);  // header
    const std::size_t d = split_csv(line).size() - 2;
    lineno = 1;
    while (std::getline(data, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto toks = split_csv(line);
        const std::string where = data_path + ":" + std::to_string(lineno);
        if (toks.size() != d + 2) {
            throw std::runtime_error(where + ": expected " + std::to_string(d + 2) + " columns");
        }
        auto it = index.find(toks[0]);
        if (it == index.end()) {
            throw std::runtime_error(where + ": unknown device " + toks[0]);
        }
        auto& seq = seqs[it->second];
        const std::size_t t = static_cast<std::size_t>(parse_double(toks[1], where));
        if (t != seq.observations.size() + 1) {
            throw std::runtime_error(where + ": time indices must be gap-free from 1");
        }
        std::vector<double> row(d);
        for (std::size_t j = 0; j < d; ++j) {
            row[j] = parse_double(toks[2 + j], where);
        }
        seq.observations.push_back(std::move(row));
    }
    for (const auto& seq : seqs) {
        if (seq.observations.size() != seq.censor_time) {
            throw std::runtime_error(dev_path + ": device " + seq.device_id + " lists " +
                                     std::to_string(seq.censor_time) + " observations but " +
                                     data_path + " holds " +
                                     std::to_string(seq.observations.size()));
        }
    }
    return seqs;
}

void save_synth_truth(const std::string& path, const std::vector<SynthTruth>& truth) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "device_id,z,lambda,k,event_time,censor_draw,failed\n";
    for (const auto& row : truth) {
        out << row.device_id << ',' << fmt17(row.z) << ',' << fmt17(row.lambda) << ','
            << fmt17(row.k) << ',' << fmt17(row.event_time) << ',' << fmt17(row.censor_draw)
            << ',' << (row.failed ? 1 : 0) << "\n";
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

std::vector<SynthTruth> load_synth_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::vector<SynthTruth> out;
    std::string line;
    std::getline(in, line);  // header
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto toks = split_csv(line);
        const std::string where = path + ":" + std::to_string(lineno);
        if (toks.size() != 7) {
            throw std::runtime_error(where + ": expected 7 columns");
        }
        SynthTruth row;
        row.device_id = toks[0];
        row.z = parse_double(toks[1], where);
        row.lambda = parse_double(toks[2], where);
        row.k = parse_double(toks[3], where);
        row.event_time = parse_double(toks[4], where);
        row.censor_draw = toks[5] == "inf" ? std::numeric_limits<double>::infinity()
                                           : parse_double(toks[5], where);
        row.failed = toks[6] == "1";
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace prog::pipeline
