#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prog/pipeline.hpp"
#include "prog/weibull.hpp"

namespace prog::pipeline {

// Synthetic Weibull degradation generator. Each device draws a covariate
// z ~ U(-1,1); its scale is lambda = exp(a*z + b) with a shared shape k_true.
// The first signal_channels sensor channels carry z plus Gaussian noise, the
// rest are pure-noise distractors. Failure times come from the inverse CDF;
// censoring is an independent competing Weibull risk calibrated so each
// device is censored with probability censor_fraction.
struct SynthConfig {
    std::size_t n_train = 2000;
    std::size_t n_test = 500;
    std::size_t d = 6;
    std::size_t signal_channels = 4;
    double a = 1.65;
    double b = 4.0943445622221004;  // ln 60
    double k_true = 1.8;
    double censor_fraction = 0.3;
    double noise_sd = 0.2;
    std::size_t max_length = 4000;  // administrative cap on observed days
    std::uint64_t seed = 1;

    void validate() const;  // throws std::invalid_argument
};

struct SynthTruth {
    std::string device_id;
    double z = 0.0;
    double lambda = 0.0;
    double k = 0.0;
    double event_time = 0.0;   // latent failure time, known even when censored
    double censor_draw = 0.0;  // competing censor time (inf when none fired)
    bool failed = false;
};

struct SynthResult {
    std::vector<SensorSequence> train;
    std::vector<SensorSequence> test;
    std::vector<SynthTruth> truth;  // train devices first, then test
};

SynthResult synth_weibull(const SynthConfig& cfg);

// (t_g, delta) draws for MLE experiments: event times Weibull(lambda, k),
// censored by an independent Weibull risk with P(censored) = censor_fraction.
std::vector<weibull::EventSample> censored_weibull_draws(std::size_t n, double lambda, double k,
                                                         double censor_fraction,
                                                         std::uint64_t seed);

void save_synth_sequences(const std::string& dir, const std::string& stem,
                          const std::vector<SensorSequence>& seqs);
std::vector<SensorSequence> load_synth_sequences(const std::string& dir, const std::string& stem);

void save_synth_truth(const std::string& path, const std::vector<SynthTruth>& truth);
std::vector<SynthTruth> load_synth_truth(const std::string& path);

}  // namespace prog::pipeline
