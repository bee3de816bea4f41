#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace prog::pipeline {

// One device's observation history. Time indices are 1-based and gap-free;
// observations.size() == censor_time. For failed devices failure_time equals
// censor_time. Test devices may carry residual_truth >= 0: the ground-truth
// remaining life (raw units) after censor_time.
struct SensorSequence {
    std::string device_id;
    std::size_t censor_time = 0;
    bool failed = false;
    std::size_t failure_time = 0;
    double residual_truth = -1.0;
    std::vector<std::vector<double>> observations;

    bool has_residual_truth() const { return residual_truth >= 0.0; }
};

// A labeled landmark window. values is w*d row-major, time-major: row r holds
// the observation at time end_time - w + 1 + r. rul_target and
// censor_remaining are in window units (raw remaining / w).
struct Window {
    std::string device_id;
    std::size_t end_time = 0;
    int fp_label = 0;
    bool has_rul = false;
    double rul_target = 0.0;
    bool censored = false;
    double censor_remaining = 0.0;
    std::vector<double> values;
};

// All lengths/times in raw dataset units (cycles or days).
struct WindowingConfig {
    std::size_t w = 10;
    std::size_t stride = 10;
    double tau_f = 5.0;
    double tau_e = 20.0;
    double max_rul = 130.0;

    void validate() const;  // throws std::invalid_argument
};

struct NormalizationStats {
    std::size_t input_width = 0;       // feature count before dropping
    std::vector<std::size_t> kept;     // original column indices retained
    std::vector<double> mean;          // one per kept column
    std::vector<double> stdev;         // one per kept column, all > 0
};

struct CmapssData {
    std::vector<SensorSequence> train;
    std::vector<SensorSequence> test;
};

// Reads train_<subset>.txt, test_<subset>.txt, RUL_<subset>.txt from dir.
// 26 space-delimited columns per row: unit, cycle, 3 settings, 21 sensors.
CmapssData load_cmapss(const std::string& dir, const std::string& subset);

// The fixed 26-column SMART feature manifest (raw + normalized pairs).
const std::vector<std::string>& default_smart_columns();

// Reads every *.csv under dir (daily snapshots, lexicographic order = date
// order), keeps rows whose model matches, and builds one sequence per serial.
// Missing feature values are forward-filled within a device; values missing
// from the start stay NaN until normalization maps them to 0.
std::vector<SensorSequence> load_backblaze(const std::string& dir, const std::string& model,
                                           const std::vector<std::string>& smart_columns,
                                           std::vector<std::string>* warnings = nullptr);

double cap_rul(double remaining, double max_rul);

std::vector<Window> make_windows(const SensorSequence& seq, const WindowingConfig& cfg,
                                 std::vector<std::string>* warnings = nullptr);

NormalizationStats fit_normalizer(const std::vector<SensorSequence>& train);
void apply_normalizer(const NormalizationStats& stats, std::vector<SensorSequence>& seqs);

// Keeps every failed device and down-samples the rest to the failed count.
std::vector<SensorSequence> balance_devices(const std::vector<SensorSequence>& devices,
                                            std::uint64_t seed);

// Device-level split; second element holds ~val_fraction of the devices.
std::pair<std::vector<SensorSequence>, std::vector<SensorSequence>> split_devices(
    const std::vector<SensorSequence>& devices, double val_fraction, std::uint64_t seed);

struct WindowSet {
    std::size_t w = 0;
    std::size_t d = 0;
    std::vector<Window> windows;
};

// Columnar text format with a metadata line; floats printed with %.17g so a
// round-trip is bit-exact.
void save_windows(const std::string& path, const WindowSet& set);
WindowSet load_windows(const std::string& path);

void save_normalizer(const std::string& path, const NormalizationStats& stats);
NormalizationStats load_normalizer(const std::string& path);

double positive_fraction(const std::vector<Window>& windows);

}  // namespace prog::pipeline
