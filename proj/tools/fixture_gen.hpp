#pragma once

#include <cstdint>
#include <string>

namespace prog::fixture {

// Turbofan-style run-to-failure fixture in the 26-column format read by the
// cmapss loader. Degradation channels trace a bathtub profile of unit age and
// remaining life R: a burn-in stretch pinned at the unit's own saturation
// level, a settled mid-life that climbs as exp(-R/theta), and a late plateau
// at that same saturation level. Burn-in windows and late windows of one unit
// therefore read identically (level, slope, and per-channel gain all match),
// while mid-life windows resolve R cleanly. AR(1) drift channels wander
// uninformatively and constant channels mirror the flat recordings.
struct CmapssFixtureConfig {
    std::size_t train_units = 100;
    std::size_t test_units = 100;
    double mean_life = 206.0;
    double sd_life = 46.0;
    double min_life = 128.0;
    double max_life = 362.0;
    double smooth_theta_lo = 32.0;
    double smooth_theta_hi = 78.0;
    double smooth_noise = 0.12;
    // Unrecorded regime switch: level shift on the smooth channels (fraction
    // of amplitude) and its per-cycle flip probability.
    double regime_scale = 0.0;
    double regime_flip = 0.05;  // fraction of channel amplitude
    double gain_sd = 0.06;
    double youth_off_lo = 19.0;  // burn-in settles at this age
    double youth_off_hi = 31.0;
    double alarm_on_lo = 14.0;   // end-of-life latch onset (remaining life)
    double alarm_on_hi = 20.0;
    double alarm_ramp = 3.0;     // latch rise time, cycles
    double alarm_noise = 0.64;   // fraction of amplitude; keeps the latch faint
    double alarm_miss_frac = 0.02;  // units that fail without tripping it
    double youth_ramp = 2.5;     // settling edge width, cycles
    double high_p_frac = 0.18;   // units saturating too high to mask the end
    double p_high_lo = 0.88;
    double p_high_hi = 0.97;
    double rp_lo = 22.0;  // others saturate this many cycles before failure
    double rp_hi = 27.0;
    double p_floor = 0.30;
    double p_ceil = 0.85;
    double drift_scale = 1.0;
    double rul_short_frac = 0.45;  // test truncation: near-failure share
    double rul_short_lo = 4.0;
    double rul_short_hi = 18.0;
    double rul_long_lo = 30.0;
    double rul_long_hi = 145.0;
    std::uint64_t seed = 2024;
};

void write_cmapss_fixture(const std::string& dir, const CmapssFixtureConfig& cfg);

// Daily drive-stats snapshots in the Backblaze CSV layout: one file per day,
// one row per live drive, SMART raw/normalized pairs, failure flag set on a
// failed drive's last day. Includes rows of a second model (to be filtered
// out), staggered installs, early retirements and a sprinkle of missing
// values.
struct BackblazeFixtureConfig {
    std::size_t drives = 60;
    std::size_t days = 120;
    std::size_t failed = 5;
    std::string model = "ST4000DM000";
    std::string other_model = "WDC WD30EFRX";
    std::size_t other_drives = 8;
    std::uint64_t seed = 77;
};

void write_backblaze_fixture(const std::string& dir, const BackblazeFixtureConfig& cfg);

}  // namespace prog::fixture
