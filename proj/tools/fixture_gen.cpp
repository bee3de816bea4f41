#include "fixture_gen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <vector>

namespace prog::fixture {

namespace {

namespace fs = std::filesystem;

enum class Kind { Const, Smooth, Alarm, Drift };

struct Chan {
    double base;
    double amp;
    Kind kind;
};

// 21 sensors; 7 constants mirror the flat channels of the real recordings.
const Chan kChans[21] = {
    {518.67, 0.0, Kind::Const},    // s1
    {642.0, 4.5, Kind::Smooth},    // s2
    {1585.0, 13.0, Kind::Smooth},  // s3
    {1400.0, 10.0, Kind::Smooth},  // s4
    {14.62, 0.0, Kind::Const},     // s5
    {21.61, 0.0, Kind::Const},     // s6
    {554.0, -6.0, Kind::Smooth},   // s7
    {2388.05, 0.08, Kind::Drift},  // s8
    {9050.0, 18.0, Kind::Drift},   // s9
    {1.30, 0.0, Kind::Const},      // s10
    {47.2, 1.5, Kind::Smooth},     // s11
    {522.0, -5.5, Kind::Smooth},   // s12
    {2388.05, 0.07, Kind::Drift},  // s13
    {8130.0, 12.0, Kind::Drift},   // s14
    {8.44, 0.14, Kind::Alarm},    // s15
    {0.03, 0.0, Kind::Const},      // s16
    {392.0, 6.0, Kind::Smooth},    // s17
    {2388.0, 0.0, Kind::Const},    // s18
    {100.0, 0.0, Kind::Const},     // s19
    {38.9, -0.9, Kind::Alarm},    // s20
    {23.35, -0.55, Kind::Alarm},   // s21
};

struct UnitTraits {
    double theta_c[21];    // degradation time constant
    double youth_off_c[21];  // burn-in settles at this age
    double onset_c[21];      // alarm latch onset (remaining life)
    double gain_c[21];
    double offset_c[21];
    double plateau = 1.0;  // saturation level shared by burn-in and the end
    bool alarmed = true;   // false = unit fails without tripping the latch
};

UnitTraits draw_traits(std::mt19937_64& rng, const CmapssFixtureConfig& cfg) {
    UnitTraits tr;
    std::uniform_real_distribution<double> smooth_theta(cfg.smooth_theta_lo,
                                                        cfg.smooth_theta_hi);
    std::uniform_real_distribution<double> youth_off(cfg.youth_off_lo, cfg.youth_off_hi);
    std::uniform_real_distribution<double> alarm_on(cfg.alarm_on_lo, cfg.alarm_on_hi);
    std::uniform_real_distribution<double> jitter(0.9, 1.1);
    std::uniform_real_distribution<double> off_jitter(0.95, 1.05);
    std::uniform_real_distribution<double> unif01(0.0, 1.0);
    std::uniform_real_distribution<double> p_high(cfg.p_high_lo, cfg.p_high_hi);
    std::uniform_real_distribution<double> rp(cfg.rp_lo, cfg.rp_hi);
    std::normal_distribution<double> gain(1.0, cfg.gain_sd);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double theta_smooth = smooth_theta(rng);
    const double t_off = youth_off(rng);
    const double onset = alarm_on(rng);
    tr.alarmed = unif01(rng) >= cfg.alarm_miss_frac;
    if (unif01(rng) < cfg.high_p_frac) {
        tr.plateau = p_high(rng);
    } else {
        // Saturation placed a target number of cycles before failure, so the
        // masked stretch has comparable length across units.
        tr.plateau = std::clamp(std::exp(-rp(rng) / theta_smooth), cfg.p_floor,
                                cfg.p_ceil);
    }
    for (int c = 0; c < 21; ++c) {
        const Chan& ch = kChans[c];
        tr.theta_c[c] = theta_smooth * jitter(rng);
        tr.youth_off_c[c] = t_off * off_jitter(rng);
        tr.onset_c[c] = onset * off_jitter(rng);
        tr.gain_c[c] = gain(rng);
        tr.offset_c[c] = normal(rng) * 0.03 * std::abs(ch.amp);
    }
    return tr;
}

// Full run-to-failure history of one unit: rows[t][c], t = 0 .. L-1.
std::vector<std::vector<double>> simulate_unit(std::mt19937_64& rng,
                                               const CmapssFixtureConfig& cfg,
                                               std::size_t life) {
    const UnitTraits tr = draw_traits(rng, cfg);
    std::normal_distribution<double> normal(0.0, 1.0);
    constexpr double kPhi = 0.995;
    double ar_state[21] = {};
    for (int c = 0; c < 21; ++c) {
        if (kChans[c].kind == Kind::Drift) {
            ar_state[c] = normal(rng);
        }
    }
    // Unrecorded operating-regime state: a slow two-level switch that shifts
    // the gas-path levels but is absent from the written settings columns, so
    // a learner cannot de-confound it.
    std::uniform_real_distribution<double> unif01(0.0, 1.0);
    double regime = unif01(rng) < 0.5 ? -1.0 : 1.0;
    std::vector<std::vector<double>> rows(life, std::vector<double>(21));
    for (std::size_t t = 0; t < life; ++t) {
        if (unif01(rng) < cfg.regime_flip) {
            regime = -regime;
        }
        const double remaining = static_cast<double>(life - 1 - t);
        const double age = static_cast<double>(t);
        for (int c = 0; c < 21; ++c) {
            const Chan& ch = kChans[c];
            double v = ch.base + tr.offset_c[c];
            switch (ch.kind) {
                case Kind::Const:
                    break;
                case Kind::Smooth: {
                    // Bathtub: burn-in holds the channel at the saturation
                    // level, degradation climbs back to it before failure.
                    const double youth =
                        1.0 / (1.0 + std::exp((age - tr.youth_off_c[c]) /
                                              cfg.youth_ramp));
                    const double wear = std::exp(-remaining / tr.theta_c[c]);
                    const double psi = std::min(std::max(youth, wear), tr.plateau);
                    v += ch.amp * tr.gain_c[c] * psi +
                         std::abs(ch.amp) * cfg.regime_scale * regime +
                         std::abs(ch.amp) * cfg.smooth_noise * normal(rng);
                    break;
                }
                case Kind::Alarm: {
                    // End-of-life latch: silent through burn-in and mid-life,
                    // rises near the onset and stays up. Buried in noise so it
                    // reads as a faint bias, not a clean flag.
                    const double psi =
                        tr.alarmed
                            ? 1.0 / (1.0 + std::exp((remaining - tr.onset_c[c]) /
                                                    cfg.alarm_ramp))
                            : 0.0;
                    v += ch.amp * tr.gain_c[c] * psi +
                         std::abs(ch.amp) * cfg.alarm_noise * normal(rng);
                    break;
                }
                case Kind::Drift: {
                    ar_state[c] = kPhi * ar_state[c] +
                                  std::sqrt(1.0 - kPhi * kPhi) * normal(rng);
                    const double amp = ch.amp * cfg.drift_scale;
                    v += amp * ar_state[c] + 0.2 * amp * normal(rng);
                    break;
                }
            }
            rows[t][c] = v;
        }
    }
    return rows;
}

std::size_t draw_life(std::mt19937_64& rng, const CmapssFixtureConfig& cfg) {
    std::normal_distribution<double> life_dist(cfg.mean_life, cfg.sd_life);
    const double life = std::clamp(life_dist(rng), cfg.min_life, cfg.max_life);
    return static_cast<std::size_t>(std::lround(life));
}

void write_unit(std::ofstream& out, std::size_t unit, std::size_t cycles,
                const std::vector<std::vector<double>>& rows, std::mt19937_64& rng) {
    std::normal_distribution<double> set1(0.0, 0.0015);
    std::normal_distribution<double> set2(0.0003, 0.00025);
    char buf[64];
    for (std::size_t t = 0; t < cycles; ++t) {
        out << unit << ' ' << (t + 1);
        std::snprintf(buf, sizeof(buf), " %.4f %.4f %.1f", set1(rng), set2(rng), 100.0);
        out << buf;
        for (int c = 0; c < 21; ++c) {
            std::snprintf(buf, sizeof(buf), " %.4f", rows[t][c]);
            out << buf;
        }
        out << "\n";
    }
}

std::string date_string(std::chrono::sys_days day) {
    const std::chrono::year_month_day ymd(day);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace

void write_cmapss_fixture(const std::string& dir, const CmapssFixtureConfig& cfg) {
    fs::create_directories(dir);
    std::mt19937_64 rng(cfg.seed);

    {
        std::ofstream out(fs::path(dir) / "train_FD001.txt");
        if (!out) {
            throw std::runtime_error("cannot write train fixture in " + dir);
        }
        for (std::size_t u = 1; u <= cfg.train_units; ++u) {
            const std::size_t life = draw_life(rng, cfg);
            const auto rows = simulate_unit(rng, cfg, life);
            write_unit(out, u, life, rows, rng);
        }
    }

    std::uniform_real_distribution<double> unif01(0.0, 1.0);
    std::uniform_real_distribution<double> rul_short(cfg.rul_short_lo, cfg.rul_short_hi);
    std::uniform_real_distribution<double> rul_long(cfg.rul_long_lo, cfg.rul_long_hi);
    std::ofstream test_out(fs::path(dir) / "test_FD001.txt");
    std::ofstream rul_out(fs::path(dir) / "RUL_FD001.txt");
    if (!test_out || !rul_out) {
        throw std::runtime_error("cannot write test fixture in " + dir);
    }
    for (std::size_t u = 1; u <= cfg.test_units; ++u) {
        const std::size_t life = draw_life(rng, cfg);
        std::size_t rul = 0;
        do {
            const double draw = unif01(rng) < cfg.rul_short_frac ? rul_short(rng)
                                                                 : rul_long(rng);
            rul = static_cast<std::size_t>(std::lround(draw));
        } while (rul + 30 > life);  // keep a usable observed prefix
        const auto rows = simulate_unit(rng, cfg, life);
        write_unit(test_out, u, life - rul, rows, rng);
        rul_out << rul << "\n";
    }
}

void write_backblaze_fixture(const std::string& dir, const BackblazeFixtureConfig& cfg) {
    if (cfg.failed >= cfg.drives) {
        throw std::invalid_argument("backblaze fixture: failed must be < drives");
    }
    fs::create_directories(dir);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif01(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    struct Drive {
        std::string serial;
        std::string model;
        std::size_t install = 0;
        std::size_t last_day = 0;   // inclusive; past-end means full span
        bool fails = false;
        std::size_t fail_day = 0;
        double age_base_hours = 0.0;
        double temp = 27.0;
        int crc = 0;
        bool spotty_188 = false;    // occasionally reports no value
        std::size_t gap_day = 0;    // 0 = none; one missing daily report
        double realloc = 0.0;
        double pending = 0.0;
        double uncorr = 0.0;
        double reported = 0.0;
        double load_cycles = 0.0;
        double lbas = 0.0;
        double power_cycles = 12.0;
    };

    std::vector<Drive> drives;
    char serial[32];
    for (std::size_t i = 0; i < cfg.drives + cfg.other_drives; ++i) {
        Drive d;
        const bool other = i >= cfg.drives;
        std::snprintf(serial, sizeof(serial), "%s%04zu", other ? "WX20" : "PF1X", i + 1);
        d.serial = serial;
        d.model = other ? cfg.other_model : cfg.model;
        d.install = unif01(rng) < 0.8
                        ? 0
                        : static_cast<std::size_t>(1 + unif01(rng) * 24.0);
        d.last_day = cfg.days;  // full span unless retired/failed
        d.age_base_hours = 2000.0 + 30000.0 * unif01(rng);
        d.temp = 24.0 + 6.0 * unif01(rng);
        d.crc = unif01(rng) < 0.05 ? 1 + static_cast<int>(unif01(rng) * 3.0) : 0;
        d.spotty_188 = !other && unif01(rng) < 0.05;
        d.load_cycles = 500.0 + 5000.0 * unif01(rng);
        d.lbas = 1e9 + 4e10 * unif01(rng);
        if (!other && unif01(rng) < 0.02) {
            d.realloc = 8.0;  // a benign pre-existing count
        }
        drives.push_back(d);
    }
    // Failures among the primary model, far enough in for usable history.
    for (std::size_t f = 0; f < cfg.failed; ++f) {
        Drive& d = drives[f * (cfg.drives / cfg.failed)];
        d.fails = true;
        d.fail_day = 55 + static_cast<std::size_t>(unif01(rng) *
                                                   static_cast<double>(cfg.days - 56));
        d.last_day = d.fail_day;
    }
    // A few healthy retirements (right censoring inside the span).
    for (std::size_t i = 0; i < cfg.drives; ++i) {
        Drive& d = drives[i];
        if (!d.fails && unif01(rng) < 0.10) {
            d.last_day = 60 + static_cast<std::size_t>(
                                  unif01(rng) * static_cast<double>(cfg.days - 70));
        }
    }
    // One healthy drive skips a single daily report mid-life.
    for (auto& d : drives) {
        if (!d.fails && d.model == cfg.model && d.install == 0 && d.last_day == cfg.days) {
            d.gap_day = 40;
            break;
        }
    }

    using std::chrono::sys_days;
    const sys_days start = sys_days(std::chrono::year{2024} / 1 / 1);
    const auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return std::string(buf);
    };

    for (std::size_t day = 0; day < cfg.days; ++day) {
        const std::string date = date_string(start + std::chrono::days(day));
        std::ofstream out(fs::path(dir) / (date + ".csv"));
        if (!out) {
            throw std::runtime_error("cannot write backblaze fixture in " + dir);
        }
        out << "date,serial_number,model,capacity_bytes,failure";
        const char* attrs[] = {"1",   "5",   "7",   "9",   "12",  "187", "188",
                               "193", "194", "197", "198", "199", "241"};
        for (const char* a : attrs) {
            out << ",smart_" << a << "_normalized,smart_" << a << "_raw";
        }
        out << "\n";
        for (auto& d : drives) {
            if (day < d.install || day > d.last_day || day >= cfg.days) {
                continue;
            }
            if (day == d.last_day && !d.fails) {
                continue;  // retired the day before; no final row
            }
            if (d.gap_day != 0 && day == d.gap_day) {
                continue;
            }
            const bool fail_today = d.fails && day == d.fail_day;
            // Degradation: error counters escalate over the last 25 days.
            if (d.fails) {
                const double until = static_cast<double>(d.fail_day - day);
                if (until < 25.0) {
                    const double ramp = std::exp(0.28 * (25.0 - until)) - 1.0;
                    d.realloc += ramp * 0.4 * unif01(rng);
                    d.pending += ramp * 0.25 * unif01(rng);
                    d.uncorr += ramp * 0.15 * unif01(rng);
                    d.reported += ramp * 0.2 * unif01(rng);
                }
            }
            d.temp += 0.3 * normal(rng) - 0.05 * (d.temp - 27.0);
            d.load_cycles += 2.0 + 2.0 * unif01(rng);
            d.lbas += 2e7 * (0.5 + unif01(rng));
            if (unif01(rng) < 0.01) {
                d.power_cycles += 1.0;
            }

            out << date << ',' << d.serial << ',' << d.model << ",4000787030016,"
                << (fail_today ? 1 : 0);
            const double age_hours = d.age_base_hours + 24.0 * static_cast<double>(day);
            const double norm5 = std::max(0.0, 100.0 - d.realloc / 2.0);
            const double norm187 = std::max(0.0, 100.0 - d.reported);
            const double norm197 = std::max(0.0, 100.0 - d.pending / 2.0);
            const double norm198 = std::max(0.0, 100.0 - d.uncorr / 2.0);
            // smart_1: raw noise counter, smart_7: seek counter
            const double raw1 = 1.0e8 * (0.5 + 0.5 * unif01(rng));
            const double raw7 = 5.0e8 + 1.0e7 * static_cast<double>(day);
            const std::string v188 =
                (d.model == cfg.other_model || (d.spotty_188 && unif01(rng) < 0.02))
                    ? ""
                    : "0";
            out << ',' << fmt(110.0 + 8.0 * unif01(rng)) << ',' << fmt(raw1);
            out << ',' << fmt(norm5) << ',' << fmt(std::floor(d.realloc));
            out << ',' << fmt(85.0 + 5.0 * unif01(rng)) << ',' << fmt(raw7);
            out << ',' << fmt(std::max(1.0, 100.0 - age_hours / 800.0)) << ','
                << fmt(age_hours);
            out << ",100," << fmt(d.power_cycles);
            out << ',' << fmt(norm187) << ',' << fmt(std::floor(d.reported));
            out << ",100," << v188;
            out << ',' << fmt(std::max(1.0, 100.0 - d.load_cycles / 3000.0)) << ','
                << fmt(d.load_cycles);
            out << ',' << fmt(100.0 - (d.temp - 20.0)) << ',' << fmt(d.temp);
            out << ',' << fmt(norm197) << ',' << fmt(std::floor(d.pending));
            out << ',' << fmt(norm198) << ',' << fmt(std::floor(d.uncorr));
            out << ",200," << d.crc;
            out << ',' << fmt(std::max(1.0, 100.0 - d.lbas / 1e9)) << ',' << fmt(d.lbas);
            out << "\n";
        }
    }
}

}  // namespace prog::fixture
