// Monte Carlo generation of time-tagged detections from a pair source with
// photoluminescence and dark counts.
//
// Physical picture per channel:
//   * pairs: pulsed pumping puts a Poisson number of pairs (mean xi·P/rep_rate)
//     on every pulse, exactly at the pulse time; CW pumping makes pairs a
//     homogeneous Poisson process of rate xi·P. Each pair photon is detected
//     with the channel's Klyshko efficiency.
//   * photoluminescence (saturation model): an emitter excited at rate
//     gamma_s·P that ignores excitations for beta seconds after each accepted
//     one, so its throughput is exactly gamma_s·P/(1 + beta·gamma_s·P). The
//     photon leaves an Exp(beta) delay after the absorption instant, which
//     is the driving pulse in pulsed mode. Each channel sees an independent
//     realization thinned by its efficiency, so the noise carries no
//     cross-channel correlation.
//   * photoluminescence (power-law model): homogeneous Poisson emission of
//     rate gamma_p·P^alpha.
//   * dark counts: homogeneous Poisson at the detector dark rate.
// Sweep coincidences count every signal/idler pair inside the window
// (count_window_pairs), whose mean is exactly true + tau_c·R_s·R_i.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "plpair/events.hpp"
#include "plpair/model.hpp"
#include "plpair/rng.hpp"

namespace plpair {

enum class PumpMode { pulsed, cw };

struct PumpConfig {
    PumpMode mode = PumpMode::pulsed;
    double rep_rate_hz = 76.2e6;
    double average_power_uw = 0.0;
    double wavelength_nm = 763.0;

    double period_s() const { return 1.0 / rep_rate_hz; }
};

struct DetectorConfig {
    double dark_rate = 300.0;   // s⁻¹
    double dead_time_s = 0.0;
    std::optional<Gate> gate;  // pulsed mode only
};

void validate(const PumpConfig& pump);
void validate(const DetectorConfig& det, const PumpConfig& pump);

struct StreamPair {
    EventStream signal;
    EventStream idler;
};

/// Both channels for one pump setting over [0, duration_s).
/// Throws std::invalid_argument on a non-positive duration, invalid source
/// parameters, or a gate wider than the repetition period.
StreamPair simulate_streams(const PumpConfig& pump,
                            const SourceParams& source,
                            const DetectorConfig& det_s,
                            const DetectorConfig& det_i,
                            double duration_s,
                            std::uint64_t seed);

StreamPair simulate_streams(const PumpConfig& pump,
                            const SourceParams& source,
                            const DetectorConfig& det_s,
                            const DetectorConfig& det_i,
                            double duration_s,
                            Rng& rng);

/// Detected photoluminescence emission times in [0, duration_s) from one
/// saturable emitter seen through a detection probability `efficiency`.
std::vector<double> simulate_emitter(const PumpConfig& pump,
                                     const SaturationNoise& emitter,
                                     double efficiency,
                                     double duration_s,
                                     Rng& rng);

/// Homogeneous Poisson arrival times on [0, duration_s).
std::vector<double> poisson_times(double rate, double duration_s, Rng& rng);

/// One power-sweep point. Counts are the canonical data; rates derive from them.
struct SweepRecord {
    double power_uw = 0.0;
    double duration_s = 0.0;
    double gate_width_s = 0.0;  // 0 when ungated
    double tau_c_s = 0.0;
    std::int64_t count_s = 0;
    std::int64_t count_i = 0;
    std::int64_t count_c = 0;

    double r_s() const { return static_cast<double>(count_s) / duration_s; }
    double r_i() const { return static_cast<double>(count_i) / duration_s; }
    double r_c() const { return static_cast<double>(count_c) / duration_s; }
};

struct SweepOptions {
    unsigned threads = 0;                          // 0: hardware concurrency
    std::size_t max_events_per_chunk = 4'000'000;// memory bound per chunk
    /// Receives every simulated chunk with its start time within the point.
    /// Called from worker threads; chunks of one point arrive in order.
    std::function<void(std::size_t point, double chunk_start_s, const StreamPair&)> on_chunk;
};

/// Simulates sweep point `point_index` at `power_uw`. Long durations are
/// split into chunks, each an independent stationary segment on substream
/// (seed, point_index, chunk), so the result does not depend on scheduling.
SweepRecord simulate_point(const PumpConfig& pump_template,
                           const SourceParams& source,
                           const DetectorConfig& det_s,
                           const DetectorConfig& det_i,
                           double power_uw,
                           double duration_s,
                           std::uint64_t seed,
                           std::size_t point_index,
                           const SweepOptions& options = {});

std::vector<SweepRecord> simulate_sweep(const PumpConfig& pump_template,
                                        const SourceParams& source,
                                        const DetectorConfig& det_s,
                                        const DetectorConfig& det_i,
                                        const std::vector<double>& powers_uw,
                                        double duration_s,
                                        std::uint64_t seed,
                                        const SweepOptions& options = {});

/// n powers spaced logarithmically over [lo, hi] inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

}  // namespace plpair
