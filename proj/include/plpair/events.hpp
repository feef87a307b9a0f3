// Detection-event streams and the time-domain operations on them.
#pragma once

#include <cstdint>
#include <vector>

#include "plpair/model.hpp"

namespace plpair {

/// Time-tagged detections of one channel. Timestamps are sorted and lie in
/// [0, duration_s). Equal timestamps are allowed only for an ideal detector
/// (zero dead time); any positive dead time makes them strictly increasing.
struct EventStream {
    Channel channel = Channel::signal;
    double duration_s = 0.0;
    std::vector<double> timestamps_s;

    std::size_t size() const { return timestamps_s.size(); }
    double rate() const { return duration_s > 0.0 ? static_cast<double>(size()) / duration_s : 0.0; }
};

/// Acceptance window relative to the pump pulse clock (pulses at k·period).
struct Gate {
    double offset_s = 0.0;
    double width_s = 0.0;
};

/// Phase of `t` within the pulse period, in [0, period). Values within 1 fs of
/// a pulse are snapped onto it so pulse-synchronous events land on phase 0.
double pulse_phase(double t, double period);

/// Keeps events whose phase relative to the gate offset is below the gate
/// width. Output stays sorted.
EventStream apply_gate(const EventStream& stream, const Gate& gate, double rep_period);

/// Non-paralyzable detector dead time: an event is dropped when it follows the
/// last kept event by less than `dead_time`. A zero dead time keeps everything.
void apply_dead_time(std::vector<double>& sorted_times, double dead_time);

/// Number of (signal, idler) pairs with |t_s - (t_i + delay)| <= tau_c/2,
/// matched greedily: each signal event takes the earliest unused idler event
/// inside its window. Linear in the total number of events.
std::int64_t count_coincidences(const EventStream& s, const EventStream& i, double tau_c, double delay = 0.0);

/// Same as above over raw sorted timestamp vectors.
std::int64_t count_coincidences(const std::vector<double>& s,
                                const std::vector<double>& i,
                                double tau_c,
                                double delay = 0.0);

/// Number of (s, i) event pairs with |t_s - (t_i + delay)| <= tau_c/2, every
/// combination counted: the integral of the start-stop histogram over the
/// window. For independent stationary streams its mean is exactly
/// tau_c·R_s·R_i, with no pile-up loss at high rates.
std::int64_t count_window_pairs(const std::vector<double>& s,
                                const std::vector<double>& i,
                                double tau_c,
                                double delay = 0.0);

}  // namespace plpair
