#include "plpair/events.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plpair {

namespace {
constexpr double kPhaseSnap = 1e-15;
}

double pulse_phase(double t, double period)
{
    double phase = t - std::floor(t / period) * period;
    if (phase < kPhaseSnap || period - phase < kPhaseSnap) {
        return 0.0;
    }
    return phase;
}

EventStream apply_gate(const EventStream& stream, const Gate& gate, double rep_period)
{
    if (!(rep_period > 0.0)) {
        throw std::invalid_argument("gate needs a positive repetition period");
    }
    if (!(gate.width_s > 0.0) || gate.width_s > rep_period) {
        throw std::invalid_argument("gate width must lie in (0, repetition period]");
    }
    EventStream out{stream.channel, stream.duration_s, {}};
    if (gate.width_s == rep_period) {
        out.timestamps_s = stream.timestamps_s;
        return out;
    }
    out.timestamps_s.reserve(stream.size());
    for (double t : stream.timestamps_s) {
        if (pulse_phase(t - gate.offset_s, rep_period) < gate.width_s) {
            out.timestamps_s.push_back(t);
        }
    }
    return out;
}

void apply_dead_time(std::vector<double>& times, double dead_time)
{
    if (dead_time < 0.0) {
        throw std::invalid_argument("dead time must be >= 0");
    }
    if (dead_time == 0.0 || times.empty()) {
        return;
    }
    std::size_t kept = 1;
    double last = times.front();
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (times[k] - last >= dead_time) {
            last = times[k];
            times[kept++] = last;
        }
    }
    times.resize(kept);
}

std::int64_t count_coincidences(const std::vector<double>& s,
                                const std::vector<double>& i,
                                double tau_c,
                                double delay)
{
    const double half = 0.5 * tau_c;
    std::int64_t count = 0;
    std::size_t j = 0;
    for (double ts : s) {
        while (j < i.size() && i[j] + delay < ts - half) {
            ++j;
        }
        if (j == i.size()) {
            break;
        }
        if (i[j] + delay <= ts + half) {
            ++count;
            ++j;
        }
    }
    return count;
}

std::int64_t count_coincidences(const EventStream& s, const EventStream& i, double tau_c, double delay)
{
    return count_coincidences(s.timestamps_s, i.timestamps_s, tau_c, delay);
}

std::int64_t count_window_pairs(const std::vector<double>& s,
                                const std::vector<double>& i,
                                double tau_c,
                                double delay)
{
    const double half = 0.5 * tau_c;
    std::int64_t count = 0;
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (double ts : s) {
        while (lo < i.size() && i[lo] + delay < ts - half) {
            ++lo;
        }
        hi = std::max(hi, lo);
        while (hi < i.size() && i[hi] + delay <= ts + half) {
            ++hi;
        }
        count += static_cast<std::int64_t>(hi - lo);
    }
    return count;
}

}  // namespace plpair
