#include "plpair/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

namespace plpair {

namespace {

// Emissions from excitations earlier than this many lifetimes before t = 0
// would land inside the window with probability e^-30; they are ignored.
constexpr double kWarmupLifetimes = 30.0;

void insertion_sort(std::vector<double>& v)
{
    for (std::size_t k = 1; k < v.size(); ++k) {
        const double x = v[k];
        std::size_t j = k;
        while (j > 0 && v[j - 1] > x) {
            v[j] = v[j - 1];
            --j;
        }
        v[j] = x;
    }
}

std::vector<double> merge_sorted(std::vector<std::vector<double>> parts)
{
    std::vector<double> acc;
    for (auto& part : parts) {
        if (acc.empty()) {
            acc = std::move(part);
            continue;
        }
        std::vector<double> merged;
        merged.reserve(acc.size() + part.size());
        std::merge(acc.begin(), acc.end(), part.begin(), part.end(), std::back_inserter(merged));
        acc = std::move(merged);
    }
    return acc;
}

// Photons of a class with per-pulse mean `lambda`, every one an event at its
// pulse time. Independent Poisson(lambda) counts per pulse are the pulse
// indices floor(t) of a unit-rate-lambda Poisson process in pulse units.
void pulse_lattice_events(double lambda,
                          std::int64_t n_pulses,
                          double period,
                          Rng& rng,
                          std::vector<double>& out_a,
                          std::vector<double>* out_b)
{
    if (!(lambda > 0.0)) {
        return;
    }
    const auto expected = static_cast<std::size_t>(lambda * static_cast<double>(n_pulses) * 1.01 + 16);
    out_a.reserve(out_a.size() + expected);
    if (out_b != nullptr) {
        out_b->reserve(out_b->size() + expected);
    }
    boost::random::exponential_distribution<double> gap(lambda);
    const auto end = static_cast<double>(n_pulses);
    for (double u = gap(rng); u < end; u += gap(rng)) {
        const double t = std::floor(u) * period;
        out_a.push_back(t);
        if (out_b != nullptr) {
            out_b->push_back(t);
        }
    }
}

std::int64_t pulse_count(double duration, double period)
{
    return static_cast<std::int64_t>(std::ceil(duration / period));
}

double power_law_rate(const PowerLawNoise& m, double power)
{
    return noise_rate(NoiseModel{m}, power);
}

}  // namespace

void validate(const PumpConfig& pump)
{
    if (pump.average_power_uw < 0.0) {
        throw std::invalid_argument("pump power must be >= 0");
    }
    if (pump.mode == PumpMode::pulsed && !(pump.rep_rate_hz > 0.0)) {
        throw std::invalid_argument("pulsed pump needs a positive repetition rate");
    }
}

void validate(const DetectorConfig& det, const PumpConfig& pump)
{
    if (det.dark_rate < 0.0) {
        throw std::invalid_argument("dark rate must be >= 0");
    }
    if (det.dead_time_s < 0.0) {
        throw std::invalid_argument("dead time must be >= 0");
    }
    if (det.gate) {
        if (pump.mode != PumpMode::pulsed) {
            throw std::invalid_argument("time gates need a pulsed pump clock");
        }
        if (!(det.gate->width_s > 0.0) || det.gate->width_s > pump.period_s()) {
            throw std::invalid_argument("gate width must lie in (0, repetition period]");
        }
    }
}

std::vector<double> poisson_times(double rate, double duration_s, Rng& rng)
{
    std::vector<double> out;
    if (!(rate > 0.0)) {
        return out;
    }
    out.reserve(static_cast<std::size_t>(rate * duration_s * 1.01 + 16));
    boost::random::exponential_distribution<double> gap(rate);
    for (double t = gap(rng); t < duration_s; t += gap(rng)) {
        out.push_back(t);
    }
    return out;
}

std::vector<double> simulate_emitter(const PumpConfig& pump,
                                     const SaturationNoise& emitter,
                                     double efficiency,
                                     double duration_s,
                                     Rng& rng)
{
    std::vector<double> out;
    const double excitation = emitter.gamma_s * pump.average_power_uw;
    if (!(excitation > 0.0) || !(efficiency > 0.0)) {
        return out;
    }
    const double beta = emitter.beta;
    const bool pulsed = pump.mode == PumpMode::pulsed;
    const double period = pump.period_s();
    const double throughput = excitation / (1.0 + beta * excitation);
    out.reserve(static_cast<std::size_t>(throughput * efficiency * duration_s * 1.01 + 16));

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    // Idle time (outside dead periods) until the next detected accepted
    // excitation is Exp(efficiency·excitation); the undetected accepted ones
    // inside it are Poisson((1 - efficiency)·excitation·idle), each adding a
    // dead period.
    boost::random::exponential_distribution<double> idle(efficiency * excitation);
    const double undetected_rate = (1.0 - efficiency) * excitation;
    auto idle_and_dead = [&] {
        const double s = idle(rng);
        const double mean = undetected_rate * s;
        if (!(mean > 0.0) || beta == 0.0) {
            return s;
        }
        boost::random::poisson_distribution<std::int64_t, double> undetected(mean);
        return s + beta * static_cast<double>(undetected(rng));
    };

    // Stationary start: busy for a fraction x/(1+x) of the time, with the
    // residual dead time uniform over [0, beta).
    double t = -kWarmupLifetimes * beta;
    if (uni(rng) < beta * excitation / (1.0 + beta * excitation)) {
        t += uni(rng) * beta;
    }
    t += idle_and_dead();

    boost::random::exponential_distribution<double> decay(beta > 0.0 ? 1.0 / beta : 1.0);
    while (true) {
        const double anchor = pulsed ? std::floor(t / period) * period : t;
        if (anchor >= duration_s) {
            break;
        }
        const double emitted = anchor + (beta > 0.0 ? decay(rng) : 0.0);
        if (emitted >= 0.0 && emitted < duration_s) {
            out.push_back(emitted);
        }
        t += beta + idle_and_dead();
    }
    insertion_sort(out);
    return out;
}

StreamPair simulate_streams(const PumpConfig& pump,
                            const SourceParams& source,
                            const DetectorConfig& det_s,
                            const DetectorConfig& det_i,
                            double duration_s,
                            std::uint64_t seed)
{
    Rng rng = make_substream(seed, {});
    return simulate_streams(pump, source, det_s, det_i, duration_s, rng);
}

StreamPair simulate_streams(const PumpConfig& pump,
                            const SourceParams& source,
                            const DetectorConfig& det_s,
                            const DetectorConfig& det_i,
                            double duration_s,
                            Rng& rng)
{
    if (!(duration_s > 0.0)) {
        throw std::invalid_argument("simulation duration must be > 0");
    }
    validate(pump);
    validate(source);
    validate(det_s, pump);
    validate(det_i, pump);

    const double power = pump.average_power_uw;
    const double pair_rate = source.xi * power;
    const double es = source.eta_s;
    const double ei = source.eta_i;

    std::vector<double> pdc_s;
    std::vector<double> pdc_i;
    if (pump.mode == PumpMode::pulsed) {
        const double period = pump.period_s();
        const double mu = pair_rate * period;
        const std::int64_t n_pulses = pulse_count(duration_s, period);
        // Independent Poisson splitting of the pairs per pulse.
        std::vector<double> both_s;
        std::vector<double> both_i;
        pulse_lattice_events(mu * es * ei, n_pulses, period, rng, both_s, &both_i);
        std::vector<double> only_s;
        std::vector<double> only_i;
        pulse_lattice_events(mu * es * (1.0 - ei), n_pulses, period, rng, only_s, nullptr);
        pulse_lattice_events(mu * (1.0 - es) * ei, n_pulses, period, rng, only_i, nullptr);
        pdc_s = merge_sorted({std::move(both_s), std::move(only_s)});
        pdc_i = merge_sorted({std::move(both_i), std::move(only_i)});
    }
    else {
        std::vector<double> both = poisson_times(pair_rate * es * ei, duration_s, rng);
        std::vector<double> only_s = poisson_times(pair_rate * es * (1.0 - ei), duration_s, rng);
        std::vector<double> only_i = poisson_times(pair_rate * (1.0 - es) * ei, duration_s, rng);
        pdc_s = merge_sorted({both, std::move(only_s)});
        pdc_i = merge_sorted({std::move(both), std::move(only_i)});
    }

    auto photoluminescence = [&](double eta) -> std::vector<double> {
        if (const auto* sat = std::get_if<SaturationNoise>(&source.noise)) {
            return simulate_emitter(pump, *sat, eta, duration_s, rng);
        }
        if (const auto* pl = std::get_if<PowerLawNoise>(&source.noise)) {
            return poisson_times(eta * power_law_rate(*pl, power), duration_s, rng);
        }
        return {};
    };
    std::vector<double> pl_s = photoluminescence(es);
    std::vector<double> pl_i = photoluminescence(ei);
    std::vector<double> dark_s = poisson_times(det_s.dark_rate, duration_s, rng);
    std::vector<double> dark_i = poisson_times(det_i.dark_rate, duration_s, rng);

    auto finish = [&](Channel ch,
                      std::vector<double> pdc,
                      std::vector<double> pl,
                      std::vector<double> dark,
                      const DetectorConfig& det) {
        EventStream stream{ch, duration_s, merge_sorted({std::move(pdc), std::move(pl), std::move(dark)})};
        apply_dead_time(stream.timestamps_s, det.dead_time_s);
        if (det.gate) {
            stream = apply_gate(stream, *det.gate, pump.period_s());
        }
        return stream;
    };

    StreamPair out;
    out.signal = finish(Channel::signal, std::move(pdc_s), std::move(pl_s), std::move(dark_s), det_s);
    out.idler = finish(Channel::idler, std::move(pdc_i), std::move(pl_i), std::move(dark_i), det_i);
    return out;
}

SweepRecord simulate_point(const PumpConfig& pump_template,
                           const SourceParams& source,
                           const DetectorConfig& det_s,
                           const DetectorConfig& det_i,
                           double power_uw,
                           double duration_s,
                           std::uint64_t seed,
                           std::size_t point_index,
                           const SweepOptions& options)
{
    if (!(duration_s > 0.0)) {
        throw std::invalid_argument("simulation duration must be > 0");
    }
    if (power_uw < 0.0) {
        throw std::invalid_argument("sweep powers must be >= 0");
    }
    PumpConfig pump = pump_template;
    pump.average_power_uw = power_uw;

    // Chunk length from the expected event rate; sizing only.
    SourceParams expected = source;
    expected.r_bg = 0.0;
    const Rates rates = evaluate_rates(expected, power_uw);
    const double event_rate = rates.singles_s + rates.singles_i + det_s.dark_rate + det_i.dark_rate;
    const double expected_events = event_rate * duration_s;
    const auto max_events = static_cast<double>(std::max<std::size_t>(options.max_events_per_chunk, 1));
    double chunk_duration = duration_s / std::max(1.0, std::ceil(expected_events / max_events));
    if (pump.mode == PumpMode::pulsed && chunk_duration < duration_s) {
        // Whole pulse periods per chunk keep the stitched streams on the pulse clock.
        chunk_duration = std::ceil(chunk_duration / pump.period_s()) * pump.period_s();
    }
    const auto n_chunks = static_cast<std::uint64_t>(std::max(1.0, std::ceil(duration_s / chunk_duration - 1e-9)));

    SweepRecord rec;
    rec.power_uw = power_uw;
    rec.duration_s = duration_s;
    rec.gate_width_s = det_s.gate ? det_s.gate->width_s : 0.0;
    rec.tau_c_s = source.tau_c;
    for (std::uint64_t c = 0; c < n_chunks; ++c) {
        Rng rng = make_substream(seed, {static_cast<std::uint64_t>(point_index), c});
        const double start = static_cast<double>(c) * chunk_duration;
        const double length = std::min(chunk_duration, duration_s - start);
        const StreamPair streams = simulate_streams(pump, source, det_s, det_i, length, rng);
        rec.count_s += static_cast<std::int64_t>(streams.signal.size());
        rec.count_i += static_cast<std::int64_t>(streams.idler.size());
        rec.count_c += count_window_pairs(streams.signal.timestamps_s, streams.idler.timestamps_s, source.tau_c);
        if (options.on_chunk) {
            options.on_chunk(point_index, start, streams);
        }
    }
    return rec;
}

std::vector<SweepRecord> simulate_sweep(const PumpConfig& pump_template,
                                        const SourceParams& source,
                                        const DetectorConfig& det_s,
                                        const DetectorConfig& det_i,
                                        const std::vector<double>& powers_uw,
                                        double duration_s,
                                        std::uint64_t seed,
                                        const SweepOptions& options)
{
    if (powers_uw.empty()) {
        throw std::invalid_argument("power sweep needs at least one power");
    }
    if (!(duration_s > 0.0)) {
        throw std::invalid_argument("simulation duration must be > 0");
    }
    for (double p : powers_uw) {
        if (!(p >= 0.0)) {
            throw std::invalid_argument("sweep powers must be >= 0");
        }
    }
    validate(pump_template);
    validate(source);
    validate(det_s, pump_template);
    validate(det_i, pump_template);

    std::vector<SweepRecord> records(powers_uw.size());
    unsigned threads = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(powers_uw.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (std::size_t k = next++; k < powers_uw.size() && !failed; k = next++) {
            try {
                records[k] = simulate_point(pump_template, source, det_s, det_i, powers_uw[k], duration_s, seed, k,
                                            options);
            }
            catch (...) {
                if (!failed.exchange(true)) {
                    failure = std::current_exception();
                }
            }
        }
    };
    if (threads <= 1) {
        worker();
    }
    else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return records;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n)
{
    if (n == 0) {
        return {};
    }
    if (!(lo > 0.0) || !(hi >= lo)) {
        throw std::invalid_argument("log spacing needs 0 < lo <= hi");
    }
    if (n == 1) {
        return {lo};
    }
    std::vector<double> out(n);
    const double step = std::log(hi / lo) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = lo * std::exp(step * static_cast<double>(k));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

}  // namespace plpair
