#include "plpair/design.hpp"

#include <cmath>
#include <stdexcept>

namespace plpair {

namespace {

constexpr double kXMax = 0.45;

}  // namespace

void validate(const DesignScenario& s)
{
    validate(s.base);
    if (!(s.pl_scale >= 0.0) || !std::isfinite(s.pl_scale)) {
        throw std::invalid_argument("pl_scale must be >= 0");
    }
    if (s.gate_width_s && !(*s.gate_width_s > 0.0)) {
        throw std::invalid_argument("gate width must be > 0");
    }
}

double scenario_car(const DesignScenario& scenario, double power_uw)
{
    SourceParams p = scenario.base;
    if (scenario.gate_width_s) {
        p.tau_c = *scenario.gate_width_s;
    }
    return car(evaluate_rates(p, power_uw, scenario.pl_scale));
}

std::vector<CarPoint> predict_car_curve(const DesignScenario& scenario, std::span<const double> powers_uw)
{
    validate(scenario);
    std::vector<CarPoint> out;
    out.reserve(powers_uw.size());
    for (double p : powers_uw) {
        if (!(p > 0.0)) {
            throw std::invalid_argument("CAR curve powers must be > 0");
        }
        out.push_back({p, scenario_car(scenario, p)});
    }
    return out;
}

std::optional<double> equal_car_power(const DesignScenario& scenario, double target_car, double max_power_uw)
{
    validate(scenario);
    // Coarse log scan for the maximum, then bisection on the falling branch.
    const double lo = 1e-6;
    const int n = 2000;
    double peak_p = lo;
    double peak_car = scenario_car(scenario, lo);
    const double step = std::log(max_power_uw / lo) / n;
    for (int k = 1; k <= n; ++k) {
        const double p = lo * std::exp(step * k);
        const double c = scenario_car(scenario, p);
        if (c > peak_car) {
            peak_car = c;
            peak_p = p;
        }
    }
    if (peak_car < target_car || scenario_car(scenario, max_power_uw) > target_car) {
        return std::nullopt;
    }
    double a = std::log(peak_p);
    double b = std::log(max_power_uw);
    for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
        const double m = 0.5 * (a + b);
        if (scenario_car(scenario, std::exp(m)) > target_car) {
            a = m;
        }
        else {
            b = m;
        }
    }
    return std::exp(0.5 * (a + b));
}

double pl_reduction_wavelength(const LorentzianParams& lor, double lambda_from_nm, double lambda_to_nm)
{
    validate(lor);
    const double from = lorentzian_rate(lor, wavelength_to_energy(lambda_from_nm));
    const double to = lorentzian_rate(lor, wavelength_to_energy(lambda_to_nm));
    return 1.0 - to / from;
}

double algaas_bandgap(double x_al)
{
    if (!(x_al >= 0.0 && x_al <= kXMax)) {
        throw std::invalid_argument("aluminium fraction must lie in [0, 0.45]");
    }
    return 1.424 + 1.247 * x_al;
}

double algaas_fraction(double e_g_ev)
{
    const double x = (e_g_ev - 1.424) / 1.247;
    if (!(x >= 0.0 && x <= kXMax)) {
        throw std::invalid_argument("bandgap outside the direct-gap AlGaAs range");
    }
    return x;
}

double pl_reduction_composition(const LorentzianParams& lor, double x_from, double x_to, double pump_lambda_nm)
{
    validate(lor);
    const double shift = algaas_bandgap(x_to) - algaas_bandgap(x_from);
    const double e = wavelength_to_energy(pump_lambda_nm);
    LorentzianParams moved = lor;
    moved.e_g += shift;
    return 1.0 - lorentzian_rate(moved, e) / lorentzian_rate(lor, e);
}

double combine_reductions(std::span<const double> reductions)
{
    double surviving = 1.0;
    for (double r : reductions) {
        surviving *= 1.0 - r;
    }
    return 1.0 - surviving;
}

double CouplingChain::transmission() const
{
    double t = 1.0;
    for (const auto& [name, value] : stages) {
        t *= value;
    }
    return t;
}

void validate(const CouplingChain& chain)
{
    for (const auto& [name, value] : chain.stages) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw std::invalid_argument("transmission of '" + name + "' must lie in [0, 1]");
        }
        if (value == 0.0) {
            throw std::invalid_argument("transmission of '" + name + "' is zero; the true rate is unidentifiable");
        }
    }
}

OnchipRate onchip_rate(double xi_measured, const CouplingChain& chain, double internal_power_uw)
{
    validate(chain);
    if (!(internal_power_uw >= 0.0)) {
        throw std::invalid_argument("internal power must be >= 0");
    }
    OnchipRate r;
    r.xi_true = xi_measured / chain.transmission();
    r.pair_rate = r.xi_true * internal_power_uw;
    return r;
}

}  // namespace plpair
