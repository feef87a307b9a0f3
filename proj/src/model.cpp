#include "plpair/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace plpair {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void require(bool ok, const char* what)
{
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

}  // namespace

const char* to_string(Channel ch)
{
    return ch == Channel::signal ? "signal" : "idler";
}

const char* noise_kind(const NoiseModel& model)
{
    return std::visit(overloaded{
                          [](const NoNoise&) { return "none"; },
                          [](const PowerLawNoise&) { return "powerlaw"; },
                          [](const SaturationNoise&) { return "saturation"; },
                      },
                      model);
}

void validate(const NoiseModel& model)
{
    std::visit(overloaded{
                   [](const NoNoise&) {},
                   [](const PowerLawNoise& m) {
                       require(m.gamma_p >= 0.0, "power-law gamma_p must be >= 0");
                       require(m.alpha > 0.0 && m.alpha <= 3.0, "power-law alpha must lie in (0, 3]");
                   },
                   [](const SaturationNoise& m) {
                       require(m.gamma_s >= 0.0, "saturation gamma_s must be >= 0");
                       require(m.beta >= 0.0, "saturation beta must be >= 0");
                   },
               },
               model);
}

void validate(const SourceParams& p)
{
    require(p.xi >= 0.0, "xi must be >= 0");
    require(p.eta_s >= 0.0 && p.eta_s <= 1.0, "eta_s must lie in [0, 1]");
    require(p.eta_i >= 0.0 && p.eta_i <= 1.0, "eta_i must lie in [0, 1]");
    require(p.r_bg >= 0.0, "r_bg must be >= 0");
    require(p.tau_c > 0.0, "tau_c must be > 0");
    validate(p.noise);
}

void validate(const LorentzianParams& p)
{
    require(p.n > 0.0, "lorentzian n must be > 0");
    require(p.sigma > 0.0, "lorentzian sigma must be > 0");
    require(p.e_g > 0.0, "lorentzian e_g must be > 0");
}

double noise_rate(const NoiseModel& model, double power_uw)
{
    return std::visit(overloaded{
                          [](const NoNoise&) { return 0.0; },
                          [&](const PowerLawNoise& m) {
                              return power_uw > 0.0 ? m.gamma_p * std::pow(power_uw, m.alpha) : 0.0;
                          },
                          [&](const SaturationNoise& m) {
                              const double excitation = m.gamma_s * power_uw;
                              return excitation / (1.0 + m.beta * excitation);
                          },
                      },
                      model);
}

Rates evaluate_rates(const SourceParams& p, double power_uw, double noise_scale)
{
    const double pairs = p.xi * power_uw;
    const double generated = pairs + noise_scale * noise_rate(p.noise, power_uw);
    Rates r;
    r.singles_s = p.eta_s * generated + p.r_bg;
    r.singles_i = p.eta_i * generated + p.r_bg;
    r.true_coincidences = p.eta_s * p.eta_i * pairs;
    r.accidentals = accidentals(r.singles_s, r.singles_i, p.tau_c);
    return r;
}

double singles_rate(const SourceParams& p, Channel ch, double power_uw)
{
    return p.eta(ch) * (p.xi * power_uw + noise_rate(p.noise, power_uw)) + p.r_bg;
}

double coincidence_rate(const SourceParams& p, double power_uw)
{
    return evaluate_rates(p, power_uw).coincidences();
}

double accidentals(double r_s, double r_i, double tau_c)
{
    return tau_c * r_s * r_i;
}

double car(const Rates& r)
{
    if (r.accidentals <= 0.0) {
        throw std::domain_error("CAR undefined without accidental coincidences");
    }
    return 1.0 + r.true_coincidences / r.accidentals;
}

double car(const SourceParams& p, double power_uw)
{
    return car(evaluate_rates(p, power_uw));
}

double offset_power_law_rate(const OffsetPowerLaw& p, double power_uw)
{
    return (power_uw > 0.0 ? p.a * std::pow(power_uw, p.alpha) : 0.0) + p.r0;
}

double lorentzian_rate(const LorentzianParams& p, double photon_energy_ev)
{
    const double z = (photon_energy_ev - p.e_g) / p.sigma;
    return p.n / (1.0 + z * z);
}

double wavelength_to_energy(double lambda_nm)
{
    if (!(lambda_nm > 0.0)) {
        throw std::invalid_argument("wavelength must be > 0, got " + std::to_string(lambda_nm));
    }
    return kHcEvNm / lambda_nm;
}

double energy_to_wavelength(double energy_ev)
{
    if (!(energy_ev > 0.0)) {
        throw std::invalid_argument("photon energy must be > 0");
    }
    return kHcEvNm / energy_ev;
}

}  // namespace plpair
