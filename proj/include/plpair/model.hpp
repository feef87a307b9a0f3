// Closed-form rate models for a photon-pair source contaminated by
// photoluminescence.
//
// Units used throughout the library:
//   power            µW of average pump power before the in-coupling optics
//   rates            s⁻¹
//   pair efficiency  pairs·s⁻¹·µW⁻¹
//   times            s
//   energies         eV, wavelengths nm
#pragma once

#include <variant>

namespace plpair {

/// hc in eV·nm (CODATA).
inline constexpr double kHcEvNm = 1239.841984;

enum class Channel { signal, idler };

const char* to_string(Channel ch);

struct NoNoise {};

/// f(P) = gamma_p · P^alpha
struct PowerLawNoise {
    double gamma_p = 0.0;  // photons·s⁻¹·µW⁻ᵅ
    double alpha = 1.0;    // (0, 3]
};

/// f(P) = gamma_s·P / (1 + beta·gamma_s·P), the non-paralyzable dead-time
/// throughput of an emitter excited at rate gamma_s·P.
struct SaturationNoise {
    double gamma_s = 0.0;  // photons·s⁻¹·µW⁻¹
    double beta = 0.0;     // effective lifetime, s
};

using NoiseModel = std::variant<NoNoise, PowerLawNoise, SaturationNoise>;

const char* noise_kind(const NoiseModel& model);

struct SourceParams {
    double xi = 0.0;     // pairs·s⁻¹·µW⁻¹
    double eta_s = 0.0;  // Klyshko efficiency, signal
    double eta_i = 0.0;  // Klyshko efficiency, idler
    double r_bg = 0.0;   // background rate per channel, s⁻¹
    double tau_c = 0.0;  // coincidence window, s
    NoiseModel noise = NoNoise{};

    double eta(Channel ch) const { return ch == Channel::signal ? eta_s : eta_i; }
};

/// Throws std::invalid_argument naming the first violated invariant.
void validate(const NoiseModel& model);
void validate(const SourceParams& params);

/// A(P) = a·P^alpha + r0
struct OffsetPowerLaw {
    double a = 0.0;
    double alpha = 1.0;
    double r0 = 0.0;
};

/// A(E) = n / (1 + ((E - e_g)/sigma)^2)
struct LorentzianParams {
    double n = 1.0;      // peak scale, photons·s⁻¹·µW⁻¹
    double sigma = 1.0;  // half width, eV
    double e_g = 1.0;    // resonance energy, eV
};

void validate(const LorentzianParams& p);

double noise_rate(const NoiseModel& model, double power_uw);

/// All rate-model observables at one power. `noise_scale` multiplies f(P)
/// before it enters the singles; it is 1 for the measured device.
struct Rates {
    double singles_s = 0.0;
    double singles_i = 0.0;
    double true_coincidences = 0.0;
    double accidentals = 0.0;

    double coincidences() const { return true_coincidences + accidentals; }
};

Rates evaluate_rates(const SourceParams& params, double power_uw, double noise_scale = 1.0);

double singles_rate(const SourceParams& params, Channel ch, double power_uw);
double coincidence_rate(const SourceParams& params, double power_uw);
double accidentals(double r_s, double r_i, double tau_c);

/// Coincidence-to-accidentals ratio, R_c / (tau_c·R_s·R_i).
double car(const SourceParams& params, double power_uw);
double car(const Rates& rates);

double offset_power_law_rate(const OffsetPowerLaw& p, double power_uw);
double lorentzian_rate(const LorentzianParams& p, double photon_energy_ev);

double wavelength_to_energy(double lambda_nm);
double energy_to_wavelength(double energy_ev);

}  // namespace plpair
