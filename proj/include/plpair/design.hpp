// What-if predictions for modified devices: CAR curves with scaled
// photoluminescence or a detection gate, photoluminescence reduction from
// pump-wavelength and aluminium-composition shifts, and on-chip pair rates.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "plpair/model.hpp"

namespace plpair {

struct DesignScenario {
    SourceParams base;
    double pl_scale = 1.0;              // multiplier on f(P), >= 0
    std::optional<double> gate_width_s;  // replaces tau_c when set
    std::string label;
};

void validate(const DesignScenario& s);

struct CarPoint {
    double power_uw = 0.0;
    double car = 0.0;
};

std::vector<CarPoint> predict_car_curve(const DesignScenario& scenario, std::span<const double> powers_uw);

double scenario_car(const DesignScenario& scenario, double power_uw);

/// Power on the high-power side of the CAR maximum at which `scenario`
/// reaches `target_car`. Empty if the curve never drops to the target
/// within [peak, max_power_uw].
std::optional<double> equal_car_power(const DesignScenario& scenario, double target_car, double max_power_uw = 1e7);

/// Fraction of photoluminescence removed by moving the pump from
/// `lambda_from` to `lambda_to`: 1 - A(E_to)/A(E_from). Negative when the
/// move approaches the resonance.
double pl_reduction_wavelength(const LorentzianParams& lor, double lambda_from_nm, double lambda_to_nm);

/// Direct-gap Al(x)Ga(1-x)As bandgap, 1.424 + 1.247·x eV, for 0 <= x <= 0.45.
double algaas_bandgap(double x_al);

/// Inverse of algaas_bandgap over the same range.
double algaas_fraction(double e_g_ev);

/// Fraction removed at `pump_lambda_nm` when the resonance shifts with the
/// bandgap change from composition `x_from` to `x_to`.
double pl_reduction_composition(const LorentzianParams& lor, double x_from, double x_to, double pump_lambda_nm);

/// Total fraction removed by successive reductions: surviving fractions multiply.
double combine_reductions(std::span<const double> reductions);

struct CouplingChain {
    std::vector<std::pair<std::string, double>> stages;  // (name, transmission)

    double transmission() const;
};

void validate(const CouplingChain& chain);

struct OnchipRate {
    double xi_true = 0.0;    // pairs·s⁻¹·µW⁻¹ in the pump mode
    double pair_rate = 0.0;  // s⁻¹
};

/// Throws std::invalid_argument on a zero (or out-of-range) transmission or
/// negative power.
OnchipRate onchip_rate(double xi_measured, const CouplingChain& chain, double internal_power_uw);

}  // namespace plpair
