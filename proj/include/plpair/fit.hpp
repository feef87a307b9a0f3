// Weighted nonlinear least-squares estimation of the rate models, the
// off-resonant power law and the Lorentzian resonance, with covariance-based
// uncertainties and model comparison.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "plpair/levmar.hpp"
#include "plpair/model.hpp"
#include "plpair/simulate.hpp"

namespace plpair {

enum class FitErrorKind { insufficient_data, singular_jacobian, diverged };

class FitError : public std::runtime_error {
public:
    FitError(FitErrorKind kind, const std::string& what, std::vector<std::string> unidentifiable = {})
        : std::runtime_error(what), kind_(kind), unidentifiable_(std::move(unidentifiable))
    {
    }
    FitErrorKind kind() const { return kind_; }
    /// For singular_jacobian: the parameters that the data cannot move.
    const std::vector<std::string>& unidentifiable() const { return unidentifiable_; }

private:
    FitErrorKind kind_;
    std::vector<std::string> unidentifiable_;
};

enum class Weighting {
    poisson,           // w = exposure / rate, iterated with model rates
    inverse_variance,  // w = 1 / sigma², sigma supplied per observation
    unweighted,
};

struct FitParameter {
    std::string name;
    std::string unit;
    double estimate = 0.0;
    double std_error = 0.0;  // +inf when the data cannot determine it
    double t_value = 0.0;
    double p_value = 1.0;
    bool fixed = false;
    bool identifiable = true;
};

struct ResidualPoint {
    double x = 0.0;  // power (µW) or photon energy (eV)
    int observable = 0;
    double observed = 0.0;
    double predicted = 0.0;
    double weight = 1.0;

    double residual() const { return observed - predicted; }
};

struct FitResult {
    std::string model;
    std::vector<FitParameter> params;  // free and fixed, in model order
    std::vector<std::string> free_names;
    Eigen::MatrixXd covariance;  // free parameters, order of free_names
    std::vector<std::string> observables;
    std::vector<ResidualPoint> residuals;  // grouped by observable, x ascending
    double r_squared = 0.0;                // worst observable
    std::vector<double> r_squared_by_observable;
    double chi2 = 0.0;
    int dof = 0;
    bool converged = false;
    int iterations = 0;
    std::string termination;
    /// Null directions of the information matrix, e.g. "0.71*eta_s - 0.70*gamma_p".
    std::vector<std::string> unidentifiable;

    const FitParameter& param(std::string_view name) const;
    double value(std::string_view name) const { return param(name).estimate; }
    double reduced_chi2() const { return dof > 0 ? chi2 / dof : 0.0; }
};

struct FitOptions {
    LevMarOptions lm;
    int max_reweight = 12;
    double reweight_tol = 1e-9;
};

// ----------------------------------------------------------------------------
// Generic engine

struct ParamSpec {
    std::string name;
    std::string unit;
    double initial = 0.0;
    Bounds bounds;
    std::optional<double> fixed;
    /// Typical magnitude, used for finite-difference steps near zero.
    double scale = 1.0;
};

struct Observation {
    double x = 0.0;
    int observable = 0;
    double value = 0.0;
    double exposure = 1.0;  // s, for Poisson weights
    double sigma = 1.0;     // for inverse-variance weights
};

/// Fills `predicted[k]` for every observation from the full parameter vector
/// (free and fixed, in spec order).
using PredictFn = std::function<void(std::span<const double> theta, std::vector<double>& predicted)>;

struct CurveFitSpec {
    std::string model;
    std::vector<ParamSpec> params;
    std::vector<std::string> observables;
    std::vector<Observation> data;
    PredictFn predict;
    Weighting weighting = Weighting::poisson;
    /// Extra starting points (full parameter vectors); the best final fit wins.
    std::vector<std::vector<double>> alternative_starts;
};

FitResult fit_curve(const CurveFitSpec& spec, const FitOptions& options = {});

// ----------------------------------------------------------------------------
// Coupled singles/coincidence rate model

enum class RateModelKind { none, power_law, saturation };

const char* to_string(RateModelKind kind);
RateModelKind parse_rate_model(std::string_view name);

/// Parameter names, in model order: xi, eta_s, eta_i, r_bg, then
/// gamma_p, alpha (power law) or gamma_s, beta (saturation).
std::vector<std::string> rate_model_parameters(RateModelKind kind);

struct FitProblem {
    std::vector<SweepRecord> data;
    RateModelKind model = RateModelKind::saturation;
    std::map<std::string, double> fixed;
    std::map<std::string, double> initial;
    std::map<std::string, Bounds> bounds;
    Weighting weighting = Weighting::poisson;
    std::vector<double> masked_powers;  // exact matches are excluded
    FitOptions options;
};

/// Joint fit of singles (both channels) and coincidences at every power.
/// Throws FitError{insufficient_data} with fewer distinct powers than free
/// parameters + 1, FitError{singular_jacobian} when a free parameter has no
/// influence at the starting point, FitError{diverged} on non-finite residuals.
/// A rank-deficient solution (e.g. xi -> 0) is reported, not thrown.
FitResult fit_rate_model(const FitProblem& problem);

SourceParams to_source_params(const FitResult& fit, RateModelKind kind, double tau_c);

// ----------------------------------------------------------------------------
// Off-resonant power law with offset and the Lorentzian resonance

struct CountPoint {
    double power_uw = 0.0;
    double duration_s = 1.0;
    std::int64_t count = 0;

    double rate() const { return static_cast<double>(count) / duration_s; }
};

FitResult fit_offset_power_law(std::span<const CountPoint> data,
                               std::optional<OffsetPowerLaw> guess = {},
                               const FitOptions& options = {});

OffsetPowerLaw to_offset_power_law(const FitResult& fit);

struct SpectralPoint {
    double energy_ev = 0.0;
    double value = 0.0;
    double std_error = 0.0;
};

FitResult fit_lorentzian(std::span<const SpectralPoint> data,
                         std::optional<LorentzianParams> guess = {},
                         const FitOptions& options = {});

LorentzianParams to_lorentzian(const FitResult& fit);

// ----------------------------------------------------------------------------
// Goodness of fit and model comparison

struct Goodness {
    double r_squared = 0.0;
    std::vector<double> r_squared_by_observable;
    std::vector<double> p_values;  // per parameter in fit order; fixed -> NaN
};

/// R² = 1 - SS_res/SS_tot per observable (unweighted), overall the worst one;
/// two-sided Student-t p-values with n - k degrees of freedom.
Goodness goodness(const FitResult& fit);

double two_sided_p_value(double t_value, int dof);

/// Wald-Wolfowitz runs test on the signs of a residual sequence.
struct RunsTest {
    int runs = 0;
    int n_positive = 0;
    int n_negative = 0;
    double z = 0.0;
    double p_value = 1.0;
};

RunsTest runs_test(std::span<const double> values);
RunsTest runs_test(const FitResult& fit);

struct ModelRank {
    std::size_t index = 0;  // position in the input list
    std::string model;
    double r_squared = 0.0;
    double reduced_chi2 = 0.0;
    RunsTest runs;
    std::vector<std::string> flagged;  // parameters with p above the threshold
};

struct ModelComparison {
    std::vector<ModelRank> ranking;  // best first
    std::string to_string() const;
};

/// Ranks fits of the same data, best first: lower reduced chi-square of the
/// weighted residuals, ties broken by R². Flags free parameters whose p-value
/// exceeds `flag_p`. Throws std::invalid_argument if the fits saw different data.
ModelComparison compare_models(std::span<const FitResult> fits, double flag_p = 0.01);

}  // namespace plpair
