// Damped Gauss-Newton (Levenberg-Marquardt) least squares over unconstrained
// coordinates, plus the bound-enforcing parameter transforms used to map
// physical parameters onto them.
#pragma once

#include <functional>
#include <limits>
#include <string>

#include <Eigen/Dense>

namespace plpair {

/// Box constraint on a physical parameter. Infinite ends are open.
struct Bounds {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static Bounds positive() { return {0.0, std::numeric_limits<double>::infinity()}; }
    static Bounds unit() { return {0.0, 1.0}; }
    static Bounds between(double lo, double hi) { return {lo, hi}; }
    static Bounds free() { return {}; }

    bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Bijection between the open box and the real line: identity when
/// unbounded, log(x - lo) / log(hi - x) when half-bounded, scaled logit when
/// bounded on both sides.
struct ParamTransform {
    Bounds bounds;

    double to_internal(double x) const;
    double to_external(double u) const;
    /// d external / d internal at internal coordinate u.
    double derivative(double u) const;
    /// Pulls x strictly inside the box so to_internal stays finite.
    double clamp_inside(double x) const;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LevMarOptions {
    int max_iterations = 500;
    double xtol = 1e-10;  // relative step
    double ftol = 1e-15;  // relative cost reduction
    double gtol = 1e-12;  // cosine between residual and Jacobian columns
    double fd_step = 1e-7;
};

struct LevMarResult {
    Eigen::VectorXd x;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd jacobian;
    double cost = 0.0;  // 0.5·|r|²
    int iterations = 0;
    bool converged = false;
    std::string reason;
};

/// Central-difference Jacobian of `f` at `x`.
Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x, double step);

/// Minimizes 0.5·|f(x)|². Throws std::runtime_error if the residuals at the
/// starting point are not finite.
LevMarResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd x0, const LevMarOptions& options = {});

}  // namespace plpair
