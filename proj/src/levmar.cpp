#include "plpair/levmar.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plpair {

namespace {

double logistic(double u)
{
    return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

bool all_finite(const Eigen::VectorXd& v)
{
    return v.allFinite();
}

}  // namespace

double ParamTransform::to_internal(double x) const
{
    const bool has_lo = std::isfinite(bounds.lo);
    const bool has_hi = std::isfinite(bounds.hi);
    if (has_lo && has_hi) {
        const double z = (x - bounds.lo) / (bounds.hi - bounds.lo);
        return std::log(z / (1.0 - z));
    }
    if (has_lo) {
        return std::log(x - bounds.lo);
    }
    if (has_hi) {
        return std::log(bounds.hi - x);
    }
    return x;
}

double ParamTransform::to_external(double u) const
{
    const bool has_lo = std::isfinite(bounds.lo);
    const bool has_hi = std::isfinite(bounds.hi);
    if (has_lo && has_hi) {
        return bounds.lo + (bounds.hi - bounds.lo) * logistic(u);
    }
    if (has_lo) {
        return bounds.lo + std::exp(u);
    }
    if (has_hi) {
        return bounds.hi - std::exp(u);
    }
    return u;
}

double ParamTransform::derivative(double u) const
{
    const bool has_lo = std::isfinite(bounds.lo);
    const bool has_hi = std::isfinite(bounds.hi);
    if (has_lo && has_hi) {
        const double s = logistic(u);
        return (bounds.hi - bounds.lo) * s * (1.0 - s);
    }
    if (has_lo) {
        return std::exp(u);
    }
    if (has_hi) {
        return -std::exp(u);
    }
    return 1.0;
}

double ParamTransform::clamp_inside(double x) const
{
    const bool has_lo = std::isfinite(bounds.lo);
    const bool has_hi = std::isfinite(bounds.hi);
    if (has_lo && has_hi) {
        const double span = bounds.hi - bounds.lo;
        return std::clamp(x, bounds.lo + 1e-9 * span, bounds.hi - 1e-9 * span);
    }
    if (has_lo && x <= bounds.lo) {
        return bounds.lo + std::max(1e-300, 1e-12 * std::abs(bounds.lo));
    }
    if (has_hi && x >= bounds.hi) {
        return bounds.hi - std::max(1e-300, 1e-12 * std::abs(bounds.hi));
    }
    return x;
}

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x, double step)
{
    const Eigen::VectorXd r0 = f(x);
    Eigen::MatrixXd jac(r0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = step * std::max(1.0, std::abs(x[j]));
        Eigen::VectorXd xp = x;
        Eigen::VectorXd xm = x;
        xp[j] += h;
        xm[j] -= h;
        jac.col(j) = (f(xp) - f(xm)) / (xp[j] - xm[j]);
    }
    return jac;
}

LevMarResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd x, const LevMarOptions& opt)
{
    LevMarResult out;
    Eigen::VectorXd r = f(x);
    if (!all_finite(r)) {
        throw std::runtime_error("residuals are not finite at the starting point");
    }
    double cost = 0.5 * r.squaredNorm();
    Eigen::MatrixXd jac = numeric_jacobian(f, x, opt.fd_step);

    double lambda = 1e-3;
    double nu = 2.0;
    const Eigen::Index n = x.size();

    auto finish = [&](bool converged, std::string reason) {
        out.x = x;
        out.residuals = r;
        out.jacobian = jac;
        out.cost = cost;
        out.converged = converged;
        out.reason = std::move(reason);
        return out;
    };

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        out.iterations = iter + 1;
        const Eigen::MatrixXd a = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;

        // Scale-free gradient test: every column nearly orthogonal to r.
        double worst_cos = 0.0;
        const double rnorm = std::sqrt(2.0 * cost);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double cn = std::sqrt(a(j, j));
            if (cn > 0.0 && rnorm > 0.0) {
                worst_cos = std::max(worst_cos, std::abs(g[j]) / (cn * rnorm));
            }
        }
        if (rnorm == 0.0 || worst_cos <= opt.gtol) {
            return finish(true, "gradient");
        }

        Eigen::VectorXd diag = a.diagonal();
        const double dmax = std::max(diag.maxCoeff(), 1e-300);
        for (Eigen::Index j = 0; j < n; ++j) {
            diag[j] = std::max(diag[j], 1e-12 * dmax);
        }

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = a;
            damped.diagonal() += lambda * diag;
            const Eigen::VectorXd step = damped.ldlt().solve(-g);
            const Eigen::VectorXd x_new = x + step;
            const Eigen::VectorXd r_new = f(x_new);
            const double cost_new = all_finite(r_new) ? 0.5 * r_new.squaredNorm() : std::numeric_limits<double>::infinity();
            const double predicted = -(step.dot(g) + 0.5 * step.dot(a * step));
            const double actual = cost - cost_new;
            const double rho = predicted > 0.0 ? actual / predicted : -1.0;

            if (std::isfinite(cost_new) && actual > 0.0 && rho > 0.0) {
                x = x_new;
                r = r_new;
                const double cost_old = cost;
                cost = cost_new;
                jac = numeric_jacobian(f, x, opt.fd_step);
                lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                nu = 2.0;
                accepted = true;
                if (step.norm() <= opt.xtol * (x.norm() + opt.xtol)) {
                    return finish(true, "step");
                }
                if (actual <= opt.ftol * cost_old && predicted <= opt.ftol * cost_old) {
                    return finish(true, "cost");
                }
            }
            else {
                lambda *= nu;
                nu *= 2.0;
                if (lambda > 1e30 || step.norm() <= opt.xtol * (x.norm() + opt.xtol)) {
                    // No descent left at machine precision: a stationary point.
                    return finish(true, "stalled");
                }
            }
        }
    }
    return finish(false, "iteration cap");
}

}  // namespace plpair
