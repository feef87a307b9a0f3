#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "plpair/levmar.hpp"

using namespace plpair;

TEST_CASE("transforms round-trip and stay inside their bounds")
{
    const Bounds cases[] = {Bounds::free(), Bounds::positive(), Bounds::unit(), Bounds::between(0.0, 3.0),
                            Bounds{-std::numeric_limits<double>::infinity(), 2.0}};
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 5.0);
    for (const Bounds& b : cases) {
        const ParamTransform tr{b};
        for (int k = 0; k < 200; ++k) {
            const double u = n(rng);
            const double x = tr.to_external(u);
            CHECK(b.contains(x));
            CHECK(tr.to_internal(x) == doctest::Approx(u).epsilon(1e-9));
            const double h = 1e-6;
            const double fd = (tr.to_external(u + h) - tr.to_external(u - h)) / (2 * h);
            CHECK(tr.derivative(u) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
    const ParamTransform unit{Bounds::unit()};
    CHECK(std::isfinite(unit.to_internal(unit.clamp_inside(1.0))));
    CHECK(std::isfinite(unit.to_internal(unit.clamp_inside(0.0))));
    const ParamTransform pos{Bounds::positive()};
    CHECK(std::isfinite(pos.to_internal(pos.clamp_inside(-3.0))));
}

TEST_CASE("linear least squares reaches the normal-equation solution")
{
    Eigen::MatrixXd a(6, 2);
    Eigen::VectorXd y(6);
    for (int k = 0; k < 6; ++k) {
        a(k, 0) = 1.0;
        a(k, 1) = k;
        y[k] = 2.0 + 0.5 * k + (k % 2 ? 0.1 : -0.1);
    }
    const Eigen::VectorXd exact = (a.transpose() * a).ldlt().solve(a.transpose() * y);
    ResidualFn f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x - y; };
    const auto r = levenberg_marquardt(f, Eigen::VectorXd::Zero(2));
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(exact[0]).epsilon(1e-8));
    CHECK(r.x[1] == doctest::Approx(exact[1]).epsilon(1e-8));
}

TEST_CASE("Rosenbrock valley")
{
    ResidualFn f = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(2);
        r << 10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0];
        return r;
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    const auto r = levenberg_marquardt(f, x0);
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("exponential decay fit")
{
    std::vector<double> t;
    std::vector<double> y;
    for (int k = 0; k < 30; ++k) {
        t.push_back(0.2 * k);
        y.push_back(3.0 * std::exp(-0.7 * t.back()) + 0.5);
    }
    ResidualFn f = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(t.size()));
        for (std::size_t k = 0; k < t.size(); ++k) {
            r[static_cast<Eigen::Index>(k)] = x[0] * std::exp(-x[1] * t[k]) + x[2] - y[k];
        }
        return r;
    };
    Eigen::VectorXd x0(3);
    x0 << 1.0, 0.1, 0.0;
    const auto r = levenberg_marquardt(f, x0);
    CHECK(r.converged);
    CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(r.x[1] == doctest::Approx(0.7).epsilon(1e-7));
    CHECK(r.x[2] == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(r.cost < 1e-18);
}

TEST_CASE("non-finite start is rejected")
{
    ResidualFn f = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(1);
        r << std::log(x[0]);
        return r;
    };
    Eigen::VectorXd x0(1);
    x0 << -1.0;
    CHECK_THROWS_AS(levenberg_marquardt(f, x0), std::runtime_error);
}

TEST_CASE("iteration cap is reported as non-convergence")
{
    ResidualFn f = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(2);
        r << 10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0];
        return r;
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    LevMarOptions opt;
    opt.max_iterations = 2;
    const auto r = levenberg_marquardt(f, x0, opt);
    CHECK_FALSE(r.converged);
    CHECK(r.reason == "iteration cap");
}
