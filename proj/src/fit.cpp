#include "plpair/fit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace plpair {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNullEigenTol = 1e-12;

struct Engine {
    const CurveFitSpec& spec;
    std::vector<std::size_t> free_index;  // spec index of each free parameter
    std::vector<ParamTransform> transforms;
    std::vector<double> weights;
    mutable std::vector<double> predicted;
    mutable std::vector<double> theta;

    explicit Engine(const CurveFitSpec& s) : spec(s)
    {
        for (std::size_t k = 0; k < spec.params.size(); ++k) {
            if (!spec.params[k].fixed) {
                free_index.push_back(k);
                transforms.push_back(ParamTransform{spec.params[k].bounds});
            }
        }
        theta.resize(spec.params.size());
        predicted.resize(spec.data.size());
        weights.assign(spec.data.size(), 1.0);
    }

    std::size_t n_free() const { return free_index.size(); }

    void fill_fixed(std::vector<double>& full) const
    {
        for (std::size_t k = 0; k < spec.params.size(); ++k) {
            if (spec.params[k].fixed) {
                full[k] = *spec.params[k].fixed;
            }
        }
    }

    std::vector<double> external(const Eigen::VectorXd& u) const
    {
        std::vector<double> full(spec.params.size());
        fill_fixed(full);
        for (std::size_t j = 0; j < n_free(); ++j) {
            full[free_index[j]] = transforms[j].to_external(u[static_cast<Eigen::Index>(j)]);
        }
        return full;
    }

    Eigen::VectorXd internal(const std::vector<double>& full) const
    {
        Eigen::VectorXd u(static_cast<Eigen::Index>(n_free()));
        for (std::size_t j = 0; j < n_free(); ++j) {
            const double x = transforms[j].clamp_inside(full[free_index[j]]);
            u[static_cast<Eigen::Index>(j)] = transforms[j].to_internal(x);
        }
        return u;
    }

    Eigen::VectorXd weighted_residuals(const std::vector<double>& full) const
    {
        spec.predict(full, predicted);
        Eigen::VectorXd r(static_cast<Eigen::Index>(spec.data.size()));
        for (std::size_t k = 0; k < spec.data.size(); ++k) {
            r[static_cast<Eigen::Index>(k)] = std::sqrt(weights[k]) * (spec.data[k].value - predicted[k]);
        }
        return r;
    }

    void set_weights(const std::vector<double>* model)
    {
        for (std::size_t k = 0; k < spec.data.size(); ++k) {
            const Observation& obs = spec.data[k];
            switch (spec.weighting) {
            case Weighting::unweighted:
                weights[k] = 1.0;
                break;
            case Weighting::inverse_variance:
                weights[k] = 1.0 / (obs.sigma * obs.sigma);
                break;
            case Weighting::poisson: {
                const double rate = model ? (*model)[k] : obs.value;
                const double floor = 1.0 / obs.exposure;  // one count
                weights[k] = obs.exposure / std::max(rate, floor);
                break;
            }
            }
        }
    }
};

struct Attempt {
    std::vector<double> theta;
    std::vector<double> weights;
    LevMarResult lm;
    double chi2 = kInf;
    int iterations = 0;
};

Attempt run_attempt(Engine& eng, std::vector<double> start, const FitOptions& options)
{
    Attempt att;
    eng.set_weights(nullptr);
    Eigen::VectorXd u = eng.internal(start);
    const bool iterate_weights = eng.spec.weighting == Weighting::poisson;
    const int rounds = iterate_weights ? std::max(1, options.max_reweight) : 1;
    for (int round = 0; round < rounds; ++round) {
        ResidualFn f = [&](const Eigen::VectorXd& x) { return eng.weighted_residuals(eng.external(x)); };
        att.lm = levenberg_marquardt(f, u, options.lm);
        att.iterations += att.lm.iterations;
        const Eigen::VectorXd delta = att.lm.x - u;
        u = att.lm.x;
        if (!iterate_weights) {
            break;
        }
        const std::vector<double> full = eng.external(u);
        eng.spec.predict(full, eng.predicted);
        std::vector<double> model = eng.predicted;
        eng.set_weights(&model);
        const double rel = delta.norm() / (u.norm() + 1e-30);
        if (round > 0 && rel < options.reweight_tol) {
            break;
        }
    }
    att.theta = eng.external(u);
    att.weights = eng.weights;
    att.chi2 = eng.weighted_residuals(att.theta).squaredNorm();
    return att;
}

std::string describe_direction(const Eigen::VectorXd& v, const std::vector<std::string>& names)
{
    std::ostringstream os;
    os << std::setprecision(2) << std::fixed;
    bool first = true;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (std::abs(v[j]) < 0.05) {
            continue;
        }
        const double c = v[j];
        if (first) {
            os << c << "*" << names[static_cast<std::size_t>(j)];
        }
        else {
            os << (c < 0 ? " - " : " + ") << std::abs(c) << "*" << names[static_cast<std::size_t>(j)];
        }
        first = false;
    }
    return os.str();
}

double r_squared(const std::vector<double>& obs, const std::vector<double>& pred)
{
    if (obs.empty()) {
        return 1.0;
    }
    const double mean = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(obs.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        ss_res += (obs[k] - pred[k]) * (obs[k] - pred[k]);
        ss_tot += (obs[k] - mean) * (obs[k] - mean);
    }
    if (ss_tot == 0.0) {
        return ss_res == 0.0 ? 1.0 : 0.0;
    }
    return 1.0 - ss_res / ss_tot;
}

}  // namespace

const FitParameter& FitResult::param(std::string_view name) const
{
    for (const auto& p : params) {
        if (p.name == name) {
            return p;
        }
    }
    throw std::out_of_range("no fit parameter named " + std::string(name));
}

double two_sided_p_value(double t_value, int dof)
{
    if (std::isnan(t_value)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double t = std::abs(t_value);
    if (std::isinf(t)) {
        return 0.0;
    }
    if (dof <= 0) {
        boost::math::normal_distribution<double> gauss;
        return 2.0 * boost::math::cdf(boost::math::complement(gauss, t));
    }
    boost::math::students_t_distribution<double> dist(static_cast<double>(dof));
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
}

FitResult fit_curve(const CurveFitSpec& spec, const FitOptions& options)
{
    Engine eng(spec);
    const std::size_t k = eng.n_free();
    if (k == 0) {
        throw FitError(FitErrorKind::insufficient_data, "no free parameters to fit");
    }
    if (spec.data.size() <= k) {
        throw FitError(FitErrorKind::insufficient_data,
                       "need more observations (" + std::to_string(spec.data.size()) + ") than free parameters (" +
                           std::to_string(k) + ")");
    }

    std::vector<std::vector<double>> starts;
    starts.emplace_back();
    for (const auto& p : spec.params) {
        starts.back().push_back(p.fixed ? *p.fixed : p.initial);
    }
    for (const auto& alt : spec.alternative_starts) {
        starts.push_back(alt);
        eng.fill_fixed(starts.back());
    }

    // A free parameter that moves no residual at the start cannot be fitted.
    {
        eng.set_weights(nullptr);
        ResidualFn f = [&](const Eigen::VectorXd& x) { return eng.weighted_residuals(eng.external(x)); };
        const Eigen::VectorXd u0 = eng.internal(starts.front());
        const Eigen::VectorXd r0 = f(u0);
        if (!r0.allFinite()) {
            throw FitError(FitErrorKind::diverged, "model is not finite at the initial parameters");
        }
        const Eigen::MatrixXd j0 = numeric_jacobian(f, u0, options.lm.fd_step);
        std::vector<std::string> dead;
        for (std::size_t j = 0; j < k; ++j) {
            if (j0.col(static_cast<Eigen::Index>(j)).norm() == 0.0) {
                dead.push_back(spec.params[eng.free_index[j]].name);
            }
        }
        if (!dead.empty()) {
            std::string names;
            for (const auto& d : dead) {
                names += (names.empty() ? "" : ", ") + d;
            }
            throw FitError(FitErrorKind::singular_jacobian, "parameters without influence on the data: " + names, dead);
        }
    }

    Attempt best;
    bool have_best = false;
    for (const auto& start : starts) {
        Attempt att;
        try {
            att = run_attempt(eng, start, options);
        }
        catch (const std::runtime_error&) {
            continue;
        }
        if (!std::isfinite(att.chi2)) {
            continue;
        }
        if (!have_best || att.chi2 < best.chi2) {
            best = std::move(att);
            have_best = true;
        }
    }
    if (!have_best) {
        throw FitError(FitErrorKind::diverged, "fit diverged from every starting point");
    }

    eng.weights = best.weights;
    FitResult out;
    out.model = spec.model;
    out.observables = spec.observables;
    out.converged = best.lm.converged;
    out.iterations = best.iterations;
    out.termination = best.lm.reason;
    out.chi2 = best.chi2;
    out.dof = static_cast<int>(spec.data.size()) - static_cast<int>(k);

    // Natural-coordinate Jacobian at the solution by central differences.
    std::vector<std::string> free_names;
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(spec.data.size()), static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
        const ParamSpec& ps = spec.params[eng.free_index[j]];
        free_names.push_back(ps.name);
        const double x = best.theta[eng.free_index[j]];
        const double h = 1e-6 * std::max({std::abs(x), 1e-3 * std::abs(ps.scale), 1e-300});
        std::vector<double> tp = best.theta;
        std::vector<double> tm = best.theta;
        tp[eng.free_index[j]] = x + h;
        tm[eng.free_index[j]] = x - h;
        jac.col(static_cast<Eigen::Index>(j)) =
            (eng.weighted_residuals(tp) - eng.weighted_residuals(tm)) / (2.0 * h) * -1.0;
    }

    // Column-scaled information matrix; its null space is what the data
    // cannot determine.
    Eigen::VectorXd col_norm(static_cast<Eigen::Index>(k));
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
        col_norm[j] = jac.col(j).norm();
    }
    std::vector<bool> identifiable(k, true);
    Eigen::MatrixXd scaled = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(k); ++a) {
        for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(k); ++b) {
            if (col_norm[a] > 0.0 && col_norm[b] > 0.0) {
                scaled(a, b) = jac.col(a).dot(jac.col(b)) / (col_norm[a] * col_norm[b]);
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
    const Eigen::VectorXd evals = eig.eigenvalues();
    const Eigen::MatrixXd evecs = eig.eigenvectors();
    const double emax = std::max(evals.maxCoeff(), 0.0);
    Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (Eigen::Index e = 0; e < evals.size(); ++e) {
        if (evals[e] > kNullEigenTol * emax && emax > 0.0) {
            pinv += evecs.col(e) * evecs.col(e).transpose() / evals[e];
        }
        else {
            out.unidentifiable.push_back(describe_direction(evecs.col(e), free_names));
            for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
                if (std::abs(evecs(j, e)) > 0.05 || col_norm[j] == 0.0) {
                    identifiable[static_cast<std::size_t>(j)] = false;
                }
            }
        }
    }
    const double s2 = out.dof > 0 ? out.chi2 / out.dof : 1.0;
    out.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(k); ++a) {
        for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(k); ++b) {
            if (col_norm[a] > 0.0 && col_norm[b] > 0.0) {
                out.covariance(a, b) = s2 * pinv(a, b) / (col_norm[a] * col_norm[b]);
            }
        }
    }
    out.free_names = free_names;

    std::size_t fj = 0;
    for (std::size_t p = 0; p < spec.params.size(); ++p) {
        const ParamSpec& ps = spec.params[p];
        FitParameter fp;
        fp.name = ps.name;
        fp.unit = ps.unit;
        fp.estimate = best.theta[p];
        if (ps.fixed) {
            fp.fixed = true;
            fp.std_error = 0.0;
            fp.t_value = std::numeric_limits<double>::quiet_NaN();
            fp.p_value = std::numeric_limits<double>::quiet_NaN();
        }
        else {
            const auto j = static_cast<Eigen::Index>(fj);
            fp.identifiable = identifiable[fj];
            fp.std_error = fp.identifiable ? std::sqrt(std::max(out.covariance(j, j), 0.0)) : kInf;
            fp.t_value = fp.std_error > 0.0 ? fp.estimate / fp.std_error
                                            : (fp.estimate == 0.0 ? 0.0 : std::copysign(kInf, fp.estimate));
            fp.p_value = two_sided_p_value(fp.t_value, out.dof);
            ++fj;
        }
        out.params.push_back(fp);
    }

    spec.predict(best.theta, eng.predicted);
    for (std::size_t i = 0; i < spec.data.size(); ++i) {
        const Observation& obs = spec.data[i];
        out.residuals.push_back({obs.x, obs.observable, obs.value, eng.predicted[i], eng.weights[i]});
    }
    std::stable_sort(out.residuals.begin(), out.residuals.end(), [](const ResidualPoint& a, const ResidualPoint& b) {
        return a.observable != b.observable ? a.observable < b.observable : a.x < b.x;
    });

    const Goodness g = goodness(out);
    out.r_squared = g.r_squared;
    out.r_squared_by_observable = g.r_squared_by_observable;
    return out;
}

Goodness goodness(const FitResult& fit)
{
    Goodness g;
    const int n_obs = static_cast<int>(std::max<std::size_t>(fit.observables.size(), 1));
    g.r_squared = 1.0;
    for (int o = 0; o < n_obs; ++o) {
        std::vector<double> obs;
        std::vector<double> pred;
        for (const auto& r : fit.residuals) {
            if (r.observable == o) {
                obs.push_back(r.observed);
                pred.push_back(r.predicted);
            }
        }
        const double r2 = r_squared(obs, pred);
        g.r_squared_by_observable.push_back(r2);
        g.r_squared = std::min(g.r_squared, r2);
    }
    for (const auto& p : fit.params) {
        g.p_values.push_back(p.fixed ? std::numeric_limits<double>::quiet_NaN() : two_sided_p_value(p.t_value, fit.dof));
    }
    return g;
}

// ----------------------------------------------------------------------------

const char* to_string(RateModelKind kind)
{
    switch (kind) {
    case RateModelKind::none:
        return "none";
    case RateModelKind::power_law:
        return "powerlaw";
    case RateModelKind::saturation:
        return "saturation";
    }
    return "?";
}

RateModelKind parse_rate_model(std::string_view name)
{
    if (name == "none") {
        return RateModelKind::none;
    }
    if (name == "powerlaw" || name == "power-law" || name == "power_law") {
        return RateModelKind::power_law;
    }
    if (name == "saturation") {
        return RateModelKind::saturation;
    }
    throw std::invalid_argument("unknown rate model '" + std::string(name) + "'");
}

std::vector<std::string> rate_model_parameters(RateModelKind kind)
{
    std::vector<std::string> names{"xi", "eta_s", "eta_i", "r_bg"};
    if (kind == RateModelKind::power_law) {
        names.insert(names.end(), {"gamma_p", "alpha"});
    }
    else if (kind == RateModelKind::saturation) {
        names.insert(names.end(), {"gamma_s", "beta"});
    }
    return names;
}

namespace {

NoiseModel noise_from(RateModelKind kind, double a, double b)
{
    switch (kind) {
    case RateModelKind::power_law:
        return PowerLawNoise{a, b};
    case RateModelKind::saturation:
        return SaturationNoise{a, b};
    case RateModelKind::none:
        break;
    }
    return NoNoise{};
}

struct RateInitial {
    double xi, eta_s, eta_i, r_bg, gamma;
};

RateInitial initial_rate_guess(const std::vector<SweepRecord>& data)
{
    std::vector<SweepRecord> sorted = data;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.power_uw < b.power_uw; });

    // Background: intercept of a line through the lowest-power third.
    const std::size_t m = std::max<std::size_t>(2, sorted.size() / 3);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double min_single = kInf;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double y = 0.5 * (sorted[k].r_s() + sorted[k].r_i());
        min_single = std::min(min_single, std::max(y, 1e-12));
        if (k < m) {
            const double x = sorted[k].power_uw;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
    }
    const double dm = static_cast<double>(m);
    const double denom = dm * sxx - sx * sx;
    const double intercept = denom != 0.0 ? (sy * sxx - sx * sxy) / denom : 0.5 * min_single;
    RateInitial g{};
    g.r_bg = std::clamp(intercept, 0.05 * min_single, 0.95 * min_single);

    // Klyshko ratios from accidental-subtracted coincidences.
    double tc = 0, ns = 0, ni = 0, sp = 0;
    for (const auto& r : sorted) {
        tc += std::max(r.r_c() - r.tau_c_s * r.r_s() * r.r_i(), 0.0);
        ns += std::max(r.r_s() - g.r_bg, 0.0);
        ni += std::max(r.r_i() - g.r_bg, 0.0);
        sp += r.power_uw;
    }
    if (tc > 0.0 && ns > 0.0 && ni > 0.0 && sp > 0.0) {
        g.eta_s = std::clamp(tc / ni, 1e-9, 0.5);
        g.eta_i = std::clamp(tc / ns, 1e-9, 0.5);
        g.xi = tc / (g.eta_s * g.eta_i * sp);
    }
    else {
        g.eta_s = 0.01;
        g.eta_i = 0.01;
        g.xi = sp > 0.0 ? std::max(0.1 * ns / (g.eta_s * sp), 1e-6) : 1.0;
    }

    // Whatever singles the pairs do not explain seed the noise scale.
    double excess = 0.0;
    double gross = 0.0;
    for (const auto& r : sorted) {
        if (r.power_uw <= 0.0) {
            continue;
        }
        const double generated = (r.r_s() - g.r_bg) / g.eta_s;
        excess += std::max(generated - g.xi * r.power_uw, 0.0) / r.power_uw;
        gross += std::max(generated, 0.0) / r.power_uw;
    }
    const double npos = static_cast<double>(sorted.size());
    g.gamma = std::max(excess / npos, 0.05 * gross / npos);
    if (!(g.gamma > 0.0)) {
        g.gamma = std::max(g.xi, 1.0);
    }
    return g;
}

}  // namespace

FitResult fit_rate_model(const FitProblem& problem)
{
    const auto names = rate_model_parameters(problem.model);
    for (const auto& [name, value] : problem.fixed) {
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            throw std::invalid_argument("cannot fix unknown parameter '" + name + "'");
        }
    }

    std::vector<SweepRecord> data;
    for (const auto& r : problem.data) {
        const bool masked = std::find(problem.masked_powers.begin(), problem.masked_powers.end(), r.power_uw) !=
                            problem.masked_powers.end();
        if (!masked) {
            if (!(r.duration_s > 0.0) || !(r.tau_c_s > 0.0)) {
                throw std::invalid_argument("sweep records need positive duration and tau_c");
            }
            data.push_back(r);
        }
    }
    std::set<double> distinct;
    for (const auto& r : data) {
        if (!distinct.insert(r.power_uw).second) {
            throw std::invalid_argument("sweep powers must be distinct");
        }
    }
    const std::size_t n_free = names.size() - problem.fixed.size();
    if (data.size() < n_free + 1) {
        throw FitError(FitErrorKind::insufficient_data, "rate model needs at least " + std::to_string(n_free + 1) +
                                                            " distinct powers, got " + std::to_string(data.size()));
    }

    const RateInitial g = initial_rate_guess(data);
    const double tau = data.front().tau_c_s;

    CurveFitSpec spec;
    spec.model = to_string(problem.model);
    spec.observables = {"singles_s", "singles_i", "coincidences"};
    spec.weighting = problem.weighting;
    auto add = [&](const std::string& name, const std::string& unit, double init, Bounds b) {
        ParamSpec ps{name, unit, init, b, std::nullopt, std::abs(init)};
        if (auto it = problem.initial.find(name); it != problem.initial.end()) {
            ps.initial = it->second;
            ps.scale = std::abs(it->second);
        }
        if (auto it = problem.bounds.find(name); it != problem.bounds.end()) {
            ps.bounds = it->second;
        }
        if (auto it = problem.fixed.find(name); it != problem.fixed.end()) {
            ps.fixed = it->second;
        }
        if (ps.scale == 0.0) {
            ps.scale = 1.0;
        }
        spec.params.push_back(ps);
    };
    add("xi", "pairs/s/uW", g.xi, Bounds::positive());
    add("eta_s", "1", g.eta_s, Bounds::unit());
    add("eta_i", "1", g.eta_i, Bounds::unit());
    add("r_bg", "1/s", g.r_bg, Bounds::positive());
    if (problem.model == RateModelKind::power_law) {
        add("gamma_p", "photons/s/uW^alpha", g.gamma, Bounds::positive());
        add("alpha", "1", 1.0, Bounds::between(0.0, 3.0));
    }
    else if (problem.model == RateModelKind::saturation) {
        add("gamma_s", "photons/s/uW", g.gamma, Bounds::positive());
        add("beta", "s", tau, Bounds::positive());
    }

    for (const auto& r : data) {
        spec.data.push_back({r.power_uw, 0, r.r_s(), r.duration_s, 1.0});
        spec.data.push_back({r.power_uw, 1, r.r_i(), r.duration_s, 1.0});
        spec.data.push_back({r.power_uw, 2, r.r_c(), r.duration_s, 1.0});
    }
    const RateModelKind kind = problem.model;
    spec.predict = [data, kind](std::span<const double> th, std::vector<double>& out) {
        SourceParams p;
        p.xi = th[0];
        p.eta_s = th[1];
        p.eta_i = th[2];
        p.r_bg = th[3];
        p.noise = kind == RateModelKind::none ? NoiseModel{NoNoise{}} : noise_from(kind, th[4], th[5]);
        for (std::size_t k = 0; k < data.size(); ++k) {
            p.tau_c = data[k].tau_c_s;
            const Rates r = evaluate_rates(p, data[k].power_uw);
            out[3 * k] = r.singles_s;
            out[3 * k + 1] = r.singles_i;
            out[3 * k + 2] = r.coincidences();
        }
    };

    if (problem.model != RateModelKind::none) {
        std::vector<double> base;
        for (const auto& ps : spec.params) {
            base.push_back(ps.initial);
        }
        const bool user_noise_init = problem.initial.count(names[5]) != 0;
        if (!user_noise_init) {
            const std::vector<double> alternatives = problem.model == RateModelKind::power_law
                                                         ? std::vector<double>{0.7, 1.5}
                                                         : std::vector<double>{0.1 * tau, 10.0 * tau};
            for (double a : alternatives) {
                auto alt = base;
                alt[5] = a;
                spec.alternative_starts.push_back(alt);
            }
        }
    }
    return fit_curve(spec, problem.options);
}

SourceParams to_source_params(const FitResult& fit, RateModelKind kind, double tau_c)
{
    SourceParams p;
    p.xi = fit.value("xi");
    p.eta_s = fit.value("eta_s");
    p.eta_i = fit.value("eta_i");
    p.r_bg = fit.value("r_bg");
    p.tau_c = tau_c;
    if (kind == RateModelKind::power_law) {
        p.noise = PowerLawNoise{fit.value("gamma_p"), fit.value("alpha")};
    }
    else if (kind == RateModelKind::saturation) {
        p.noise = SaturationNoise{fit.value("gamma_s"), fit.value("beta")};
    }
    return p;
}

// ----------------------------------------------------------------------------

FitResult fit_offset_power_law(std::span<const CountPoint> data,
                               std::optional<OffsetPowerLaw> guess,
                               const FitOptions& options)
{
    if (data.size() < 4) {
        throw FitError(FitErrorKind::insufficient_data, "offset power law needs at least 4 points");
    }
    CurveFitSpec spec;
    spec.model = "offset-powerlaw";
    spec.observables = {"rate"};
    spec.weighting = Weighting::poisson;
    double pmax = 0.0;
    double rmin = kInf;
    double rmax = 0.0;
    for (const auto& d : data) {
        if (!(d.duration_s > 0.0)) {
            throw std::invalid_argument("count points need a positive duration");
        }
        spec.data.push_back({d.power_uw, 0, d.rate(), d.duration_s, 1.0});
        if (d.power_uw > pmax) {
            pmax = d.power_uw;
            rmax = d.rate();
        }
        rmin = std::min(rmin, d.rate());
    }
    OffsetPowerLaw g;
    if (guess) {
        g = *guess;
    }
    else {
        g.alpha = 1.0;
        g.r0 = std::max(rmin, 1e-3);
        g.a = pmax > 0.0 ? std::max(rmax - rmin, 1e-3 * std::max(rmax, 1.0)) / pmax : 1.0;
    }
    spec.params = {
        {"a", "photons/s/uW^alpha", g.a, Bounds::positive(), std::nullopt, std::max(std::abs(g.a), 1e-12)},
        {"alpha", "1", g.alpha, Bounds::between(0.0, 3.0), std::nullopt, 1.0},
        {"r0", "1/s", g.r0, Bounds::positive(), std::nullopt, std::max(std::abs(g.r0), 1e-12)},
    };
    spec.predict = [pts = std::vector<CountPoint>(data.begin(), data.end())](std::span<const double> th,
                                                                            std::vector<double>& out) {
        const OffsetPowerLaw m{th[0], th[1], th[2]};
        for (std::size_t k = 0; k < pts.size(); ++k) {
            out[k] = offset_power_law_rate(m, pts[k].power_uw);
        }
    };
    if (!guess) {
        for (double a : {0.7, 1.3}) {
            spec.alternative_starts.push_back({g.a * std::pow(pmax, 1.0 - a), a, g.r0});
        }
    }
    return fit_curve(spec, options);
}

OffsetPowerLaw to_offset_power_law(const FitResult& fit)
{
    return {fit.value("a"), fit.value("alpha"), fit.value("r0")};
}

FitResult fit_lorentzian(std::span<const SpectralPoint> data,
                         std::optional<LorentzianParams> guess,
                         const FitOptions& options)
{
    if (data.size() < 4) {
        throw FitError(FitErrorKind::insufficient_data, "Lorentzian fit needs at least 4 points");
    }
    CurveFitSpec spec;
    spec.model = "lorentzian";
    spec.observables = {"A"};
    spec.weighting = Weighting::inverse_variance;
    double e_peak = data.front().energy_ev;
    double v_peak = data.front().value;
    double e_lo = kInf;
    double e_hi = -kInf;
    for (const auto& d : data) {
        if (!(d.std_error > 0.0)) {
            throw std::invalid_argument("Lorentzian points need positive uncertainties");
        }
        if (!(d.energy_ev > 0.0)) {
            throw std::invalid_argument("photon energies must be > 0");
        }
        spec.data.push_back({d.energy_ev, 0, d.value, 1.0, d.std_error});
        if (d.value > v_peak) {
            v_peak = d.value;
            e_peak = d.energy_ev;
        }
        e_lo = std::min(e_lo, d.energy_ev);
        e_hi = std::max(e_hi, d.energy_ev);
    }
    const double span = std::max(e_hi - e_lo, 1e-6);
    LorentzianParams g = guess ? *guess : LorentzianParams{2.0 * std::max(v_peak, 1e-12), 0.25 * span, e_peak};
    spec.params = {
        {"n", "photons/s/uW", g.n, Bounds::positive(), std::nullopt, std::abs(g.n)},
        {"sigma", "eV", g.sigma, Bounds::positive(), std::nullopt, std::abs(g.sigma)},
        {"e_g", "eV", g.e_g, Bounds::positive(), std::nullopt, std::abs(g.e_g)},
    };
    spec.predict = [pts = std::vector<SpectralPoint>(data.begin(), data.end())](std::span<const double> th,
                                                                               std::vector<double>& out) {
        const LorentzianParams m{th[0], th[1], th[2]};
        for (std::size_t k = 0; k < pts.size(); ++k) {
            out[k] = lorentzian_rate(m, pts[k].energy_ev);
        }
    };
    if (!guess) {
        // The resonance may sit beyond the sampled energies; scan centers and widths.
        for (double shift : {0.0, 0.05, 0.1, 0.2, 0.4}) {
            for (double width : {0.05, 0.15, 0.5}) {
                const double e0 = e_peak + shift * span;
                const double s0 = width * span;
                const double z = (e_peak - e0) / s0;
                spec.alternative_starts.push_back({v_peak * (1.0 + z * z), s0, e0});
            }
        }
    }
    return fit_curve(spec, options);
}

LorentzianParams to_lorentzian(const FitResult& fit)
{
    return {fit.value("n"), fit.value("sigma"), fit.value("e_g")};
}

// ----------------------------------------------------------------------------

RunsTest runs_test(std::span<const double> values)
{
    RunsTest t;
    int prev = 0;
    for (double v : values) {
        if (v == 0.0) {
            continue;
        }
        const int sign = v > 0.0 ? 1 : -1;
        (sign > 0 ? t.n_positive : t.n_negative)++;
        if (sign != prev) {
            ++t.runs;
        }
        prev = sign;
    }
    const double np = t.n_positive;
    const double nn = t.n_negative;
    const double n = np + nn;
    if (np == 0.0 || nn == 0.0) {
        // A single run of one sign: maximal structure for n > 1.
        t.z = n > 1 ? -std::sqrt(n - 1.0) : 0.0;
        t.p_value = n > 1 ? two_sided_p_value(t.z, 0) : 1.0;
        return t;
    }
    const double mean = 2.0 * np * nn / n + 1.0;
    const double var = 2.0 * np * nn * (2.0 * np * nn - n) / (n * n * (n - 1.0));
    t.z = var > 0.0 ? (t.runs - mean) / std::sqrt(var) : 0.0;
    t.p_value = two_sided_p_value(t.z, 0);
    return t;
}

RunsTest runs_test(const FitResult& fit)
{
    std::vector<double> r;
    r.reserve(fit.residuals.size());
    for (const auto& p : fit.residuals) {
        r.push_back(p.residual());
    }
    return runs_test(r);
}

ModelComparison compare_models(std::span<const FitResult> fits, double flag_p)
{
    auto observed = [](const FitResult& f) {
        std::vector<std::pair<double, double>> v;
        for (const auto& r : f.residuals) {
            v.emplace_back(r.x, r.observed);
        }
        return v;
    };
    if (!fits.empty()) {
        const auto ref = observed(fits.front());
        for (const auto& f : fits.subspan(1)) {
            if (observed(f) != ref) {
                throw std::invalid_argument("compared fits must share identical data");
            }
        }
    }
    ModelComparison cmp;
    for (std::size_t k = 0; k < fits.size(); ++k) {
        const FitResult& f = fits[k];
        ModelRank r;
        r.index = k;
        r.model = f.model;
        r.r_squared = f.r_squared;
        r.reduced_chi2 = f.reduced_chi2();
        r.runs = runs_test(f);
        for (const auto& p : f.params) {
            if (!p.fixed && !(p.p_value <= flag_p)) {
                r.flagged.push_back(p.name);
            }
        }
        cmp.ranking.push_back(r);
    }
    std::stable_sort(cmp.ranking.begin(), cmp.ranking.end(), [](const ModelRank& a, const ModelRank& b) {
        if (a.reduced_chi2 != b.reduced_chi2) {
            return a.reduced_chi2 < b.reduced_chi2;
        }
        return a.r_squared > b.r_squared;
    });
    return cmp;
}

std::string ModelComparison::to_string() const
{
    std::ostringstream os;
    os << "rank  model            R^2         chi2/dof    runs z   flagged (p > threshold)\n";
    int rank = 1;
    for (const auto& r : ranking) {
        os << std::left << std::setw(6) << rank++ << std::setw(17) << r.model << std::setw(12) << std::setprecision(6)
           << r.r_squared << std::setw(12) << std::setprecision(4) << r.reduced_chi2 << std::setw(9)
           << std::setprecision(3) << r.runs.z;
        for (std::size_t k = 0; k < r.flagged.size(); ++k) {
            os << (k ? ", " : "") << r.flagged[k];
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace plpair
