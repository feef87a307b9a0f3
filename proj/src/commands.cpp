#include "plpair/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "plpair/config.hpp"
#include "plpair/design.hpp"
#include "plpair/fit.hpp"
#include "plpair/io.hpp"
#include "plpair/rng.hpp"
#include "plpair/simulate.hpp"

namespace plpair {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    std::string out_dir;
    std::string config_path;
    std::string preset_name;
    std::vector<std::string> overrides;

    void add(CLI::App* cmd, bool with_model_inputs)
    {
        seed_opt = cmd->add_option("--seed", seed, "Master seed; a recorded entropy seed is used when absent");
        cmd->add_option("--out", out_dir, "Output directory (default: $PLPAIR_OUTPUT_DIR or .)");
        if (with_model_inputs) {
            cmd->add_option("--config", config_path, "Configuration file (section.key = value)");
            cmd->add_option("--preset", preset_name, "Built-in parameter set")
                ->check(CLI::IsMember(preset_names()));
            cmd->add_option("--set", overrides, "Override a configuration key: section.key=value");
        }
    }

    fs::path output_dir() const
    {
        if (!out_dir.empty()) {
            return out_dir;
        }
        if (const char* env = std::getenv("PLPAIR_OUTPUT_DIR"); env && *env) {
            return env;
        }
        return ".";
    }

    std::uint64_t resolved_seed() const { return seed_opt->count() ? seed : entropy_seed_value(); }
    bool seed_given() const { return seed_opt->count() > 0; }

    Config config() const
    {
        Config cfg;
        if (!preset_name.empty()) {
            cfg.merge(preset(preset_name));
        }
        if (!config_path.empty()) {
            cfg.merge(Config::load(config_path));
        }
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw UsageError("--set expects section.key=value, got '" + o + "'");
            }
            cfg.set(o.substr(0, eq), o.substr(eq + 1));
        }
        cfg.check_known();
        return cfg;
    }

private:
    mutable std::optional<std::uint64_t> entropy_;
    std::uint64_t entropy_seed_value() const
    {
        if (!entropy_) {
            entropy_ = entropy_seed();
        }
        return *entropy_;
    }
};

void write_metadata(const fs::path& dir, const Common& c, std::uint64_t seed, const std::string& command,
                    const std::string& extra = {})
{
    std::string meta = "command = " + command + "\n";
    meta += "seed = " + std::to_string(seed) + "\n";
    meta += std::string("seed_source = ") + (c.seed_given() ? "user" : "entropy") + "\n";
    meta += extra;
    write_file_atomic(dir / "metadata.txt", meta);
}

std::string join_argv(int argc, const char* const* argv)
{
    std::string s;
    for (int k = 0; k < argc; ++k) {
        s += (k ? " " : "") + std::string(argv[k]);
    }
    return s;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::vector<double> powers;
    double power_min = 0.0;
    double power_max = 0.0;
    int points = 0;
    double duration = -1.0;
    double gate_ns = 0.0;
    unsigned threads = 0;
    bool timestamps = false;
};

int cmd_simulate(const Common& c, const SimulateArgs& a, const std::string& cmdline, std::ostream& out)
{
    Config cfg = c.config();
    std::vector<double> powers = a.powers;
    if (powers.empty()) {
        powers = cfg.numbers("run.powers_uw");
    }
    const double pmin = a.power_min > 0 ? a.power_min : cfg.number_or("run.power_min_uw", 0.0);
    const double pmax = a.power_max > 0 ? a.power_max : cfg.number_or("run.power_max_uw", 0.0);
    const int points = a.points > 0 ? a.points : static_cast<int>(cfg.number_or("run.points", 0.0));
    if (powers.empty() && pmin > 0 && pmax >= pmin && points > 0) {
        powers = log_spaced(pmin, pmax, static_cast<std::size_t>(points));
    }
    if (powers.empty()) {
        throw UsageError("no powers given (use --powers or --power-min/--power-max/--points)");
    }
    for (double p : powers) {
        if (!(p > 0.0)) {
            throw UsageError("powers must be > 0");
        }
    }
    const double duration = a.duration >= 0 ? a.duration : cfg.number_or("run.duration_s", 0.0);
    if (!(duration > 0.0)) {
        throw UsageError("duration must be > 0");
    }
    if (a.gate_ns > 0.0) {
        cfg.set("detector.gate_ns", format_number(a.gate_ns));
    }
    const PumpConfig pump = pump_from(cfg);
    const SourceParams source = source_from(cfg);
    const DetectorConfig det = detector_from(cfg, pump);

    std::uint64_t seed = c.resolved_seed();
    if (!c.seed_given() && cfg.has("run.seed")) {
        seed = static_cast<std::uint64_t>(*cfg.number("run.seed"));
    }

    SweepOptions opt;
    opt.threads = a.threads ? a.threads : static_cast<unsigned>(cfg.number_or("run.threads", 0.0));
    std::map<std::size_t, std::pair<EventStream, EventStream>> streams;
    std::mutex mu;
    if (a.timestamps) {
        opt.on_chunk = [&](std::size_t point, double start, const StreamPair& pair) {
            std::lock_guard lock(mu);
            auto& [s, i] = streams[point];
            s.channel = Channel::signal;
            i.channel = Channel::idler;
            for (double t : pair.signal.timestamps_s) {
                s.timestamps_s.push_back(start + t);
            }
            for (double t : pair.idler.timestamps_s) {
                i.timestamps_s.push_back(start + t);
            }
        };
    }
    const auto records = simulate_sweep(pump, source, det, det, powers, duration, seed, opt);

    const fs::path dir = c.output_dir();
    write_sweep_csv(dir / "sweep.csv", records);
    for (auto& [point, pair] : streams) {
        pair.first.duration_s = duration;
        pair.second.duration_s = duration;
        write_timestamps(dir / ("timestamps_" + std::to_string(point) + "_signal.bin"), pair.first);
        write_timestamps(dir / ("timestamps_" + std::to_string(point) + "_idler.bin"), pair.second);
    }
    std::string extra;
    for (const auto& k : cfg.keys()) {
        extra += "config." + k + " = " + *cfg.text(k) + "\n";
    }
    write_metadata(dir, c, seed, cmdline, extra);
    out << "wrote " << (dir / "sweep.csv").string() << " (" << records.size() << " points, seed " << seed << ")\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::string data;
    std::string model;
    std::vector<std::string> fix;
    std::vector<double> mask;
    double tau_c_ns = 0.0;
    std::string weighting;
};

int emit_fit(const fs::path& dir, const FitResult& fit, const std::string& params_cfg, std::ostream& out)
{
    write_file_atomic(dir / "fit.csv", fit_to_csv(fit));
    write_file_atomic(dir / "residuals.csv", residuals_to_csv(fit));
    const std::string report = fit_report(fit);
    write_file_atomic(dir / "fit_report.txt", report);
    write_file_atomic(dir / "params.cfg", params_cfg);
    out << report;
    return fit.converged ? exit_ok : exit_nonconvergence;
}

int cmd_fit(const Common& c, const FitArgs& a, const std::string& cmdline, std::ostream& out)
{
    const Config cfg = c.config();
    const std::string model = !a.model.empty() ? a.model : cfg.text("fit.model").value_or("saturation");
    const double tau_c = (a.tau_c_ns > 0 ? a.tau_c_ns : cfg.number_or("fit.tau_c_ns", 13.1)) * 1e-9;
    const std::string weighting_name = !a.weighting.empty() ? a.weighting : cfg.text("fit.weighting").value_or("poisson");
    Weighting weighting = Weighting::poisson;
    if (weighting_name == "unweighted") {
        weighting = Weighting::unweighted;
    }
    else if (weighting_name != "poisson") {
        throw UsageError("--weighting must be poisson or unweighted");
    }

    std::map<std::string, double> fixed;
    for (const auto& k : cfg.keys_with_prefix("fit.fix.")) {
        fixed[k.substr(8)] = *cfg.number(k);
    }
    for (const auto& f : a.fix) {
        const auto eq = f.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw UsageError("--fix expects name=value, got '" + f + "'");
        }
        try {
            fixed[f.substr(0, eq)] = parse_number(f.substr(eq + 1));
        }
        catch (const DataError&) {
            throw UsageError("--fix value for '" + f.substr(0, eq) + "' is not a number");
        }
    }
    std::vector<double> mask = a.mask;
    for (double m : cfg.numbers("fit.mask_uw")) {
        mask.push_back(m);
    }

    const std::uint64_t seed = c.resolved_seed();
    const fs::path dir = c.output_dir();
    const std::string text = read_file(a.data);

    if (model == "lorentzian") {
        const auto pts = spectral_from_csv(text);
        const FitResult fit = fit_lorentzian(pts);
        write_metadata(dir, c, seed, cmdline);
        return emit_fit(dir, fit, to_config(to_lorentzian(fit)), out);
    }
    if (model == "offset-powerlaw") {
        auto pts = counts_from_csv(text);
        std::erase_if(pts, [&](const CountPoint& p) {
            return std::find(mask.begin(), mask.end(), p.power_uw) != mask.end();
        });
        const FitResult fit = fit_offset_power_law(pts);
        write_metadata(dir, c, seed, cmdline);
        return emit_fit(dir, fit, to_config(to_offset_power_law(fit)), out);
    }

    FitProblem problem;
    problem.data = sweep_from_csv(text, tau_c);
    problem.fixed = fixed;
    problem.weighting = weighting;
    problem.masked_powers = mask;

    auto fit_one = [&](RateModelKind kind) {
        FitProblem p = problem;
        p.model = kind;
        std::erase_if(p.fixed, [&](const auto& kv) {
            const auto names = rate_model_parameters(kind);
            return std::find(names.begin(), names.end(), kv.first) == names.end() && model == "all";
        });
        return fit_rate_model(p);
    };

    if (model == "all") {
        std::vector<FitResult> fits;
        int code = exit_ok;
        for (RateModelKind kind : {RateModelKind::none, RateModelKind::power_law, RateModelKind::saturation}) {
            fits.push_back(fit_one(kind));
            const fs::path sub = dir / to_string(kind);
            code = std::max(code, emit_fit(sub, fits.back(), to_config(to_source_params(fits.back(), kind, tau_c)), out));
            out << '\n';
        }
        const std::string cmp = compare_models(fits).to_string();
        write_file_atomic(dir / "comparison.txt", cmp);
        write_metadata(dir, c, seed, cmdline);
        out << cmp;
        return code;
    }
    RateModelKind kind;
    try {
        kind = parse_rate_model(model);
    }
    catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const FitResult fit = fit_one(kind);
    write_metadata(dir, c, seed, cmdline);
    return emit_fit(dir, fit, to_config(to_source_params(fit, kind, tau_c)), out);
}

// ---------------------------------------------------------------------------

struct PredictArgs {
    std::string params;
    std::string curve = "car";
    std::vector<double> pl_scales;
    std::vector<double> powers;
    double gate_ns = 0.0;
    double power_min = 1.0;
    double power_max = 1e4;
    double lambda_min = 740.0;
    double lambda_max = 860.0;
    int points = 200;
};

Config model_config(const Common& c, const std::string& params_path)
{
    Config cfg;
    if (!params_path.empty()) {
        cfg = Config::load(params_path);
    }
    cfg.merge(c.config());
    return cfg;
}

int cmd_predict(const Common& c, const PredictArgs& a, const std::string& cmdline, std::ostream& out)
{
    const Config cfg = model_config(c, a.params);
    if (a.points < 1) {
        throw UsageError("--points must be >= 1");
    }
    const std::uint64_t seed = c.resolved_seed();
    const fs::path dir = c.output_dir();

    if (a.curve == "lorentzian") {
        if (!(a.lambda_min > 0.0) || a.lambda_max < a.lambda_min) {
            throw UsageError("need 0 < --lambda-min <= --lambda-max");
        }
        LorentzianParams lor;
        try {
            lor = lorentzian_from(cfg);
        }
        catch (const ConfigError& e) {
            throw DataError(e.what());
        }
        std::string csv = "lambda_nm,A\n";
        for (int k = 0; k < a.points; ++k) {
            const double lambda = a.points == 1 ? a.lambda_min
                                                : a.lambda_min + (a.lambda_max - a.lambda_min) * k / (a.points - 1);
            csv += format_number(lambda) + ',' + format_number(lorentzian_rate(lor, wavelength_to_energy(lambda))) + '\n';
        }
        write_file_atomic(dir / "lorentzian_curve.csv", csv);
        write_metadata(dir, c, seed, cmdline);
        out << "wrote " << (dir / "lorentzian_curve.csv").string() << '\n';
        return exit_ok;
    }
    if (a.curve != "car") {
        throw UsageError("--curve must be car or lorentzian");
    }

    std::vector<double> powers = a.powers;
    if (powers.empty()) {
        if (!(a.power_min > 0.0) || a.power_max < a.power_min) {
            throw UsageError("need 0 < --power-min <= --power-max");
        }
        powers = log_spaced(a.power_min, a.power_max, static_cast<std::size_t>(a.points));
    }
    if (powers.empty()) {
        throw UsageError("empty power list");
    }
    const auto missing = missing_source_keys(cfg);
    if (!missing.empty()) {
        std::string names;
        for (const auto& m : missing) {
            names += (names.empty() ? "" : ", ") + m;
        }
        throw DataError("missing parameters: " + names);
    }
    DesignScenario sc;
    sc.base = source_from(cfg);
    const double gate_ns = a.gate_ns > 0 ? a.gate_ns : cfg.number_or("scenario.gate_ns", 0.0);
    if (gate_ns > 0) {
        sc.gate_width_s = gate_ns * 1e-9;
    }
    std::vector<double> scales = a.pl_scales;
    if (scales.empty()) {
        scales = cfg.numbers("scenario.pl_scale");
    }
    if (scales.empty()) {
        scales = {1.0};
    }
    std::string csv = "pl_scale,power_uW,car\n";
    for (double s : scales) {
        sc.pl_scale = s;
        try {
            for (const auto& pt : predict_car_curve(sc, powers)) {
                csv += format_number(s) + ',' + format_number(pt.power_uw) + ',' + format_number(pt.car) + '\n';
            }
        }
        catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    write_file_atomic(dir / "car_curve.csv", csv);
    write_metadata(dir, c, seed, cmdline);
    out << "wrote " << (dir / "car_curve.csv").string() << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct DesignArgs {
    std::string params;
    std::string spectrum;
    double from_nm = 0.0;
    double to_nm = 0.0;
    double x_from = -1.0;
    double x_to = -1.0;
    double pump_nm = 0.0;
    double xi_measured = 0.0;
    std::vector<std::string> chain;
    double internal_power_uw = -1.0;
    double baseline_power_uw = 0.0;
    double pl_scale = 0.1;
};

int cmd_design(const Common& c, const DesignArgs& a, const std::string& cmdline, std::ostream& out)
{
    const Config cfg = model_config(c, a.params);
    const std::uint64_t seed = c.resolved_seed();
    const fs::path dir = c.output_dir();
    std::string report;
    auto line = [&](const std::string& key, double v) { report += key + " = " + format_number(v) + '\n'; };

    std::optional<LorentzianParams> lor;
    if (!a.spectrum.empty()) {
        const auto pts = spectral_from_csv(read_file(a.spectrum));
        lor = to_lorentzian(fit_lorentzian(pts));
    }
    else if (cfg.has("lorentzian.n") || cfg.has("lorentzian.e_g_ev") || cfg.has("lorentzian.sigma_ev")) {
        try {
            lor = lorentzian_from(cfg);
        }
        catch (const ConfigError& e) {
            throw DataError(e.what());
        }
    }
    const bool wants_wavelength = a.from_nm > 0 && a.to_nm > 0;
    const bool wants_composition = a.x_from >= 0 && a.x_to >= 0;
    if ((wants_wavelength || wants_composition) && !lor) {
        throw DataError("missing parameters: lorentzian.n, lorentzian.sigma_ev, lorentzian.e_g_ev");
    }
    std::vector<double> parts;
    if (lor) {
        line("lorentzian.e_g_ev", lor->e_g);
        line("lorentzian.sigma_ev", lor->sigma);
        line("lorentzian.n", lor->n);
        line("lorentzian.resonance_nm", energy_to_wavelength(lor->e_g));
    }
    try {
        if (wants_wavelength) {
            const double r = pl_reduction_wavelength(*lor, a.from_nm, a.to_nm);
            parts.push_back(r);
            line("reduction.wavelength", r);
        }
        if (wants_composition) {
            const double pump = a.pump_nm > 0 ? a.pump_nm : (a.to_nm > 0 ? a.to_nm : 0.0);
            if (!(pump > 0)) {
                throw UsageError("composition reduction needs --pump-nm");
            }
            const double r = pl_reduction_composition(*lor, a.x_from, a.x_to, pump);
            parts.push_back(r);
            line("reduction.composition", r);
        }
        if (parts.size() > 1) {
            line("reduction.combined", combine_reductions(parts));
        }
        if (!a.chain.empty() || a.xi_measured > 0) {
            CouplingChain chain;
            for (const auto& s : a.chain) {
                const auto eq = s.find('=');
                if (eq == std::string::npos || eq == 0) {
                    throw UsageError("--chain expects name=transmission, got '" + s + "'");
                }
                chain.stages.emplace_back(s.substr(0, eq), parse_number(s.substr(eq + 1)));
            }
            const double xi = a.xi_measured > 0 ? a.xi_measured : cfg.number_or("source.xi", 0.0);
            if (!(xi > 0)) {
                throw DataError("missing parameters: source.xi (or --xi-measured)");
            }
            const double power = a.internal_power_uw >= 0 ? a.internal_power_uw : 1000.0;
            const OnchipRate r = onchip_rate(xi, chain, power);
            line("onchip.transmission", chain.transmission());
            line("onchip.xi_true", r.xi_true);
            line("onchip.internal_power_uw", power);
            line("onchip.pair_rate", r.pair_rate);
        }
        if (a.baseline_power_uw > 0) {
            const auto missing = missing_source_keys(cfg);
            if (!missing.empty()) {
                std::string names;
                for (const auto& m : missing) {
                    names += (names.empty() ? "" : ", ") + m;
                }
                throw DataError("missing parameters: " + names);
            }
            DesignScenario base;
            base.base = source_from(cfg);
            const double target = scenario_car(base, a.baseline_power_uw);
            DesignScenario reduced = base;
            reduced.pl_scale = a.pl_scale;
            line("scenario.baseline_power_uw", a.baseline_power_uw);
            line("scenario.baseline_car", target);
            line("scenario.pl_scale", a.pl_scale);
            if (const auto p = equal_car_power(reduced, target)) {
                line("scenario.equal_car_power_uw", *p);
                line("scenario.pair_rate_gain", *p / a.baseline_power_uw);
            }
            else {
                report += "scenario.equal_car_power_uw = none\n";
            }
        }
    }
    catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (report.empty()) {
        throw UsageError("nothing to compute: give wavelengths, compositions, a coupling chain or a baseline power");
    }
    write_file_atomic(dir / "design_report.txt", report);
    write_metadata(dir, c, seed, cmdline);
    out << report;
    return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Photon-pair source simulator and rate-model estimation toolkit", "plpair"};
    app.require_subcommand(1);

    Common sim_c, fit_c, pred_c, des_c;
    SimulateArgs sim;
    FitArgs fit;
    PredictArgs pred;
    DesignArgs des;

    auto* s = app.add_subcommand("simulate", "Simulate a power sweep and write sweep.csv");
    sim_c.add(s, true);
    s->add_option("--powers", sim.powers, "Pump powers in µW")->delimiter(',');
    s->add_option("--power-min", sim.power_min, "Lowest power of a log-spaced sweep, µW");
    s->add_option("--power-max", sim.power_max, "Highest power of a log-spaced sweep, µW");
    s->add_option("--points", sim.points, "Number of log-spaced powers");
    s->add_option("--duration", sim.duration, "Integration time per power, s");
    s->add_option("--gate-ns", sim.gate_ns, "Detection gate width, ns (pulsed only)");
    s->add_option("--threads", sim.threads, "Worker threads (0: all cores)");
    s->add_flag("--timestamps", sim.timestamps, "Also write binary timestamp streams per point");

    auto* f = app.add_subcommand("fit", "Fit a model to measured or simulated data");
    fit_c.add(f, true);
    f->add_option("--data", fit.data, "Input CSV")->required();
    f->add_option("--model", fit.model, "none | powerlaw | saturation | all | offset-powerlaw | lorentzian");
    f->add_option("--fix", fit.fix, "Hold a parameter fixed: name=value");
    f->add_option("--mask", fit.mask, "Exclude these powers (µW)")->delimiter(',');
    f->add_option("--tau-c-ns", fit.tau_c_ns, "Coincidence window of the sweep, ns (default 13.1)");
    f->add_option("--weighting", fit.weighting, "poisson | unweighted");

    auto* p = app.add_subcommand("predict", "Write CAR or Lorentzian curves");
    pred_c.add(p, true);
    p->add_option("--params", pred.params, "Parameter file (e.g. params.cfg from fit)");
    p->add_option("--curve", pred.curve, "car | lorentzian");
    p->add_option("--pl-scale", pred.pl_scales, "Photoluminescence multipliers")->delimiter(',');
    p->add_option("--powers", pred.powers, "Explicit powers, µW")->delimiter(',');
    p->add_option("--gate-ns", pred.gate_ns, "Coincidence gate replacing tau_c, ns");
    p->add_option("--power-min", pred.power_min, "µW");
    p->add_option("--power-max", pred.power_max, "µW");
    p->add_option("--lambda-min", pred.lambda_min, "nm");
    p->add_option("--lambda-max", pred.lambda_max, "nm");
    p->add_option("--points", pred.points, "Curve resolution");

    auto* d = app.add_subcommand("design", "Photoluminescence reductions, on-chip rates, equal-CAR power");
    des_c.add(d, true);
    d->add_option("--params", des.params, "Parameter file with source.* and/or lorentzian.* keys");
    d->add_option("--spectrum", des.spectrum, "Spectral CSV to fit the Lorentzian from");
    d->add_option("--from-nm", des.from_nm, "Current pump wavelength, nm");
    d->add_option("--to-nm", des.to_nm, "New pump wavelength, nm");
    d->add_option("--x-from", des.x_from, "Current aluminium fraction");
    d->add_option("--x-to", des.x_to, "New aluminium fraction");
    d->add_option("--pump-nm", des.pump_nm, "Pump wavelength for the composition change, nm");
    d->add_option("--xi-measured", des.xi_measured, "Measured pair coefficient, pairs/s/µW");
    d->add_option("--chain", des.chain, "Coupling stages name=transmission")->delimiter(',');
    d->add_option("--internal-power-uw", des.internal_power_uw, "Internal laser power, µW (default 1000)");
    d->add_option("--baseline-power-uw", des.baseline_power_uw, "Power whose CAR the reduced device must match");
    d->add_option("--pl-scale", des.pl_scale, "Photoluminescence multiplier of the reduced device");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    const std::string cmdline = join_argv(argc, argv);
    try {
        if (s->parsed()) {
            return cmd_simulate(sim_c, sim, cmdline, out);
        }
        if (f->parsed()) {
            return cmd_fit(fit_c, fit, cmdline, out);
        }
        if (p->parsed()) {
            return cmd_predict(pred_c, pred, cmdline, out);
        }
        return cmd_design(des_c, des, cmdline, out);
    }
    catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    catch (const FitError& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == FitErrorKind::diverged ? exit_nonconvergence : exit_data;
    }
    catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    }
    catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    }
    catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_data;
    }
}

}  // namespace plpair
