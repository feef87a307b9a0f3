#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "plpair/commands.hpp"
#include "plpair/config.hpp"
#include "plpair/io.hpp"

using namespace plpair;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "plpair");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    Run r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path fresh(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "plpair_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int lines(const std::string& text)
{
    return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

std::vector<std::string> sweep_args(const fs::path& out, const std::string& duration = "0.5")
{
    return {"simulate", "--preset", "pulsed-saturation", "--power-min", "10", "--power-max", "2000", "--points",
            "12", "--duration", duration, "--seed", "5", "--out", out.string()};
}

}  // namespace

TEST_CASE("simulate writes a deterministic sweep")
{
    const fs::path a = fresh("sim_a");
    const fs::path b = fresh("sim_b");
    REQUIRE(run(sweep_args(a)).code == exit_ok);
    REQUIRE(run(sweep_args(b)).code == exit_ok);
    const std::string csv = read_file(a / "sweep.csv");
    CHECK(lines(csv) == 13);
    CHECK(csv == read_file(b / "sweep.csv"));
    const std::string meta = read_file(a / "metadata.txt");
    CHECK(meta.find("seed = 5\n") != std::string::npos);
    CHECK(meta.find("seed_source = user") != std::string::npos);
}

TEST_CASE("an absent seed is drawn, recorded and reproducible")
{
    const fs::path a = fresh("entropy");
    auto args = sweep_args(a);
    args.erase(args.begin() + 11, args.begin() + 13);  // drop --seed 5
    REQUIRE(run(args).code == exit_ok);
    const std::string text = read_file(a / "metadata.txt");
    CHECK(text.find("seed_source = entropy") != std::string::npos);
    const auto pos = text.find("seed = ") + 7;
    const std::string seed = text.substr(pos, text.find('\n', pos) - pos);
    const fs::path b = fresh("entropy_replay");
    auto replay = sweep_args(b);
    replay[12] = seed;
    REQUIRE(run(replay).code == exit_ok);
    CHECK(read_file(a / "sweep.csv") == read_file(b / "sweep.csv"));
}

TEST_CASE("invalid simulate requests write nothing")
{
    const fs::path dir = fresh("invalid");
    const Run zero = run(sweep_args(dir, "0"));
    CHECK(zero.code == exit_usage);
    CHECK(zero.err.find("duration") != std::string::npos);
    CHECK(fs::is_empty(dir));

    const Run no_powers = run({"simulate", "--preset", "pulsed-saturation", "--duration", "1", "--out", dir.string()});
    CHECK(no_powers.code == exit_usage);
    CHECK(fs::is_empty(dir));

    const fs::path cfg = dir.parent_path() / "bad.cfg";
    write_file_atomic(cfg, "pump.mode = pulsed\nsource.colour = blue\n");
    const Run bad = run({"simulate", "--config", cfg.string(), "--powers", "10", "--duration", "1", "--out",
                         dir.string()});
    CHECK(bad.code == exit_usage);
    CHECK(bad.err.find(":2") != std::string::npos);
    CHECK(fs::is_empty(dir));
}

TEST_CASE("fit on a simulated sweep")
{
    const fs::path dir = fresh("fit");
    REQUIRE(run(sweep_args(dir, "5")).code == exit_ok);
    const Run r = run({"fit", "--data", (dir / "sweep.csv").string(), "--model", "saturation", "--out",
                       (dir / "sat").string(), "--seed", "1"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("gamma_s") != std::string::npos);
    CHECK(fs::exists(dir / "sat" / "fit.csv"));
    CHECK(fs::exists(dir / "sat" / "fit_report.txt"));
    const Config params = Config::load(dir / "sat" / "params.cfg");
    CHECK(params.number("source.beta_ns").value() == doctest::Approx(8.0).epsilon(0.5));
    CHECK(lines(read_file(dir / "sat" / "residuals.csv")) == 37);
}

TEST_CASE("fit reports a poor noise-free model without failing")
{
    const fs::path dir = fresh("fit_none");
    REQUIRE(run(sweep_args(dir, "5")).code == exit_ok);
    const Run r = run({"fit", "--data", (dir / "sweep.csv").string(), "--model", "none", "--out", dir.string()});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("R^2") != std::string::npos);
}

TEST_CASE("fit masks and fixes")
{
    const fs::path dir = fresh("fit_mask");
    REQUIRE(run({"simulate", "--preset", "pulsed-saturation", "--powers", "10,20,40,80,160,320,640,1280,2000",
                 "--duration", "2", "--seed", "3", "--out", dir.string()})
                .code == exit_ok);
    const Run r = run({"fit", "--data", (dir / "sweep.csv").string(), "--model", "saturation", "--mask", "80",
                       "--fix", "r_bg=300", "--out", dir.string()});
    CHECK(r.code == exit_ok);
    const std::string res = read_file(dir / "residuals.csv");
    CHECK(res.find("\n80,") == std::string::npos);
    CHECK(res.find("\n160,") != std::string::npos);
    CHECK(read_file(dir / "fit.csv").find("r_bg,1/s,300,0,") != std::string::npos);

    const Run bad_fix = run({"fit", "--data", (dir / "sweep.csv").string(), "--fix", "colour=1", "--out",
                             dir.string()});
    CHECK(bad_fix.code == exit_data);
}

TEST_CASE("fit data errors")
{
    const fs::path dir = fresh("fit_errors");
    write_file_atomic(dir / "short.csv",
                      "power_uW,duration_s,gate_ns,singles_s,singles_i,coincidences\n10,1,0,100,100,1\n20,1,0,200,200,2\n");
    const Run few = run({"fit", "--data", (dir / "short.csv").string(), "--out", dir.string()});
    CHECK(few.code == exit_data);
    write_file_atomic(dir / "wrong.csv", "a,b\n1,2\n");
    CHECK(run({"fit", "--data", (dir / "wrong.csv").string(), "--out", dir.string()}).code == exit_data);
    CHECK(run({"fit", "--data", (dir / "missing.csv").string(), "--out", dir.string()}).code == exit_data);
    CHECK(run({"fit", "--out", dir.string()}).code == exit_usage);
}

TEST_CASE("Lorentzian fit and curve")
{
    const fs::path dir = fresh("lorentzian");
    write_file_atomic(dir / "spectrum.csv",
                      "wavelength_nm,rate,stderr\n760,1800,300\n763,1130,150\n775,360,50\n800,87,13\n850,27,10\n");
    const Run f = run({"fit", "--data", (dir / "spectrum.csv").string(), "--model", "lorentzian", "--out",
                       dir.string()});
    REQUIRE(f.code == exit_ok);
    const Run p = run({"predict", "--params", (dir / "params.cfg").string(), "--curve", "lorentzian", "--points",
                       "121", "--out", dir.string()});
    REQUIRE(p.code == exit_ok);
    const std::string csv = read_file(dir / "lorentzian_curve.csv");
    CHECK(csv.rfind("lambda_nm,A\n", 0) == 0);
    double best_lambda = 0.0;
    double best = -1.0;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        const double lambda = parse_number(line.substr(0, comma));
        const double a = parse_number(line.substr(comma + 1));
        if (a > best) {
            best = a;
            best_lambda = lambda;
        }
    }
    CHECK(best_lambda == doctest::Approx(752.0).epsilon(0.01));
}

TEST_CASE("CAR curves for two photoluminescence levels")
{
    const fs::path dir = fresh("predict");
    const Run r = run({"predict", "--preset", "pulsed-saturation", "--pl-scale", "1,0.1", "--power-min", "1",
                       "--power-max", "10000", "--points", "200", "--out", dir.string()});
    REQUIRE(r.code == exit_ok);
    const std::string csv = read_file(dir / "car_curve.csv");
    CHECK(csv.rfind("pl_scale,power_uW,car\n", 0) == 0);
    CHECK(lines(csv) == 401);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::vector<double> first;
    std::vector<double> second;
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const double scale = parse_number(line.substr(0, c1));
        (scale == 1.0 ? first : second).push_back(parse_number(line.substr(c2 + 1)));
    }
    REQUIRE(first.size() == 200);
    REQUIRE(second.size() == 200);
    for (std::size_t k = 0; k < 200; ++k) {
        CHECK(second[k] >= first[k]);
    }
}

TEST_CASE("predict errors")
{
    const fs::path dir = fresh("predict_errors");
    write_file_atomic(dir / "partial.cfg", "source.xi = 1e5\nsource.noise = saturation\n");
    const Run missing = run({"predict", "--params", (dir / "partial.cfg").string(), "--out", dir.string()});
    CHECK(missing.code == exit_data);
    CHECK(missing.err.find("source.eta_s") != std::string::npos);
    CHECK(missing.err.find("source.beta_ns") != std::string::npos);
    const Run empty = run({"predict", "--preset", "pulsed-saturation", "--points", "0", "--out", dir.string()});
    CHECK(empty.code == exit_usage);
    CHECK_FALSE(fs::exists(dir / "car_curve.csv"));
}

TEST_CASE("design report")
{
    const fs::path dir = fresh("design");
    write_file_atomic(dir / "spectrum.csv",
                      "wavelength_nm,rate,stderr\n760,1800,300\n763,1130,150\n775,360,50\n800,87,13\n850,27,10\n");
    const Run r = run({"design", "--spectrum", (dir / "spectrum.csv").string(), "--from-nm", "767", "--to-nm", "780",
                       "--x-from", "0.20", "--x-to", "0.22", "--xi-measured", "0.5e6", "--chain",
                       "lens=0.70,incoupling=0.35,mode=0.04", "--preset", "pulsed-saturation",
                       "--baseline-power-uw", "100", "--out", dir.string()});
    REQUIRE(r.code == exit_ok);
    const Config report = Config::parse(read_file(dir / "design_report.txt"));
    CHECK(report.number("reduction.wavelength").value() == doctest::Approx(0.663).epsilon(0.01));
    CHECK(report.number("onchip.pair_rate").value() >= 5e9);
    CHECK(report.number("scenario.equal_car_power_uw").value() > 100.0);
    CHECK(run({"design", "--out", dir.string()}).code == exit_usage);
    CHECK(run({"design", "--chain", "lens=0", "--xi-measured", "1", "--out", dir.string()}).code == exit_usage);
}

TEST_CASE("output directory from the environment")
{
    const fs::path dir = fresh("env");
    ::setenv("PLPAIR_OUTPUT_DIR", dir.string().c_str(), 1);
    const Run r = run({"predict", "--preset", "pulsed-40nm", "--points", "5"});
    ::unsetenv("PLPAIR_OUTPUT_DIR");
    CHECK(r.code == exit_ok);
    CHECK(fs::exists(dir / "car_curve.csv"));
}

TEST_CASE("usage errors")
{
    CHECK(run({}).code == exit_usage);
    CHECK(run({"launch"}).code == exit_usage);
    CHECK(run({"simulate", "--preset", "nonexistent"}).code == exit_usage);
    CHECK(run({"--help"}).code == exit_ok);
}
