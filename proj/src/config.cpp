#include "plpair/config.hpp"

#include <algorithm>
#include <set>

#include "plpair/io.hpp"

namespace plpair {

namespace {

std::string_view trim(std::string_view s)
{
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && ws(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && ws(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

const std::set<std::string>& known_keys()
{
    static const std::set<std::string> keys{
        "pump.mode",          "pump.rep_rate_hz",     "pump.wavelength_nm",   "source.xi",
        "source.eta_s",       "source.eta_i",         "source.r_bg",          "source.tau_c_ns",
        "source.noise",       "source.gamma_p",       "source.alpha",         "source.gamma_s",
        "source.beta_ns",     "detector.dark_rate",   "detector.dead_time_ns", "detector.gate_ns",
        "detector.gate_offset_ns", "run.powers_uw",   "run.power_min_uw",     "run.power_max_uw",
        "run.points",         "run.duration_s",       "run.seed",             "run.threads",
        "fit.model",          "fit.tau_c_ns",         "fit.mask_uw",          "fit.weighting",
        "scenario.pl_scale",  "scenario.gate_ns",     "scenario.label",       "lorentzian.n",
        "lorentzian.sigma_ev", "lorentzian.e_g_ev",   "offset.a",             "offset.alpha",
        "offset.r0",
    };
    return keys;
}

bool is_fix_key(const std::string& key)
{
    return key.rfind("fit.fix.", 0) == 0 && key.size() > 8;
}

struct PresetRow {
    const char* name;
    const char* mode;
    const char* noise;
    double xi, eta_s, eta_i, gamma, shape;
};

// Fitted values for the measured device under each condition; shape is
// alpha for the power law and beta in ns for saturation.
constexpr PresetRow kPresets[] = {
    {"pulsed-powerlaw", "pulsed", "powerlaw", 0.5e6, 1.9e-4, 1.5e-4, 2.0e6, 0.74},
    {"pulsed-saturation", "pulsed", "saturation", 0.78e6, 1.9e-4, 1.5e-4, 0.4e6, 8.0},
    {"pulsed-40nm", "pulsed", "none", 0.060e6, 4.9e-4, 8.5e-4, 0.0, 0.0},
    {"cw-powerlaw", "cw", "powerlaw", 0.5e6, 2.6e-4, 3.2e-4, 8.5e6, 0.70},
    {"cw-saturation", "cw", "saturation", 1.40e6, 2.6e-4, 3.2e-4, 2.5e6, 5.0},
};

}  // namespace

Config Config::parse(std::string_view text, const std::string& source)
{
    Config cfg;
    cfg.source_ = source;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find('\n', start), text.size());
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'section.key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.find('.') == std::string::npos || key.front() == '.' || key.back() == '.') {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": key '" + key + "' needs a section prefix");
        }
        if (value.empty()) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": empty value for '" + key + "'");
        }
        cfg.set(key, value, line_no);
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path)
{
    std::string text;
    try {
        text = read_file(path);
    }
    catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    Config cfg = parse(text, path.string());
    cfg.check_known();
    return cfg;
}

void Config::set(const std::string& key, const std::string& value, int line)
{
    entries_[key] = Entry{value, line};
}

void Config::merge(const Config& other)
{
    for (const auto& [k, e] : other.entries_) {
        entries_[k] = e;
    }
    if (other.source_ != "<config>") {
        source_ = other.source_;
    }
}

bool Config::has(const std::string& key) const
{
    return entries_.count(key) != 0;
}

std::string Config::where(const std::string& key) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end() || it->second.line == 0) {
        return "'" + key + "'";
    }
    return source_ + ":" + std::to_string(it->second.line) + ": '" + key + "'";
}

std::optional<std::string> Config::text(const std::string& key) const
{
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second.value;
}

std::optional<double> Config::number(const std::string& key) const
{
    const auto t = text(key);
    if (!t) {
        return std::nullopt;
    }
    try {
        return parse_number(*t);
    }
    catch (const DataError&) {
        throw ConfigError(where(key) + " is not a number: '" + *t + "'");
    }
}

double Config::number_or(const std::string& key, double fallback) const
{
    return number(key).value_or(fallback);
}

std::vector<double> Config::numbers(const std::string& key) const
{
    std::vector<double> out;
    const auto t = text(key);
    if (!t) {
        return out;
    }
    std::string_view rest = *t;
    while (true) {
        const auto comma = rest.find(',');
        const std::string_view item = trim(rest.substr(0, comma));
        try {
            out.push_back(parse_number(item));
        }
        catch (const DataError&) {
            throw ConfigError(where(key) + " has a non-numeric entry '" + std::string(item) + "'");
        }
        if (comma == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(comma + 1);
    }
    return out;
}

std::vector<std::string> Config::keys() const
{
    std::vector<std::string> out;
    for (const auto& [k, e] : entries_) {
        out.push_back(k);
    }
    return out;
}

std::vector<std::string> Config::keys_with_prefix(std::string_view prefix) const
{
    std::vector<std::string> out;
    for (const auto& [k, e] : entries_) {
        if (k.rfind(prefix, 0) == 0) {
            out.push_back(k);
        }
    }
    return out;
}

void Config::check_known() const
{
    std::string bad;
    for (const auto& [k, e] : entries_) {
        if (!known_keys().count(k) && !is_fix_key(k)) {
            bad += (bad.empty() ? "" : "; ") + where(k) + " is not a recognized key";
        }
    }
    if (!bad.empty()) {
        throw ConfigError(bad);
    }
}

Config preset(std::string_view name)
{
    for (const auto& row : kPresets) {
        if (name != row.name) {
            continue;
        }
        Config cfg;
        cfg.set("pump.mode", row.mode);
        cfg.set("pump.rep_rate_hz", "76.2e6");
        cfg.set("pump.wavelength_nm", "763");
        cfg.set("source.xi", format_number(row.xi));
        cfg.set("source.eta_s", format_number(row.eta_s));
        cfg.set("source.eta_i", format_number(row.eta_i));
        cfg.set("source.r_bg", "300");
        cfg.set("source.tau_c_ns", "13.1");
        cfg.set("source.noise", row.noise);
        if (std::string_view(row.noise) == "powerlaw") {
            cfg.set("source.gamma_p", format_number(row.gamma));
            cfg.set("source.alpha", format_number(row.shape));
        }
        else if (std::string_view(row.noise) == "saturation") {
            cfg.set("source.gamma_s", format_number(row.gamma));
            cfg.set("source.beta_ns", format_number(row.shape));
        }
        cfg.set("detector.dark_rate", "300");
        return cfg;
    }
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> out;
    for (const auto& row : kPresets) {
        out.emplace_back(row.name);
    }
    return out;
}

PumpConfig pump_from(const Config& cfg)
{
    PumpConfig pump;
    const std::string mode = cfg.text("pump.mode").value_or("pulsed");
    if (mode == "pulsed") {
        pump.mode = PumpMode::pulsed;
    }
    else if (mode == "cw") {
        pump.mode = PumpMode::cw;
    }
    else {
        throw ConfigError("'pump.mode' must be pulsed or cw, got '" + mode + "'");
    }
    pump.rep_rate_hz = cfg.number_or("pump.rep_rate_hz", pump.rep_rate_hz);
    pump.wavelength_nm = cfg.number_or("pump.wavelength_nm", pump.wavelength_nm);
    return pump;
}

DetectorConfig detector_from(const Config& cfg, const PumpConfig& pump)
{
    DetectorConfig det;
    det.dark_rate = cfg.number_or("detector.dark_rate", cfg.number_or("source.r_bg", det.dark_rate));
    det.dead_time_s = cfg.number_or("detector.dead_time_ns", 0.0) * 1e-9;
    if (const auto g = cfg.number("detector.gate_ns")) {
        det.gate = Gate{cfg.number_or("detector.gate_offset_ns", 0.0) * 1e-9, *g * 1e-9};
    }
    try {
        validate(det, pump);
    }
    catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return det;
}

std::vector<std::string> missing_source_keys(const Config& cfg)
{
    std::vector<std::string> need{"source.xi", "source.eta_s", "source.eta_i", "source.r_bg", "source.tau_c_ns"};
    const std::string noise = cfg.text("source.noise").value_or("none");
    if (noise == "powerlaw") {
        need.insert(need.end(), {"source.gamma_p", "source.alpha"});
    }
    else if (noise == "saturation") {
        need.insert(need.end(), {"source.gamma_s", "source.beta_ns"});
    }
    std::vector<std::string> missing;
    for (const auto& k : need) {
        if (!cfg.has(k)) {
            missing.push_back(k);
        }
    }
    return missing;
}

SourceParams source_from(const Config& cfg)
{
    const auto missing = missing_source_keys(cfg);
    if (!missing.empty()) {
        std::string names;
        for (const auto& m : missing) {
            names += (names.empty() ? "" : ", ") + m;
        }
        throw ConfigError("missing parameters: " + names);
    }
    SourceParams p;
    p.xi = *cfg.number("source.xi");
    p.eta_s = *cfg.number("source.eta_s");
    p.eta_i = *cfg.number("source.eta_i");
    p.r_bg = *cfg.number("source.r_bg");
    p.tau_c = *cfg.number("source.tau_c_ns") * 1e-9;
    const std::string noise = cfg.text("source.noise").value_or("none");
    if (noise == "powerlaw") {
        p.noise = PowerLawNoise{*cfg.number("source.gamma_p"), *cfg.number("source.alpha")};
    }
    else if (noise == "saturation") {
        p.noise = SaturationNoise{*cfg.number("source.gamma_s"), *cfg.number("source.beta_ns") * 1e-9};
    }
    else if (noise != "none") {
        throw ConfigError("'source.noise' must be none, powerlaw or saturation, got '" + noise + "'");
    }
    try {
        validate(p);
    }
    catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

LorentzianParams lorentzian_from(const Config& cfg)
{
    std::string missing;
    for (const char* k : {"lorentzian.n", "lorentzian.sigma_ev", "lorentzian.e_g_ev"}) {
        if (!cfg.has(k)) {
            missing += (missing.empty() ? "" : ", ") + std::string(k);
        }
    }
    if (!missing.empty()) {
        throw ConfigError("missing parameters: " + missing);
    }
    LorentzianParams p{*cfg.number("lorentzian.n"), *cfg.number("lorentzian.sigma_ev"),
                       *cfg.number("lorentzian.e_g_ev")};
    try {
        validate(p);
    }
    catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return p;
}

OffsetPowerLaw offset_from(const Config& cfg)
{
    std::string missing;
    for (const char* k : {"offset.a", "offset.alpha", "offset.r0"}) {
        if (!cfg.has(k)) {
            missing += (missing.empty() ? "" : ", ") + std::string(k);
        }
    }
    if (!missing.empty()) {
        throw ConfigError("missing parameters: " + missing);
    }
    return {*cfg.number("offset.a"), *cfg.number("offset.alpha"), *cfg.number("offset.r0")};
}

std::string to_config(const SourceParams& p)
{
    std::string out;
    out += "source.xi = " + format_number(p.xi) + '\n';
    out += "source.eta_s = " + format_number(p.eta_s) + '\n';
    out += "source.eta_i = " + format_number(p.eta_i) + '\n';
    out += "source.r_bg = " + format_number(p.r_bg) + '\n';
    out += "source.tau_c_ns = " + format_number(p.tau_c * 1e9) + '\n';
    out += std::string("source.noise = ") + noise_kind(p.noise) + '\n';
    if (const auto* pl = std::get_if<PowerLawNoise>(&p.noise)) {
        out += "source.gamma_p = " + format_number(pl->gamma_p) + '\n';
        out += "source.alpha = " + format_number(pl->alpha) + '\n';
    }
    else if (const auto* sat = std::get_if<SaturationNoise>(&p.noise)) {
        out += "source.gamma_s = " + format_number(sat->gamma_s) + '\n';
        out += "source.beta_ns = " + format_number(sat->beta * 1e9) + '\n';
    }
    return out;
}

std::string to_config(const LorentzianParams& p)
{
    return "lorentzian.n = " + format_number(p.n) + "\nlorentzian.sigma_ev = " + format_number(p.sigma) +
           "\nlorentzian.e_g_ev = " + format_number(p.e_g) + '\n';
}

std::string to_config(const OffsetPowerLaw& p)
{
    return "offset.a = " + format_number(p.a) + "\noffset.alpha = " + format_number(p.alpha) +
           "\noffset.r0 = " + format_number(p.r0) + '\n';
}

}  // namespace plpair
