// Flat `section.key = value` configuration with line-numbered diagnostics,
// and conversions between configuration and model types.
//
//   # comment
//   pump.mode = pulsed          pulsed | cw
//   pump.rep_rate_hz = 76.2e6
//   source.noise = saturation   none | powerlaw | saturation
//   source.beta_ns = 8
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "plpair/model.hpp"
#include "plpair/simulate.hpp"

namespace plpair {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Config {
public:
    static Config parse(std::string_view text, const std::string& source = "<config>");
    static Config load(const std::filesystem::path& path);

    /// Later values win; `line` 0 marks values from the command line.
    void set(const std::string& key, const std::string& value, int line = 0);
    void merge(const Config& other);

    bool has(const std::string& key) const;
    std::optional<std::string> text(const std::string& key) const;
    std::optional<double> number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    std::vector<double> numbers(const std::string& key) const;  // comma list
    std::vector<std::string> keys() const;
    std::vector<std::string> keys_with_prefix(std::string_view prefix) const;

    /// Throws ConfigError listing every unrecognized key with its line.
    void check_known() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string where(const std::string& key) const;

    std::string source_ = "<config>";
    std::map<std::string, Entry> entries_;
};

/// Named parameter sets for the measured device, one per measurement
/// condition: pulsed-powerlaw, pulsed-saturation, pulsed-40nm, cw-powerlaw,
/// cw-saturation.
Config preset(std::string_view name);
std::vector<std::string> preset_names();

PumpConfig pump_from(const Config& cfg);
DetectorConfig detector_from(const Config& cfg, const PumpConfig& pump);

/// Names of required source keys absent from `cfg` for its noise model.
std::vector<std::string> missing_source_keys(const Config& cfg);
/// Throws ConfigError naming every missing parameter.
SourceParams source_from(const Config& cfg);
LorentzianParams lorentzian_from(const Config& cfg);
OffsetPowerLaw offset_from(const Config& cfg);

std::string to_config(const SourceParams& p);
std::string to_config(const LorentzianParams& p);
std::string to_config(const OffsetPowerLaw& p);

}  // namespace plpair
