// File formats: sweep and spectral CSVs, fit tables, binary timestamp
// streams. All numbers are written locale-independently in shortest
// round-trip form; files are replaced atomically.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "plpair/events.hpp"
#include "plpair/fit.hpp"
#include "plpair/simulate.hpp"

namespace plpair {

/// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_number(double value);
double parse_number(std::string_view text);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

inline constexpr std::string_view kSweepHeader = "power_uW,duration_s,gate_ns,singles_s,singles_i,coincidences";

std::string sweep_to_csv(const std::vector<SweepRecord>& records);
/// The coincidence window is not stored in the sweep file; it is supplied here.
std::vector<SweepRecord> sweep_from_csv(std::string_view text, double tau_c_s);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_sweep_csv(const std::filesystem::path& path, double tau_c_s);

inline constexpr std::string_view kCountHeader = "power_uW,duration_s,counts";
std::vector<CountPoint> counts_from_csv(std::string_view text);

/// Spectral points keyed by pump wavelength; energies are derived on load.
inline constexpr std::string_view kSpectralHeader = "wavelength_nm,rate,stderr";
std::vector<SpectralPoint> spectral_from_csv(std::string_view text);

std::string fit_to_csv(const FitResult& fit);
std::string residuals_to_csv(const FitResult& fit);
/// Human-readable table: estimates ± standard errors, p-values, R², chi².
std::string fit_report(const FitResult& fit);

// Binary timestamp stream: 8-byte magic, int64 duration in ps, then int64
// timestamps in ps, all little-endian.
inline constexpr std::string_view kTimestampMagic = "PLPTS001";

void write_timestamps(const std::filesystem::path& path, const EventStream& stream);
EventStream read_timestamps(const std::filesystem::path& path, Channel channel);

}  // namespace plpair
