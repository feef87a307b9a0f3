#include "plpair/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <system_error>

namespace plpair {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

// Data rows of a CSV with a fixed header; blank lines are skipped.
std::vector<std::vector<std::string_view>> csv_rows(std::string_view text, std::string_view header)
{
    std::vector<std::vector<std::string_view>> rows;
    const auto expected = split(header, ',');
    bool seen_header = false;
    int line_no = 0;
    for (std::string_view line : split(text, '\n')) {
        ++line_no;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        auto fields = split(line, ',');
        for (auto& f : fields) {
            f = trim(f);
        }
        if (!seen_header) {
            if (fields != expected) {
                throw DataError("expected header '" + std::string(header) + "', got '" + std::string(line) + "'");
            }
            seen_header = true;
            continue;
        }
        if (fields.size() != expected.size()) {
            throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(expected.size()) +
                            " fields, got " + std::to_string(fields.size()));
        }
        rows.push_back(std::move(fields));
    }
    if (!seen_header) {
        throw DataError("empty file: missing header '" + std::string(header) + "'");
    }
    return rows;
}

std::int64_t parse_count(std::string_view text)
{
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || v < 0) {
        throw DataError("not a non-negative integer count: '" + std::string(text) + "'");
    }
    return v;
}

void put_le64(std::string& out, std::int64_t v)
{
    auto u = static_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
        out.push_back(static_cast<char>(u & 0xffu));
        u >>= 8;
    }
}

std::int64_t get_le64(const unsigned char* p)
{
    std::uint64_t u = 0;
    for (int b = 7; b >= 0; --b) {
        u = (u << 8) | p[b];
    }
    return static_cast<std::int64_t>(u);
}

std::string status_of(const FitParameter& p)
{
    if (p.fixed) {
        return "fixed";
    }
    return p.identifiable ? "free" : "unidentifiable";
}

// Twelve significant digits keep the ns <-> s conversion stable on re-write.
std::string format_gate_ns(double width_s)
{
    std::array<char, 64> buf{};
    const auto [ptr, ec] =
        std::to_chars(buf.data(), buf.data() + buf.size(), width_s * 1e9, std::chars_format::general, 12);
    if (ec != std::errc{}) {
        throw std::runtime_error("number formatting failed");
    }
    return std::string(buf.data(), ptr);
}

}  // namespace

std::string format_number(double value)
{
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) {
        throw std::runtime_error("number formatting failed");
    }
    return std::string(buf.data(), ptr);
}

double parse_number(std::string_view text)
{
    text = trim(text);
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw DataError("not a number: '" + std::string(text) + "'");
    }
    return v;
}

void write_file_atomic(const fs::path& path, std::string_view content)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sweep_to_csv(const std::vector<SweepRecord>& records)
{
    std::string out(kSweepHeader);
    out += '\n';
    for (const auto& r : records) {
        out += format_number(r.power_uw) + ',' + format_number(r.duration_s) + ',' +
               format_gate_ns(r.gate_width_s) + ',' + std::to_string(r.count_s) + ',' +
               std::to_string(r.count_i) + ',' + std::to_string(r.count_c) + '\n';
    }
    return out;
}

std::vector<SweepRecord> sweep_from_csv(std::string_view text, double tau_c_s)
{
    std::vector<SweepRecord> out;
    for (const auto& f : csv_rows(text, kSweepHeader)) {
        SweepRecord r;
        r.power_uw = parse_number(f[0]);
        r.duration_s = parse_number(f[1]);
        r.gate_width_s = parse_number(f[2]) * 1e-9;
        r.count_s = parse_count(f[3]);
        r.count_i = parse_count(f[4]);
        r.count_c = parse_count(f[5]);
        r.tau_c_s = tau_c_s;
        if (!(r.power_uw >= 0.0) || !(r.duration_s > 0.0) || !(r.gate_width_s >= 0.0)) {
            throw DataError("sweep row with invalid power, duration or gate");
        }
        out.push_back(r);
    }
    return out;
}

void write_sweep_csv(const fs::path& path, const std::vector<SweepRecord>& records)
{
    write_file_atomic(path, sweep_to_csv(records));
}

std::vector<SweepRecord> read_sweep_csv(const fs::path& path, double tau_c_s)
{
    return sweep_from_csv(read_file(path), tau_c_s);
}

std::vector<CountPoint> counts_from_csv(std::string_view text)
{
    std::vector<CountPoint> out;
    for (const auto& f : csv_rows(text, kCountHeader)) {
        CountPoint p;
        p.power_uw = parse_number(f[0]);
        p.duration_s = parse_number(f[1]);
        p.count = parse_count(f[2]);
        if (!(p.duration_s > 0.0)) {
            throw DataError("count row with non-positive duration");
        }
        out.push_back(p);
    }
    return out;
}

std::vector<SpectralPoint> spectral_from_csv(std::string_view text)
{
    std::vector<SpectralPoint> out;
    for (const auto& f : csv_rows(text, kSpectralHeader)) {
        const double lambda = parse_number(f[0]);
        if (!(lambda > 0.0)) {
            throw DataError("wavelength must be > 0");
        }
        SpectralPoint p;
        p.energy_ev = wavelength_to_energy(lambda);
        p.value = parse_number(f[1]);
        p.std_error = parse_number(f[2]);
        if (!(p.std_error > 0.0)) {
            throw DataError("stderr must be > 0");
        }
        out.push_back(p);
    }
    return out;
}

std::string fit_to_csv(const FitResult& fit)
{
    std::string out = "parameter,unit,estimate,stderr,t_value,p_value,status\n";
    for (const auto& p : fit.params) {
        out += p.name + ',' + p.unit + ',' + format_number(p.estimate) + ',' + format_number(p.std_error) + ',' +
               format_number(p.t_value) + ',' + format_number(p.p_value) + ',' + status_of(p) + '\n';
    }
    return out;
}

std::string residuals_to_csv(const FitResult& fit)
{
    std::string out = "x,observable,observed,predicted,residual,weight\n";
    for (const auto& r : fit.residuals) {
        const std::string& name = r.observable >= 0 && static_cast<std::size_t>(r.observable) < fit.observables.size()
                                      ? fit.observables[static_cast<std::size_t>(r.observable)]
                                      : std::to_string(r.observable);
        out += format_number(r.x) + ',' + name + ',' + format_number(r.observed) + ',' + format_number(r.predicted) +
               ',' + format_number(r.residual()) + ',' + format_number(r.weight) + '\n';
    }
    return out;
}

std::string fit_report(const FitResult& fit)
{
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << "model: " << fit.model << '\n';
    os << "converged: " << (fit.converged ? "yes" : "no") << " (" << fit.termination << ", " << fit.iterations
       << " iterations)\n\n";
    os << std::left << std::setw(10) << "parameter" << std::setw(22) << "unit" << std::right << std::setw(14)
       << "estimate" << std::setw(14) << "stderr" << std::setw(12) << "p-value" << "  status\n";
    for (const auto& p : fit.params) {
        os << std::left << std::setw(10) << p.name << std::setw(22) << p.unit << std::right << std::setprecision(5)
           << std::setw(14) << p.estimate << std::setw(14) << p.std_error << std::setw(12) << std::setprecision(3)
           << p.p_value << "  " << status_of(p) << '\n';
    }
    os << '\n' << std::setprecision(6);
    for (std::size_t k = 0; k < fit.r_squared_by_observable.size(); ++k) {
        os << "R^2 " << (k < fit.observables.size() ? fit.observables[k] : std::to_string(k)) << ": "
           << fit.r_squared_by_observable[k] << '\n';
    }
    os << "R^2 (worst observable): " << fit.r_squared << '\n';
    os << "chi^2: " << fit.chi2 << "  dof: " << fit.dof << "  chi^2/dof: " << fit.reduced_chi2() << '\n';
    for (const auto& u : fit.unidentifiable) {
        os << "unidentifiable direction: " << u << '\n';
    }
    return os.str();
}

void write_timestamps(const fs::path& path, const EventStream& stream)
{
    std::string out(kTimestampMagic);
    out.reserve(16 + 8 * stream.timestamps_s.size());
    put_le64(out, std::llround(stream.duration_s * 1e12));
    for (double t : stream.timestamps_s) {
        put_le64(out, std::llround(t * 1e12));
    }
    write_file_atomic(path, out);
}

EventStream read_timestamps(const fs::path& path, Channel channel)
{
    const std::string raw = read_file(path);
    if (raw.size() < 16 || std::string_view(raw).substr(0, 8) != kTimestampMagic || raw.size() % 8 != 0) {
        throw DataError(path.string() + " is not a timestamp file");
    }
    const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
    EventStream s;
    s.channel = channel;
    s.duration_s = static_cast<double>(get_le64(bytes + 8)) * 1e-12;
    const std::size_t n = (raw.size() - 16) / 8;
    s.timestamps_s.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        s.timestamps_s[k] = static_cast<double>(get_le64(bytes + 16 + 8 * k)) * 1e-12;
    }
    return s;
}

}  // namespace plpair
