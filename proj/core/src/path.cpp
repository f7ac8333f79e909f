#include "fbmtv/path.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fbmtv/errors.hpp"

namespace fbmtv {

HurstIndex::HurstIndex(double h) : h_(h) {
    if (!(h > 0.0 && h < 1.0)) {
        throw validation_error("Hurst index must lie strictly in (0, 1), got " +
                               format_double(h));
    }
}

Truncation::Truncation(double c) : c_(c) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
        throw validation_error("truncation threshold must be finite and >= 0, got " +
                               format_double(c));
    }
}

TimeInterval::TimeInterval(double s_, double t_) : s(s_), t(t_) {
    if (!(s >= 0.0) || !(t > s) || !std::isfinite(t)) {
        throw validation_error("time interval requires 0 <= s < t, got [" +
                               format_double(s) + ", " + format_double(t) + "]");
    }
}

LevelGrid::LevelGrid(double c, double rho) : c_(c) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw validation_error("level grid spacing must be finite and > 0, got " +
                               format_double(c));
    }
    if (!std::isfinite(rho)) {
        throw validation_error("level grid offset must be finite");
    }
    // Normalise the offset into (-c/2, c/2]; grids differing by whole steps
    // are the same object.
    double r = std::remainder(rho, c);
    if (r <= -0.5 * c) {
        r += c;
    }
    rho_ = r;
}

double LevelGrid::level(long long j) const noexcept {
    return rho_ + static_cast<double>(j) * c_;
}

long long LevelGrid::floor_index(double x) const noexcept {
    // Largest j with level(j) <= x, made consistent with level() itself:
    // the quotient only seeds the search, the boundary is decided by the
    // exact same expression callers observe.
    long long j = static_cast<long long>(std::floor((x - rho_) / c_));
    while (level(j + 1) <= x) ++j;
    while (level(j) > x) --j;
    return j;
}

SamplePath::SamplePath(double t0, double dt, std::vector<double> values)
    : t0_(t0), dt_(dt), values_(std::move(values)) {
    if (!std::isfinite(t0_)) {
        throw validation_error("path origin must be finite");
    }
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
        throw validation_error("path spacing must be finite and > 0, got " +
                               format_double(dt_));
    }
    if (values_.size() < 2) {
        throw validation_error("a path needs at least two samples, got " +
                               std::to_string(values_.size()));
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k])) {
            throw validation_error("path value at index " + std::to_string(k) +
                                   " is not finite");
        }
    }
}

double SamplePath::time_at(std::size_t k) const {
    if (k >= values_.size()) {
        throw validation_error("sample index " + std::to_string(k) +
                               " out of range (path has " +
                               std::to_string(values_.size()) + " samples)");
    }
    return t0_ + static_cast<double>(k) * dt_;
}

std::size_t SamplePath::index_at(double time) const {
    const double pos = (time - t0_) / dt_;
    const double rounded = std::round(pos);
    if (rounded < 0.0 || rounded > static_cast<double>(n_steps()) ||
        std::abs(pos - rounded) > 1e-9 * std::max(1.0, std::abs(rounded))) {
        throw validation_error("time " + format_double(time) +
                               " does not lie on the sample grid (origin " +
                               format_double(t0_) + ", spacing " +
                               format_double(dt_) + ")");
    }
    return static_cast<std::size_t>(rounded);
}

SamplePath negate(const SamplePath& path) {
    std::vector<double> v(path.values());
    for (double& x : v) {
        x = -x;
    }
    return SamplePath(path.t0(), path.dt(), std::move(v));
}

SamplePath restrict(const SamplePath& path, const TimeInterval& interval) {
    const std::size_t a = path.index_at(interval.s);
    const std::size_t b = path.index_at(interval.t);
    if (b <= a) {
        throw validation_error("restriction interval collapses to fewer than two samples");
    }
    std::vector<double> v(path.values().begin() + static_cast<std::ptrdiff_t>(a),
                          path.values().begin() + static_cast<std::ptrdiff_t>(b) + 1);
    return SamplePath(path.time_at(a), path.dt(), std::move(v));
}

SamplePath self_similar_rescale(const SamplePath& path, double lambda, HurstIndex h) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw validation_error("time dilation must be finite and > 0, got " +
                               format_double(lambda));
    }
    const double scale = std::pow(lambda, h.value());
    std::vector<double> v(path.values());
    for (double& x : v) {
        x *= scale;
    }
    return SamplePath(path.t0() * lambda, path.dt() * lambda, std::move(v));
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

namespace {

std::string strip_ws(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r' || s[a] == '\n')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r' || s[b - 1] == '\n')) --b;
    return s.substr(a, b - a);
}

double parse_field(const std::string& field, std::size_t line_no, const std::string& origin) {
    const std::string t = strip_ws(field);
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &consumed);
    } catch (const std::exception&) {
        throw validation_error(origin + ":" + std::to_string(line_no) +
                               ": cannot parse number from '" + field + "'");
    }
    if (consumed != t.size() || t.empty()) {
        throw validation_error(origin + ":" + std::to_string(line_no) +
                               ": trailing characters in number '" + field + "'");
    }
    return value;
}

} // namespace

SamplePath read_path_csv(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) {
        throw validation_error(origin + ": empty input, expected CSV with header 't,value'");
    }
    if (strip_ws(line) != "t,value") {
        throw validation_error(origin + ": expected header 't,value', got '" +
                               strip_ws(line) + "'");
    }
    std::vector<double> times;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = strip_ws(line);
        if (row.empty()) {
            continue;
        }
        const std::size_t comma = row.find(',');
        if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos) {
            throw validation_error(origin + ":" + std::to_string(line_no) +
                                   ": expected exactly two comma-separated fields");
        }
        times.push_back(parse_field(row.substr(0, comma), line_no, origin));
        values.push_back(parse_field(row.substr(comma + 1), line_no, origin));
    }
    if (times.size() < 2) {
        throw validation_error(origin + ": a path needs at least two rows, got " +
                               std::to_string(times.size()));
    }
    const double t0 = times.front();
    const double dt = (times.back() - t0) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) {
        throw validation_error(origin + ": time column must be strictly increasing");
    }
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double step = times[k + 1] - times[k];
        if (std::abs(step - dt) > 1e-9 * dt) {
            throw validation_error(origin + ": non-uniform time grid at row " +
                                   std::to_string(k + 2) + " (step " + format_double(step) +
                                   ", expected " + format_double(dt) + ")");
        }
    }
    return SamplePath(t0, dt, std::move(values));
}

SamplePath read_path_csv_file(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) {
        throw validation_error("cannot open '" + filename + "' for reading");
    }
    return read_path_csv(in, filename);
}

void write_path_csv(const SamplePath& path, std::ostream& out) {
    out << "t,value\n";
    for (std::size_t k = 0; k < path.size(); ++k) {
        out << format_double(path.time_at(k)) << ',' << format_double(path[k]) << '\n';
    }
}

void write_path_csv_file(const SamplePath& path, const std::string& filename) {
    std::ofstream out(filename);
    if (!out) {
        throw validation_error("cannot open '" + filename + "' for writing");
    }
    write_path_csv(path, out);
    out.flush();
    if (!out) {
        throw validation_error("error while writing '" + filename + "'");
    }
}

} // namespace fbmtv
