#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace fbmtv {

/** Hurst index of a fractional Brownian motion; must lie strictly in (0, 1). */
class HurstIndex {
public:
    explicit HurstIndex(double h);
    double value() const noexcept { return h_; }

private:
    double h_;
};

/**
 * Truncation threshold c >= 0 used by the truncated-variation functionals.
 * c == 0 degenerates to the classical (untruncated) total variation.
 */
class Truncation {
public:
    explicit Truncation(double c);
    double value() const noexcept { return c_; }

private:
    double c_;
};

/** Closed time interval [s, t] with 0 <= s < t. */
struct TimeInterval {
    TimeInterval(double s, double t);
    double s;
    double t;
    double length() const noexcept { return t - s; }
};

/**
 * The doubly infinite level grid { rho + j*c : j integer } for c > 0.
 * The offset is stored normalised into (-c/2, c/2], so grids that differ
 * by a whole number of steps compare equal.
 */
class LevelGrid {
public:
    LevelGrid(double c, double rho);
    double c() const noexcept { return c_; }
    double rho() const noexcept { return rho_; }
    /** Level rho + j*c. */
    double level(long long j) const noexcept;
    /** Index of the closest grid level at or below x. */
    long long floor_index(double x) const noexcept;

private:
    double c_;
    double rho_;
};

/**
 * A scalar path sampled on a uniform time grid t0 + k*dt, k = 0..N.
 * Holds at least two samples; all values are finite and dt > 0.
 * Times are always derived from (t0, dt, index) rather than stored, so
 * equality of time points is exact by construction.
 */
class SamplePath {
public:
    SamplePath(double t0, double dt, std::vector<double> values);

    double t0() const noexcept { return t0_; }
    double dt() const noexcept { return dt_; }
    const std::vector<double>& values() const noexcept { return values_; }

    /** Number of samples (one more than the number of steps). */
    std::size_t size() const noexcept { return values_.size(); }
    /** Number of increments N. */
    std::size_t n_steps() const noexcept { return values_.size() - 1; }

    double time_at(std::size_t k) const;
    double duration() const noexcept { return dt_ * static_cast<double>(n_steps()); }

    /**
     * Grid index of the given time point.  The time must coincide with a
     * grid node up to a relative tolerance of 1e-9 * dt, otherwise a
     * validation_error naming the offending time is thrown.
     */
    std::size_t index_at(double time) const;

    double operator[](std::size_t k) const { return values_[k]; }

private:
    double t0_;
    double dt_;
    std::vector<double> values_;
};

/** Pointwise negation; time grid is unchanged. */
SamplePath negate(const SamplePath& path);

/**
 * Sub-path over [interval.s, interval.t].  Both endpoints must lie on the
 * sample grid of `path`.
 */
SamplePath restrict(const SamplePath& path, const TimeInterval& interval);

/**
 * Image of the path under the self-similarity map with time dilation
 * lambda > 0: times are multiplied by lambda and values by lambda^h.
 * For fractional Brownian motion with Hurst index h the result is equal
 * in law to the path observed on the dilated grid.
 */
SamplePath self_similar_rescale(const SamplePath& path, double lambda, HurstIndex h);

/**
 * Reads a path from CSV with header "t,value".  The time column must form
 * a uniform grid (each step within relative tolerance 1e-9 of the overall
 * spacing) and every value must be finite.
 */
SamplePath read_path_csv(std::istream& in, const std::string& origin = "<stream>");
SamplePath read_path_csv_file(const std::string& filename);

/** Writes CSV with header "t,value" and 17 significant digits per field. */
void write_path_csv(const SamplePath& path, std::ostream& out);
void write_path_csv_file(const SamplePath& path, const std::string& filename);

/** Formats a double with 17 significant digits (round-trip exact). */
std::string format_double(double x);

} // namespace fbmtv
