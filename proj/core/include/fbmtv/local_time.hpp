#pragma once

#include <vector>

#include "fbmtv/path.hpp"

namespace fbmtv {

/**
 * Bounded piecewise-constant test function: value plateau_values[i] on
 * [breakpoints[i], breakpoints[i+1]), zero outside the outermost
 * breakpoints.  Piecewise-constant weights keep every integral in this
 * module exact (no quadrature).
 */
class TestFunction {
public:
    TestFunction(std::vector<double> breakpoints, std::vector<double> plateau_values);

    /** Indicator of [lo, hi). */
    static TestFunction indicator(double lo, double hi);

    double operator()(double x) const;
    /** Exact integral of the function over [lo, hi], lo <= hi. */
    double integral(double lo, double hi) const;
    double sup_norm() const noexcept { return sup_norm_; }

    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    const std::vector<double>& plateau_values() const noexcept { return values_; }

    /** Pointwise sum, with merged breakpoints. */
    friend TestFunction operator+(const TestFunction& lhs, const TestFunction& rhs);

private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;
    std::vector<double> prefix_; // integral from breakpoints_[0] to breakpoints_[i]
    double sup_norm_ = 0.0;

    double cumulative(double x) const;
};

/**
 * Exact occupation integral int_0^1 g(W_t) dt of the piecewise-linear
 * interpolation: each segment spends time in a level set proportionally
 * to the set's length.  The path must span [0, 1].
 */
double occupation_integral(const SamplePath& path, const TestFunction& g);

/**
 * The normalized-upcrossing functional
 *   c^{1/h - 1} * integral over a of U_{0,1}(c, path - a) g(a) da,
 * computed exactly via the weighted level sweep.  The path must span [0, 1].
 */
double upcrossing_functional(const SamplePath& path, double c, HurstIndex h,
                             const TestFunction& g);

/** A sampled estimate of the occupation-measure density over path levels. */
struct OccupationDensity {
    std::vector<double> levels;  // strictly increasing
    std::vector<double> density; // nonnegative

    /** Trapezoid integral of the curve over the level range. */
    double integral() const;
};

/**
 * Local-time curve a -> (2 / frak_c) * c^{1/h - 1} * U_{0,1}(c, path - a)
 * sampled at the given levels.  frak_c is the caller-supplied estimate of
 * the variation constant for this Hurst index (this module never assumes
 * a value for it).
 */
OccupationDensity local_time_curve(const SamplePath& path, double c, HurstIndex h,
                                   const std::vector<double>& levels, double frak_c_estimate);

/**
 * Per-c relative error between the normalized upcrossing functional
 * (2 / frak_c) * upcrossing_functional and the occupation integral, for a
 * strictly decreasing list of c values.  A 0-vs-0 comparison reports 0.
 */
std::vector<double> local_time_compare(const SamplePath& path, const std::vector<double>& c_list,
                                       HurstIndex h, const TestFunction& g,
                                       double frak_c_estimate);

} // namespace fbmtv
