#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "fbmtv/path.hpp"

namespace fbmtv {

/** Completed up/down crossings of one strip; n = u + d and |u - d| <= 1. */
struct CrossingCounts {
    std::uint64_t u = 0;
    std::uint64_t d = 0;
    std::uint64_t n = 0;
};

/**
 * Crossing counts aggregated over every strip [level(p), level(p+1)] of a
 * level grid; per_level keeps only strips with nonzero activity.
 */
struct LevelCrossingSummary {
    std::uint64_t k = 0;
    std::uint64_t ku = 0;
    std::uint64_t kd = 0;
    std::map<long long, CrossingCounts> per_level;
};

/** One point of a Lebesgue partition: a first-exit time and the grid level attained. */
struct LebesguePoint {
    double time;
    long long level_index;
    double level;
};

/**
 * Partition of time by consecutive first-exit times: after attaining a grid
 * level, the next point is the first time the interpolated path leaves the
 * open band of half-width c around it, landing on an adjacent level.
 * Consecutive level indices therefore differ by exactly +-1.
 */
struct LebesguePartition {
    LevelGrid grid;
    std::vector<LebesguePoint> points;

    std::size_t step_count() const noexcept {
        return points.empty() ? 0 : points.size() - 1;
    }
};

/**
 * Completed up/down crossings of the strip [a, a+c] by the piecewise-linear
 * interpolation.  A sample value equal to a boundary counts as touching it,
 * and an upcrossing completes at the first touch of the upper boundary.
 */
CrossingCounts strip_crossings(const SamplePath& path, double c, double a);
CrossingCounts strip_crossings(const SamplePath& path, const TimeInterval& iv, double c, double a);

/** Sums strip_crossings over all strips of the grid in one linear sweep. */
LevelCrossingSummary level_crossings(const SamplePath& path, const LevelGrid& grid);
LevelCrossingSummary level_crossings(const SamplePath& path, const TimeInterval& iv,
                                     const LevelGrid& grid);

/** First-exit Lebesgue partition of the interpolated path over the grid. */
LebesguePartition lebesgue_partition(const SamplePath& path, const LevelGrid& grid);

/**
 * Sum of |level increment|^p over the partition steps.  Every step has
 * magnitude exactly c, so this equals (step count) * c^p.
 * Requires p_exponent >= 1.
 */
double psi_variation(const LebesguePartition& partition, double p_exponent);

/** Which crossing count to integrate over levels. */
enum class BanachKind { up, down, total };

/**
 * Exact level integral of the strip-crossing count:
 * integral over a of count(c, path - a) da.  The integrand is piecewise
 * constant in a with breakpoints at the sample values and the values
 * shifted by c; the sweep resolves it exactly (no quadrature).  Equals
 * UTV / DTV / TTV respectively.
 */
double banach_integral(const SamplePath& path, double c, BanachKind kind);
double banach_integral(const SamplePath& path, const TimeInterval& iv, double c, BanachKind kind);

/**
 * Weighted variant used by local-time estimation:
 * integral over a of U(c, path - a) * w(a) da, where the weight enters
 * through its interval integral W(lo, hi) = integral of w over [lo, hi).
 * W must be additive; it is only ever evaluated on finite intervals.
 */
double weighted_upcrossing_integral(const SamplePath& path, double c,
                                    const std::function<double(double, double)>& weight_integral);

/** Normalized crossing count TTV / c. */
double kbar(const SamplePath& path, double c);
double kbar(const SamplePath& path, const TimeInterval& iv, double c);

} // namespace fbmtv
