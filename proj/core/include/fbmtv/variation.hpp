#pragma once

#include <cstddef>
#include <vector>

#include "fbmtv/path.hpp"

namespace fbmtv {

/** Which truncated-variation functional to evaluate. */
enum class VariationKind { ttv, utv, dtv };

/**
 * One selected index pair (s, t) with its payoff:
 * (x_t - x_s) - c for upward pairs, (x_s - x_t) - c for downward pairs.
 * Only pairs with strictly positive payoff are ever emitted.
 */
struct WitnessPair {
    std::size_t s_index;
    std::size_t t_index;
    double payoff;
};

/**
 * Value of a truncated-variation functional together with an optimal
 * selection of index pairs attaining it.  `value` is the left-to-right
 * sum of the witness payoffs, so re-evaluating the witness reproduces
 * it bit for bit.
 */
struct VariationResult {
    double value = 0.0;
    std::vector<WitnessPair> witness;
};

/**
 * Upward truncated variation: sup of sum((x_{t_i} - x_{s_i}) - c)_+ over
 * index pairs s_1 < t_1 < s_2 < t_2 < ...  Linear-time two-state dynamic
 * program (a pending start is either open or all pairs are closed);
 * the witness is reconstructed from backpointers.
 */
VariationResult utv(const SamplePath& path, double c);

/** Downward truncated variation: utv of the negated path. */
VariationResult dtv(const SamplePath& path, double c);

/**
 * Two-sided truncated variation: sup of sum(|x_{t_i} - x_{s_i}| - c)_+ over
 * pairs s_1 <= t_1 <= s_2 <= ... (consecutive pairs may share an index).
 * Computed by a four-state dynamic program (closed / pending-up /
 * pending-down, with same-index reopening) and cross-checked against
 * utv + dtv; a discrepancy beyond 1e-9 (scaled by the path oscillation)
 * throws invariant_violation.
 */
VariationResult ttv(const SamplePath& path, double c);

/**
 * Value-only fast paths: O(1) extra memory, no witness reconstruction.
 * ttv_value performs the same utv+dtv cross-check as ttv.
 */
double utv_value(const SamplePath& path, double c);
double dtv_value(const SamplePath& path, double c);
double ttv_value(const SamplePath& path, double c);

/** As above, operating directly on a value sequence with at least 2 entries. */
double utv_value(const std::vector<double>& values, double c);
double dtv_value(const std::vector<double>& values, double c);
double ttv_value(const std::vector<double>& values, double c);

/** Sum of |x_{k+1} - x_k| accumulated left to right. */
double sum_abs_increments(const std::vector<double>& values);

/** One knot of the taut string, anchored at a sample index. */
struct TautKnot {
    std::size_t index;
    double level;
};

/**
 * The minimal-total-variation function staying within c/2 of the path at
 * every sample, stored as linear-interpolation knots.  Its total variation
 * equals the two-sided truncated variation of the path.
 */
struct TautString {
    std::vector<TautKnot> knots; // strictly increasing indices, covering [0, N]

    /** Value of the string at (possibly fractional) sample index q. */
    double at_index(double q) const;
    /** Sum of |level differences| over consecutive knots. */
    double total_variation() const;
};

/**
 * Greedy tube sweep: the string stays put until the tube forces a move,
 * then moves by the least amount that re-enters the tube.  Requires c > 0.
 */
TautString taut_string(const SamplePath& path, double c);

/**
 * Exact supremum by exhaustive recursion over interleaved index pairs.
 * Independent of the dynamic programs; the reference oracle for them.
 * Path length is capped at 14 samples.
 */
double brute_force_variation(const SamplePath& path, double c, VariationKind kind);

} // namespace fbmtv
