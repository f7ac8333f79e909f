#include "fbmtv/variation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "fbmtv/errors.hpp"

namespace fbmtv {

namespace {

void require_truncation(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
        throw validation_error("truncation threshold must be finite and >= 0, got " +
                               format_double(c));
    }
}

// ---------------------------------------------------------------------------
// Value-only dynamic programs.
//
// One-sided (sign = +1 upward, -1 downward, using DTV(x) = UTV(-x)):
// two states per prefix — CLOSED (all pairs completed) and OPEN (a start
// index is pending).  Transitions:
//   OPEN_k   = max(OPEN_{k-1},   CLOSED_{k-1} - x_k)     (keep / open at k)
//   CLOSED_k = max(CLOSED_{k-1}, OPEN_{k-1} + x_k - c)   (keep / close at k)
// The strict interleaving s_1 < t_1 < s_2 < ... is built in: opening at k
// reads CLOSED_{k-1}, so a close and an open can never share an index.

double one_sided_value(const std::vector<double>& x, double c, double sign) {
    const std::size_t n = x.size() - 1;
    double open = -sign * x[0];
    double closed = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double xk = sign * x[k];
        const double closed_next = std::max(closed, open + xk - c);
        const double open_next = std::max(open, closed - xk);
        closed = closed_next;
        open = open_next;
    }
    return closed;
}

// Two-sided: four transitions over three states — CLOSED, pending-up,
// pending-down.  CLOSED_k is computed first and the pending states may
// reopen from it at the same index, implementing the non-strict chaining
// s_{i+1} >= t_i that the two-sided supremum permits (an oscillating path
// can reuse a single extreme sample as both a close and the next open).

double two_sided_value(const std::vector<double>& x, double c) {
    const std::size_t n = x.size() - 1;
    double cl = 0.0;
    double up = -x[0];
    double dn = x[0];
    for (std::size_t k = 1; k <= n; ++k) {
        const double xk = x[k];
        cl = std::max({cl, up + xk - c, dn - xk - c});
        up = std::max(up, cl - xk);
        dn = std::max(dn, cl + xk);
    }
    return cl;
}

// Additivity cross-check: the two-sided value must match the sum of the
// one-sided values.  Tolerance is scaled by the path oscillation; a
// violation indicates a bug, not bad input.
void check_additivity(const std::vector<double>& x, double c, double two_sided) {
    const double u = one_sided_value(x, c, +1.0);
    const double d = one_sided_value(x, c, -1.0);
    const double scale = std::max(1.0, sum_abs_increments(x));
    const double diff = std::abs(two_sided - (u + d));
    if (diff > 1e-9 * scale) {
        throw invariant_violation(
            "two-sided truncated variation " + format_double(two_sided) +
            " disagrees with one-sided sum " + format_double(u + d) +
            " (diff " + format_double(diff) + ", c " + format_double(c) + ")");
    }
}

// ---------------------------------------------------------------------------
// Witness-producing variants.  Choices are recorded per index and ties
// resolve toward carrying the previous state, so a pair is only created
// on a strict improvement — every reconstructed payoff is then strictly
// positive and witnesses are minimal.

VariationResult one_sided_witness(const std::vector<double>& x, double c, double sign) {
    const std::size_t n = x.size() - 1;
    std::vector<std::uint8_t> close_here(n + 1, 0);
    std::vector<std::uint8_t> open_here(n + 1, 0);
    open_here[0] = 1;
    double open = -sign * x[0];
    double closed = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double xk = sign * x[k];
        double closed_next = closed;
        if (open + xk - c > closed_next) {
            closed_next = open + xk - c;
            close_here[k] = 1;
        }
        double open_next = open;
        if (closed - xk > open_next) {
            open_next = closed - xk;
            open_here[k] = 1;
        }
        closed = closed_next;
        open = open_next;
    }

    std::vector<WitnessPair> pairs;
    std::ptrdiff_t k = static_cast<std::ptrdiff_t>(n);
    while (k >= 1) {
        if (!close_here[k]) {
            --k;
            continue;
        }
        const std::size_t t = static_cast<std::size_t>(k);
        std::ptrdiff_t j = k - 1;
        while (!open_here[j]) {
            --j;
        }
        pairs.push_back({static_cast<std::size_t>(j), t, 0.0});
        k = j - 1;
    }
    std::reverse(pairs.begin(), pairs.end());

    VariationResult result;
    for (WitnessPair& p : pairs) {
        p.payoff = sign > 0.0 ? (x[p.t_index] - x[p.s_index]) - c
                              : (x[p.s_index] - x[p.t_index]) - c;
        result.value += p.payoff;
    }
    result.witness = std::move(pairs);
    return result;
}

VariationResult two_sided_witness(const std::vector<double>& x, double c) {
    const std::size_t n = x.size() - 1;
    // 0 = carry, 1 = close an up pair here, 2 = close a down pair here
    std::vector<std::uint8_t> close_kind(n + 1, 0);
    // 0 = carry, 1 = (re)opened here from the closed state at the same index
    std::vector<std::uint8_t> open_up(n + 1, 0);
    std::vector<std::uint8_t> open_dn(n + 1, 0);
    open_up[0] = 1;
    open_dn[0] = 1;
    double cl = 0.0;
    double up = -x[0];
    double dn = x[0];
    for (std::size_t k = 1; k <= n; ++k) {
        const double xk = x[k];
        double cl_next = cl;
        if (up + xk - c > cl_next) {
            cl_next = up + xk - c;
            close_kind[k] = 1;
        }
        if (dn - xk - c > cl_next) {
            cl_next = dn - xk - c;
            close_kind[k] = 2;
        }
        cl = cl_next;
        if (cl - xk > up) {
            up = cl - xk;
            open_up[k] = 1;
        }
        if (cl + xk > dn) {
            dn = cl + xk;
            open_dn[k] = 1;
        }
    }

    struct RawPair {
        std::size_t s;
        std::size_t t;
        bool upward;
    };
    std::vector<RawPair> raw;
    std::ptrdiff_t k = static_cast<std::ptrdiff_t>(n);
    while (k >= 1) {
        if (close_kind[k] == 0) {
            --k;
            continue;
        }
        const bool upward = close_kind[k] == 1;
        const std::size_t t = static_cast<std::size_t>(k);
        const std::vector<std::uint8_t>& opened = upward ? open_up : open_dn;
        std::ptrdiff_t j = k - 1;
        while (!opened[j]) {
            --j;
        }
        raw.push_back({static_cast<std::size_t>(j), t, upward});
        k = j; // the pair opened from the closed state at this same index
    }
    std::reverse(raw.begin(), raw.end());

    VariationResult result;
    result.witness.reserve(raw.size());
    for (const RawPair& p : raw) {
        const double payoff = p.upward ? (x[p.t] - x[p.s]) - c : (x[p.s] - x[p.t]) - c;
        result.value += payoff;
        result.witness.push_back({p.s, p.t, payoff});
    }
    return result;
}

// c = 0: the two-sided variation telescopes to the plain increment sum.
// Returning exactly that sum (with single-step witness pairs, legal under
// non-strict chaining) keeps the degenerate case bit-exact.
VariationResult two_sided_zero(const std::vector<double>& x) {
    VariationResult result;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double d = std::abs(x[k + 1] - x[k]);
        result.value += d;
        if (d > 0.0) {
            result.witness.push_back({k, k + 1, d});
        }
    }
    return result;
}

} // namespace

double sum_abs_increments(const std::vector<double>& values) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        total += std::abs(values[k + 1] - values[k]);
    }
    return total;
}

double utv_value(const std::vector<double>& values, double c) {
    require_truncation(c);
    return one_sided_value(values, c, +1.0);
}

double dtv_value(const std::vector<double>& values, double c) {
    require_truncation(c);
    return one_sided_value(values, c, -1.0);
}

double ttv_value(const std::vector<double>& values, double c) {
    require_truncation(c);
    const double value =
        c == 0.0 ? sum_abs_increments(values) : two_sided_value(values, c);
    check_additivity(values, c, value);
    return value;
}

double utv_value(const SamplePath& path, double c) { return utv_value(path.values(), c); }
double dtv_value(const SamplePath& path, double c) { return dtv_value(path.values(), c); }
double ttv_value(const SamplePath& path, double c) { return ttv_value(path.values(), c); }

VariationResult utv(const SamplePath& path, double c) {
    require_truncation(c);
    return one_sided_witness(path.values(), c, +1.0);
}

VariationResult dtv(const SamplePath& path, double c) {
    require_truncation(c);
    return one_sided_witness(path.values(), c, -1.0);
}

VariationResult ttv(const SamplePath& path, double c) {
    require_truncation(c);
    VariationResult result = c == 0.0 ? two_sided_zero(path.values())
                                      : two_sided_witness(path.values(), c);
    check_additivity(path.values(), c, result.value);
    return result;
}

double TautString::at_index(double q) const {
    if (knots.empty()) {
        throw validation_error("taut string has no knots");
    }
    if (q <= static_cast<double>(knots.front().index)) {
        return knots.front().level;
    }
    if (q >= static_cast<double>(knots.back().index)) {
        return knots.back().level;
    }
    const auto it = std::upper_bound(
        knots.begin(), knots.end(), q,
        [](double lhs, const TautKnot& k) { return lhs < static_cast<double>(k.index); });
    const TautKnot& hi = *it;
    const TautKnot& lo = *std::prev(it);
    const double span = static_cast<double>(hi.index - lo.index);
    const double w = (q - static_cast<double>(lo.index)) / span;
    return lo.level + w * (hi.level - lo.level);
}

double TautString::total_variation() const {
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        tv += std::abs(knots[i + 1].level - knots[i].level);
    }
    return tv;
}

TautString taut_string(const SamplePath& path, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw validation_error("taut string requires a truncation threshold > 0, got " +
                               format_double(c));
    }
    const std::vector<double>& x = path.values();
    const std::size_t n = path.n_steps();
    const double half = 0.5 * c;

    TautString out;

    // Phase 1: while all tube intervals still intersect, the string can be
    // a single constant; track the running intersection [lo, hi].
    double lo = x[0] - half;
    double hi = x[0] + half;
    std::size_t k = 1;
    double p = 0.0;
    bool forced = false;
    for (; k <= n; ++k) {
        const double a = x[k] - half;
        const double b = x[k] + half;
        const double nlo = std::max(lo, a);
        const double nhi = std::min(hi, b);
        if (nlo <= nhi) {
            lo = nlo;
            hi = nhi;
            continue;
        }
        // First forced move: the constant prefix sits on the boundary
        // nearest the violating interval, then moves the least amount
        // that re-enters the tube.
        forced = true;
        p = a > hi ? hi : lo;
        out.knots.push_back({0, p});
        if (k - 1 > 0) {
            out.knots.push_back({k - 1, p});
        }
        const double np = std::clamp(p, a, b);
        out.knots.push_back({k, np});
        p = np;
        ++k;
        break;
    }

    if (!forced) {
        const double level = std::clamp(x[0], lo, hi);
        out.knots.push_back({0, level});
        out.knots.push_back({n, level});
        return out;
    }

    // Phase 2: lazily track the tube — stay put unless clamped out.
    for (; k <= n; ++k) {
        const double a = x[k] - half;
        const double b = x[k] + half;
        const double np = std::clamp(p, a, b);
        if (np != p) {
            if (out.knots.back().index != k - 1) {
                out.knots.push_back({k - 1, p});
            }
            out.knots.push_back({k, np});
            p = np;
        }
    }
    if (out.knots.back().index != n) {
        out.knots.push_back({n, p});
    }
    return out;
}

double brute_force_variation(const SamplePath& path, double c, VariationKind kind) {
    require_truncation(c);
    if (path.size() > 14) {
        throw validation_error("exhaustive variation search is capped at 14 samples, got " +
                               std::to_string(path.size()));
    }
    std::vector<double> x = path.values();
    if (kind == VariationKind::dtv) {
        for (double& v : x) {
            v = -v;
        }
        kind = VariationKind::utv;
    }
    const bool two_sided = kind == VariationKind::ttv;
    const std::size_t last = x.size() - 1;

    // Exhaustive recursion over interleaved pairs: pick the first pair
    // (s, t) with s >= start of either direction, then recurse on the
    // rest.  Two-sided pairs may chain at the same index (next start = t);
    // one-sided chaining is strict (next start = t + 1).  A pair's
    // contribution folds into the running value left to right, so every
    // enumerated chain evaluates to the same double the sweep produces.
    const auto best_from = [&](auto&& self, std::size_t start, double acc) -> double {
        double best = acc;
        for (std::size_t s = start; s < last; ++s) {
            for (std::size_t t = s + 1; t <= last; ++t) {
                if (x[t] - x[s] > c) {
                    const double value = ((acc - x[s]) + x[t]) - c;
                    best = std::max(best, self(self, two_sided ? t : t + 1, value));
                }
                if (two_sided && x[s] - x[t] > c) {
                    const double value = ((acc + x[s]) - x[t]) - c;
                    best = std::max(best, self(self, t, value));
                }
            }
        }
        return best;
    };
    return best_from(best_from, 0, 0.0);
}

} // namespace fbmtv
