#include "fbmtv/crossings.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fbmtv/errors.hpp"
#include "fbmtv/variation.hpp"

namespace fbmtv {

namespace {

void require_positive_c(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw validation_error("strip width must be finite and > 0, got " + format_double(c));
    }
}

enum class LastTouch : unsigned char { none, bottom, top };

// ---------------------------------------------------------------------------
// Armed-interval set: disjoint half-open intervals [lo, hi) kept sorted in a
// flat vector.  All queries are measure-based, so half-open bookkeeping is
// exact for the level integrals.

class IntervalSet {
public:
    void subtract(double lo, double hi) {
        if (!(lo < hi) || iv_.empty()) {
            return;
        }
        auto first = std::partition_point(iv_.begin(), iv_.end(),
                                          [lo](const auto& p) { return p.second <= lo; });
        if (first == iv_.end() || first->first >= hi) {
            return;
        }
        auto last = first;
        while (last != iv_.end() && last->first < hi) {
            ++last;
        }
        // Remnants of the first and last overlapped intervals survive.
        std::pair<double, double> left{first->first, lo};
        std::pair<double, double> right{hi, std::prev(last)->second};
        const bool keep_left = left.first < left.second;
        const bool keep_right = right.first < right.second;
        auto out = iv_.erase(first, last);
        if (keep_right) {
            out = iv_.insert(out, right);
        }
        if (keep_left) {
            iv_.insert(out, left);
        }
    }

    void add(double lo, double hi) {
        if (!(lo < hi)) {
            return;
        }
        auto first = std::partition_point(iv_.begin(), iv_.end(),
                                          [lo](const auto& p) { return p.second < lo; });
        auto last = first;
        while (last != iv_.end() && last->first <= hi) {
            lo = std::min(lo, last->first);
            hi = std::max(hi, last->second);
            ++last;
        }
        const auto out = iv_.erase(first, last);
        iv_.insert(out, {lo, hi});
    }

    template <typename WeightIntegral>
    double weighted_overlap(double lo, double hi, const WeightIntegral& weight) const {
        if (!(lo < hi)) {
            return 0.0;
        }
        double total = 0.0;
        auto it = std::partition_point(iv_.begin(), iv_.end(),
                                       [lo](const auto& p) { return p.second <= lo; });
        for (; it != iv_.end() && it->first < hi; ++it) {
            const double a = std::max(lo, it->first);
            const double b = std::min(hi, it->second);
            if (a < b) {
                total += weight(a, b);
            }
        }
        return total;
    }

private:
    std::vector<std::pair<double, double>> iv_;
};

// Level integral of the upcrossing count in one pass.  The state is the
// set of strip bottoms a whose last boundary touch was the bottom; an
// up-move p -> q completes the strips whose top lies in (p, q]:
//   - bottoms in [p, q-c) are touched and immediately completed,
//   - armed bottoms in [p-c, p) complete from the earlier touch.
// Afterwards everything interacting with [p-c, q) is resolved and the
// bottoms in [max(p, q-c), q) are armed.  Down-moves complete nothing for
// the up count; they re-arm [q, p) and disarm the tops passed, [q-c, q).
template <typename WeightIntegral>
double upcrossing_sweep(const std::vector<double>& x, double c, const WeightIntegral& weight) {
    IntervalSet armed;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double p = x[k];
        const double q = x[k + 1];
        if (q > p) {
            if (q - c > p) {
                total += armed.weighted_overlap(p - c, p, weight);
                total += weight(p, q - c);
            } else {
                total += armed.weighted_overlap(p - c, q - c, weight);
            }
            // Disarm exactly the bottoms whose top was passed; bottoms in
            // (q - c, p) saw neither boundary and must keep their state.
            armed.subtract(p - c, q - c);
            armed.add(std::max(p, q - c), q);
        } else if (q < p) {
            armed.subtract(q - c, p - c);
            armed.add(q, p);
        }
    }
    return total;
}

std::vector<double> negated(const std::vector<double>& x) {
    std::vector<double> out(x);
    for (double& v : out) {
        v = -v;
    }
    return out;
}

} // namespace

CrossingCounts strip_crossings(const SamplePath& path, double c, double a) {
    require_positive_c(c);
    if (!std::isfinite(a)) {
        throw validation_error("strip bottom must be finite");
    }
    const double top = a + c;
    const std::vector<double>& x = path.values();

    CrossingCounts counts;
    LastTouch last = LastTouch::none;
    const auto touch_bottom = [&]() {
        if (last == LastTouch::top) {
            ++counts.d;
        }
        last = LastTouch::bottom;
    };
    const auto touch_top = [&]() {
        if (last == LastTouch::bottom) {
            ++counts.u;
        }
        last = LastTouch::top;
    };
    const auto touch_sample = [&](double v) {
        if (v == a) {
            touch_bottom();
        } else if (v == top) {
            touch_top();
        }
    };

    touch_sample(x[0]);
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double p = x[k];
        const double q = x[k + 1];
        // Interior touches, strictly between the endpoints, in travel order;
        // endpoint touches are handled once, as sample events.
        if (q > p) {
            if (p < a && a < q) {
                touch_bottom();
            }
            if (p < top && top < q) {
                touch_top();
            }
        } else if (q < p) {
            if (q < top && top < p) {
                touch_top();
            }
            if (q < a && a < p) {
                touch_bottom();
            }
        }
        touch_sample(q);
    }
    counts.n = counts.u + counts.d;
    return counts;
}

CrossingCounts strip_crossings(const SamplePath& path, const TimeInterval& iv, double c, double a) {
    return strip_crossings(restrict(path, iv), c, a);
}

LevelCrossingSummary level_crossings(const SamplePath& path, const LevelGrid& grid) {
    const std::vector<double>& x = path.values();
    const double c = grid.c();

    const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
    // Strips p in [base, base + n_strips) can possibly be touched.
    const long long base = grid.floor_index(*min_it) - 1;
    const long long top_level = grid.floor_index(*max_it) + 2;
    const std::size_t n_strips = static_cast<std::size_t>(top_level - base) + 1;

    std::vector<LastTouch> last(n_strips, LastTouch::none);
    std::vector<std::uint64_t> up(n_strips, 0);
    std::vector<std::uint64_t> down(n_strips, 0);

    // A touch of grid level j is a top event for strip j-1 and a bottom
    // event for strip j.
    const auto touch_level = [&](long long j) {
        const std::size_t hi_strip = static_cast<std::size_t>(j - base);
        const std::size_t lo_strip = hi_strip - 1;
        if (last[lo_strip] == LastTouch::bottom) {
            ++up[lo_strip];
        }
        last[lo_strip] = LastTouch::top;
        if (last[hi_strip] == LastTouch::top) {
            ++down[hi_strip];
        }
        last[hi_strip] = LastTouch::bottom;
    };
    const auto touch_sample = [&](double v) {
        for (long long j = grid.floor_index(v) - 1; j <= grid.floor_index(v) + 1; ++j) {
            if (grid.level(j) == v) {
                touch_level(j);
                break;
            }
        }
    };

    touch_sample(x[0]);
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        const double p = x[k];
        const double q = x[k + 1];
        if (p == q) {
            continue;
        }
        const double lo = std::min(p, q);
        const double hi = std::max(p, q);
        long long j = grid.floor_index(lo) - 1;
        while (grid.level(j) <= lo) {
            ++j;
        }
        if (q > p) {
            for (; grid.level(j) < hi; ++j) {
                touch_level(j);
            }
        } else if (grid.level(j) < hi) {
            long long j_hi = j;
            while (grid.level(j_hi + 1) < hi) {
                ++j_hi;
            }
            for (; j_hi >= j; --j_hi) {
                touch_level(j_hi);
            }
        }
        touch_sample(q);
    }

    LevelCrossingSummary summary;
    for (std::size_t s = 0; s < n_strips; ++s) {
        const std::uint64_t n = up[s] + down[s];
        if (n == 0) {
            continue;
        }
        CrossingCounts counts{up[s], down[s], n};
        summary.per_level.emplace(base + static_cast<long long>(s), counts);
        summary.ku += counts.u;
        summary.kd += counts.d;
        summary.k += counts.n;
    }
    return summary;
}

LevelCrossingSummary level_crossings(const SamplePath& path, const TimeInterval& iv,
                                     const LevelGrid& grid) {
    return level_crossings(restrict(path, iv), grid);
}

LebesguePartition lebesgue_partition(const SamplePath& path, const LevelGrid& grid) {
    const std::vector<double>& x = path.values();
    const double c = grid.c();
    LebesguePartition partition{grid, {}};

    // Locate the first attainment of any grid level.
    std::size_t seg = 0;
    long long level_idx = 0;
    bool found = false;
    {
        const long long j0 = grid.floor_index(x[0]);
        for (long long j = j0 - 1; j <= j0 + 1; ++j) {
            if (grid.level(j) == x[0]) {
                level_idx = j;
                partition.points.push_back({path.time_at(0), level_idx, x[0]});
                found = true;
                break;
            }
        }
    }
    while (!found && seg < path.n_steps()) {
        const double p = x[seg];
        const double q = x[seg + 1];
        if (q > p) {
            long long j = grid.floor_index(p) - 1;
            while (grid.level(j) <= p) {
                ++j;
            }
            if (grid.level(j) <= q) {
                level_idx = j;
                found = true;
            }
        } else if (q < p) {
            long long j = grid.floor_index(p) + 1;
            while (grid.level(j) >= p) {
                --j;
            }
            if (grid.level(j) >= q) {
                level_idx = j;
                found = true;
            }
        }
        if (found) {
            const double level = grid.level(level_idx);
            const double frac = (level - p) / (q - p);
            partition.points.push_back(
                {path.time_at(seg) + frac * path.dt(), level_idx, level});
        } else {
            ++seg;
        }
    }
    if (!found) {
        return partition;
    }

    // First-exit walk: from each attained level, find the first later time
    // the path reaches an adjacent level.  Segment entry values stay inside
    // the open band, so a monotone segment can reach only one target.
    while (seg < path.n_steps()) {
        const double p = x[seg];
        const double q = x[seg + 1];
        const double up_target = grid.level(level_idx + 1);
        const double down_target = grid.level(level_idx - 1);
        long long next_idx = 0;
        double target = 0.0;
        if (q >= up_target && q > p) {
            next_idx = level_idx + 1;
            target = up_target;
        } else if (q <= down_target && q < p) {
            next_idx = level_idx - 1;
            target = down_target;
        } else {
            ++seg;
            continue;
        }
        const double frac = (target - p) / (q - p);
        partition.points.push_back({path.time_at(seg) + frac * path.dt(), next_idx, target});
        level_idx = next_idx;
        // Stay on this segment: it may cross further levels.
    }
    return partition;
}

double psi_variation(const LebesguePartition& partition, double p_exponent) {
    if (!(p_exponent >= 1.0) || !std::isfinite(p_exponent)) {
        throw validation_error("variation exponent must be finite and >= 1, got " +
                               format_double(p_exponent));
    }
    // Every step has magnitude exactly c by construction.
    const double step_term = std::pow(partition.grid.c(), p_exponent);
    return static_cast<double>(partition.step_count()) * step_term;
}

double banach_integral(const SamplePath& path, double c, BanachKind kind) {
    require_positive_c(c);
    const auto length = [](double lo, double hi) { return hi - lo; };
    switch (kind) {
        case BanachKind::up:
            return upcrossing_sweep(path.values(), c, length);
        case BanachKind::down:
            // Downcrossings of f over [a, a+c] are upcrossings of -f over
            // the reflected strip; with a constant weight the reflection
            // is measure-preserving.
            return upcrossing_sweep(negated(path.values()), c, length);
        case BanachKind::total:
            return upcrossing_sweep(path.values(), c, length) +
                   upcrossing_sweep(negated(path.values()), c, length);
    }
    throw validation_error("unknown crossing kind");
}

double banach_integral(const SamplePath& path, const TimeInterval& iv, double c, BanachKind kind) {
    return banach_integral(restrict(path, iv), c, kind);
}

double weighted_upcrossing_integral(const SamplePath& path, double c,
                                    const std::function<double(double, double)>& weight_integral) {
    require_positive_c(c);
    return upcrossing_sweep(path.values(), c, weight_integral);
}

double kbar(const SamplePath& path, double c) {
    require_positive_c(c);
    return ttv_value(path, c) / c;
}

double kbar(const SamplePath& path, const TimeInterval& iv, double c) {
    return kbar(restrict(path, iv), c);
}

} // namespace fbmtv
