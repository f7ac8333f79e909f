#include "fbmtv/local_time.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

#include "fbmtv/crossings.hpp"
#include "fbmtv/errors.hpp"

namespace fbmtv {

namespace {

void require_unit_span(const SamplePath& path, const char* what) {
    const double t0 = path.time_at(0);
    const double t1 = path.time_at(path.size() - 1);
    if (std::abs(t0) > 1e-9 || std::abs(t1 - 1.0) > 1e-9) {
        throw validation_error(std::string(what) + " requires a path spanning [0, 1], got [" +
                               format_double(t0) + ", " + format_double(t1) + "]");
    }
}

} // namespace

TestFunction::TestFunction(std::vector<double> breakpoints, std::vector<double> plateau_values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(plateau_values)) {
    if (breakpoints_.size() < 2) {
        throw validation_error("test function needs at least two breakpoints");
    }
    if (values_.size() + 1 != breakpoints_.size()) {
        throw validation_error("test function needs exactly one plateau value per cell");
    }
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
        if (!std::isfinite(breakpoints_[i])) {
            throw validation_error("test function breakpoints must be finite");
        }
        if (i > 0 && !(breakpoints_[i - 1] < breakpoints_[i])) {
            throw validation_error("test function breakpoints must be strictly increasing");
        }
    }
    prefix_.resize(breakpoints_.size(), 0.0);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw validation_error("test function plateau values must be finite");
        }
        sup_norm_ = std::max(sup_norm_, std::abs(values_[i]));
        prefix_[i + 1] = prefix_[i] + values_[i] * (breakpoints_[i + 1] - breakpoints_[i]);
    }
}

TestFunction TestFunction::indicator(double lo, double hi) {
    return TestFunction({lo, hi}, {1.0});
}

double TestFunction::operator()(double x) const {
    if (x < breakpoints_.front() || x >= breakpoints_.back()) return 0.0;
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    const auto cell = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return values_[cell];
}

double TestFunction::cumulative(double x) const {
    if (x <= breakpoints_.front()) return 0.0;
    if (x >= breakpoints_.back()) return prefix_.back();
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    const auto cell = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return prefix_[cell] + values_[cell] * (x - breakpoints_[cell]);
}

double TestFunction::integral(double lo, double hi) const {
    if (!(lo <= hi)) {
        throw validation_error("test function integral needs lo <= hi");
    }
    return cumulative(hi) - cumulative(lo);
}

TestFunction operator+(const TestFunction& lhs, const TestFunction& rhs) {
    std::vector<double> merged;
    merged.reserve(lhs.breakpoints_.size() + rhs.breakpoints_.size());
    std::merge(lhs.breakpoints_.begin(), lhs.breakpoints_.end(), rhs.breakpoints_.begin(),
               rhs.breakpoints_.end(), std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    std::vector<double> values(merged.size() - 1);
    for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
        values[i] = lhs(merged[i]) + rhs(merged[i]);
    }
    return TestFunction(std::move(merged), std::move(values));
}

double occupation_integral(const SamplePath& path, const TestFunction& g) {
    require_unit_span(path, "occupation integral");
    const double dt = path.dt();
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const double p = path[k];
        const double q = path[k + 1];
        if (p == q) {
            total += dt * g(p);
        } else {
            // A linear segment spends time in each level cell proportionally
            // to the cell's length, so the time integral is an exact level
            // integral of g over the traversed range.
            const double lo = std::min(p, q);
            const double hi = std::max(p, q);
            total += dt * g.integral(lo, hi) / (hi - lo);
        }
    }
    return total;
}

double upcrossing_functional(const SamplePath& path, double c, HurstIndex h,
                             const TestFunction& g) {
    require_unit_span(path, "upcrossing functional");
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw validation_error("upcrossing functional needs a positive truncation c");
    }
    const double sweep = weighted_upcrossing_integral(
        path, c, [&g](double lo, double hi) { return g.integral(lo, hi); });
    return std::pow(c, 1.0 / h.value() - 1.0) * sweep;
}

double OccupationDensity::integral() const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        total += 0.5 * (density[i] + density[i + 1]) * (levels[i + 1] - levels[i]);
    }
    return total;
}

OccupationDensity local_time_curve(const SamplePath& path, double c, HurstIndex h,
                                   const std::vector<double>& levels,
                                   double frak_c_estimate) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw validation_error("local-time curve needs a positive truncation c");
    }
    if (!(frak_c_estimate > 0.0) || !std::isfinite(frak_c_estimate)) {
        throw validation_error("local-time curve needs a positive variation-constant estimate");
    }
    if (levels.empty()) {
        throw validation_error("local-time curve needs at least one level");
    }
    for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
        if (!(levels[i] < levels[i + 1])) {
            throw validation_error("local-time curve levels must be strictly increasing");
        }
    }
    const double factor =
        (2.0 / frak_c_estimate) * std::pow(c, 1.0 / h.value() - 1.0);
    OccupationDensity out;
    out.levels = levels;
    out.density.reserve(levels.size());
    for (const double a : levels) {
        const auto counts = strip_crossings(path, c, a);
        out.density.push_back(factor * static_cast<double>(counts.u));
    }
    return out;
}

std::vector<double> local_time_compare(const SamplePath& path, const std::vector<double>& c_list,
                                       HurstIndex h, const TestFunction& g,
                                       double frak_c_estimate) {
    if (!(frak_c_estimate > 0.0) || !std::isfinite(frak_c_estimate)) {
        throw validation_error("local-time comparison needs a positive variation-constant estimate");
    }
    if (c_list.empty()) {
        throw validation_error("local-time comparison needs at least one truncation");
    }
    for (std::size_t i = 0; i < c_list.size(); ++i) {
        if (!(c_list[i] > 0.0) || !std::isfinite(c_list[i])) {
            throw validation_error("local-time comparison truncations must be positive");
        }
        if (i > 0 && !(c_list[i] < c_list[i - 1])) {
            throw validation_error("local-time comparison truncations must be strictly decreasing");
        }
    }
    const double occ = occupation_integral(path, g);
    std::vector<double> errors;
    errors.reserve(c_list.size());
    for (const double c : c_list) {
        const double est = (2.0 / frak_c_estimate) * upcrossing_functional(path, c, h, g);
        if (occ == 0.0) {
            errors.push_back(est == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        } else {
            errors.push_back(std::abs(est - occ) / std::abs(occ));
        }
    }
    return errors;
}

} // namespace fbmtv
