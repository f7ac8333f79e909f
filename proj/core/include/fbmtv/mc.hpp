#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fbmtv/config.hpp"

namespace fbmtv {

/** Substream seed for one replica of a master-seeded experiment. */
std::uint64_t replica_seed(std::uint64_t master, std::size_t replica);

/** Sample mean / standard deviation / standard error of one statistic. */
struct SummaryStats {
    double mean = 0.0;
    double std_dev = 0.0;
    double std_err = 0.0;
};

SummaryStats summarize(const std::vector<double>& values);

struct MeanTvRow {
    double c = 0.0;
    SummaryStats ttv;
    SummaryStats utv;
    SummaryStats dtv;
    double normalized = 0.0; // mean of configured kind, times c^{1/h-1} / horizon
    // Paired per-replica contrasts (both are zero in expectation by the
    // up/down symmetry of the increments).
    double utv_minus_dtv_mean = 0.0;
    double utv_minus_dtv_std_err = 0.0;
    double ttv_minus_2utv_mean = 0.0;
    double ttv_minus_2utv_std_err = 0.0;
};

struct MeanTvResult {
    std::vector<MeanTvRow> rows;       // one per configured c, decreasing
    double slope = 0.0;                // LS slope of log mean vs log c
    double slope_target = 0.0;         // 1 - 1/h
    bool slope_ok = false;             // |slope - target| <= 0.05
    bool symmetry_ok = false;          // every paired contrast within 2 std errors
};

struct FeketeBounds {
    std::size_t n = 0;
    double lower = 0.0;   // mean TTV([0,n], c=1) / n
    double upper = 0.0;   // lower + 1/n
    double std_err = 0.0; // MC standard error shared by both bounds
};

struct FeketeResult {
    std::vector<FeketeBounds> bounds; // one per configured n, increasing
    double midpoint = 0.0;            // (lower + upper) / 2 at the largest n
};

struct TailPoint {
    double v = 0.0;
    double p = 0.0;
    double std_err = 0.0;
};

struct TailCurve {
    std::vector<TailPoint> points; // over the whole deviation grid
    double center = 0.0;           // same-run sample mean used for centering
    double scale = 0.0;            // horizon * c^{1 - 1/h}
    double window_lo = 0.0;        // fitted v range: >= 1, >= 50 exceedances
    double window_hi = 0.0;
    double slope = 0.0;            // fit of log(-log p) vs log v on the window
    double slope_half_window = 0.0;
    double target = 0.0;           // min(1 + 2h, 2) for v >= 1
    std::string regime;            // which exponent regime the window covers
    bool stability_ok = false;     // halving the window moves the slope < 0.2
    bool not_lighter_ok = false;   // slope <= target + 0.4
};

struct LimitRow {
    double c = 0.0;
    // Statistics of c^{1/h-1} * value / horizon per kind.
    SummaryStats ttv;
    SummaryStats utv;
    SummaryStats dtv;
};

struct LimitResult {
    std::vector<LimitRow> rows;          // one per configured c, decreasing
    bool dispersion_shrinking = false;   // ttv std_dev nonincreasing along rows
};

struct KLimitRow {
    double c = 0.0;
    SummaryStats stat; // c^{1/h} * crossing count
};

struct KLimitResult {
    std::vector<KLimitRow> rows;
    bool sandwich_all_ok = false;  // truncation bounds held on every replica and c
    bool rho_shift_ok = false;     // shifting the grid offset by c never changed K
};

struct QuantileCheck {
    double prob = 0.0;
    double direct_lo = 0.0, direct_hi = 0.0;     // 3-sigma order-statistic band
    double rescaled_lo = 0.0, rescaled_hi = 0.0;
    bool overlap = false;
};

struct ScalingResult {
    double mean_direct = 0.0;      // TTV on [0, S] at c
    double std_err_direct = 0.0;
    double mean_rescaled = 0.0;    // S^h * TTV on [0, 1] at c * S^{-h}
    double std_err_rescaled = 0.0;
    double z_statistic = 0.0;
    bool means_ok = false;         // difference within 2 joint standard errors
    bool location_ok = false;      // two-sided z test not rejected at 0.01
    std::vector<QuantileCheck> quantiles; // 10% / 50% / 90%
    bool quantiles_ok = false;
};

/**
 * A finished experiment: the deterministic report body plus run metadata.
 * `json_text` is bit-for-bit reproducible given (config, seed) — wall-clock
 * time is kept out of it and belongs in the run manifest.
 */
struct ExperimentReport {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string config_echo; // canonical flat config text
    std::string json_text;   // full report document
    std::string tail_csv;    // plot-ready `v,p,stderr` rows (tails runs only)
    double wall_seconds = 0.0;
};

MeanTvResult estimate_mean_tv(const McConfig& cfg);
FeketeResult estimate_frak_c(const McConfig& cfg);
TailCurve tail_experiment(const McConfig& cfg);
LimitResult ttv_limit_experiment(const McConfig& cfg);
KLimitResult k_convergence_experiment(const McConfig& cfg);
ScalingResult scaling_distribution_check(const McConfig& cfg);

/** Run the configured experiment and render its deterministic report. */
ExperimentReport run_experiment(const McConfig& cfg);

} // namespace fbmtv
