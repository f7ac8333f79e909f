#pragma once

#include <cstddef>
#include <cstdint>

#include "fbmtv/path.hpp"

namespace fbmtv {

/** Sampling back end for fractional Brownian motion. */
enum class FbmMethod { circulant_embedding, cholesky };

/**
 * Full description of one fBm draw: Hurst index, grid, seed and method.
 * Sampling is deterministic given every field.
 */
struct FbmSpec {
    HurstIndex h;
    std::size_t n_steps = 1;
    double dt = 1.0;
    std::uint64_t seed = 0;
    FbmMethod method = FbmMethod::circulant_embedding;
};

/**
 * Autocovariance of unit-spaced fractional Gaussian noise:
 * gamma(k) = ((k+1)^{2H} - 2 k^{2H} + (k-1)^{2H}) / 2, gamma(0) = 1.
 */
double fgn_autocovariance(HurstIndex h, std::uint64_t lag);

/** Increment W_t - W_s of the process, s < t. */
struct IncrementInterval {
    IncrementInterval(double s, double t);
    double s;
    double t;
};

/**
 * Exact covariance of two fBm increments:
 * (|t_b-s_a|^{2H} + |t_a-s_b|^{2H} - |s_b-s_a|^{2H} - |t_b-t_a|^{2H}) / 2.
 * Reduces to the increment variance |t-s|^{2H} when a == b.
 */
double increment_sum_covariance(HurstIndex h, IncrementInterval a, IncrementInterval b);

/**
 * Exact second moment of the alternating increment sum
 * sum_i (W_{2iS/(2n)} - W_{(2i-1)S/(2n)}), i = 1..n, by summing the pair
 * covariances.
 */
double weak_variance_alternating(HurstIndex h, double S, std::size_t n);

/**
 * Maximal second moment of an n-pair interleaved increment sum over all
 * configurations on a uniform grid of `grid_resolution` points spanning
 * [0, S].  Within-pair endpoints are strictly ordered; consecutive pairs
 * may share a junction point (the supremum over the strictly interleaved
 * configurations equals the maximum over this closure, by continuity).
 * Exhaustive search: requires n <= 4 and grid_resolution <= 24.
 */
double weak_variance_sup_bruteforce(HurstIndex h, double S, std::size_t n,
                                    std::size_t grid_resolution);

/**
 * Per-replica RNG substream rule: replica r of a run with the given master
 * seed uses the stream seeded by
 *   splitmix64(master_seed XOR (0x9E3779B97F4A7C15 * (r + 1))).
 * Documented so parallel runs are schedule-independent and individually
 * replayable.
 */
std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t replica_index);

/**
 * Draws one fBm path on the grid {k * dt, k = 0..n_steps}, starting at 0.
 * Increments form a centered Gaussian vector with covariance
 * dt^{2H} * gamma(|i-j|).
 *
 * Circulant embedding (default) is O(N log N) and exact in distribution;
 * eigenvalues within -1e-8 (relative) of zero are clamped, anything more
 * negative raises a validation error advising the cholesky method.
 * The cholesky back end is an O(N^3)-setup oracle capped at 4096 steps.
 */
SamplePath sample_fbm(const FbmSpec& spec);

} // namespace fbmtv
