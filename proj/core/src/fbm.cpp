#include "fbmtv/fbm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

#include "fbmtv/errors.hpp"

namespace fbmtv {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t hurst_key(HurstIndex h) { return std::bit_cast<std::uint64_t>(h.value()); }

// ---------------------------------------------------------------------------
// Circulant embedding.  The 2n x 2n circulant matrix built from the fGn
// autocovariance has eigenvalues equal to the DFT of its first row; they
// are nonnegative in exact arithmetic, so a Gaussian vector with the target
// covariance is obtained by weighting a complex white spectrum with
// sqrt(eigenvalue) and transforming back.

struct FftwPlans {
    std::mutex mu;
    std::map<std::size_t, fftw_plan> c2r; // keyed by transform length M

    ~FftwPlans() {
        for (auto& [m, plan] : c2r) {
            fftw_destroy_plan(plan);
        }
    }
};

FftwPlans& fftw_plans() {
    static FftwPlans plans;
    return plans;
}

struct FftwRealBuffer {
    double* data = nullptr;
    explicit FftwRealBuffer(std::size_t n) : data(fftw_alloc_real(n)) {}
    ~FftwRealBuffer() { fftw_free(data); }
    FftwRealBuffer(const FftwRealBuffer&) = delete;
    FftwRealBuffer& operator=(const FftwRealBuffer&) = delete;
};

struct FftwComplexBuffer {
    fftw_complex* data = nullptr;
    explicit FftwComplexBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {}
    ~FftwComplexBuffer() { fftw_free(data); }
    FftwComplexBuffer(const FftwComplexBuffer&) = delete;
    FftwComplexBuffer& operator=(const FftwComplexBuffer&) = delete;
};

using LambdaPtr = std::shared_ptr<const std::vector<double>>;

struct LambdaCache {
    std::mutex mu;
    std::map<std::pair<std::uint64_t, std::size_t>, LambdaPtr> entries;
};

LambdaCache& lambda_cache() {
    static LambdaCache cache;
    return cache;
}

// Eigenvalues lambda_0..lambda_n of the length-2n embedding (the upper half;
// the spectrum is symmetric), validated and clamped.
LambdaPtr embedding_eigenvalues(HurstIndex h, std::size_t n) {
    const auto key = std::make_pair(hurst_key(h), n);
    {
        std::lock_guard lock(lambda_cache().mu);
        if (const auto it = lambda_cache().entries.find(key); it != lambda_cache().entries.end()) {
            return it->second;
        }
    }

    const std::size_t m = 2 * n;
    FftwRealBuffer row(m);
    for (std::size_t k = 0; k <= n; ++k) {
        row.data[k] = fgn_autocovariance(h, k);
    }
    for (std::size_t k = n + 1; k < m; ++k) {
        row.data[k] = row.data[m - k];
    }

    FftwComplexBuffer spectrum(n + 1);
    {
        // Plan creation is not thread-safe; this one-shot transform runs
        // rarely (once per (h, n)), so plan and execute under the lock.
        std::lock_guard lock(fftw_plans().mu);
        fftw_plan plan =
            fftw_plan_dft_r2c_1d(static_cast<int>(m), row.data, spectrum.data, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    auto lambda = std::make_shared<std::vector<double>>(n + 1);
    double max_lambda = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        (*lambda)[k] = spectrum.data[k][0];
        max_lambda = std::max(max_lambda, (*lambda)[k]);
    }
    const double floor = -1e-8 * max_lambda;
    for (double& l : *lambda) {
        if (l < floor) {
            throw validation_error(
                "circulant embedding eigenvalue " + format_double(l) +
                " is below the roundoff floor " + format_double(floor) +
                " for n_steps " + std::to_string(n) +
                "; use the cholesky method instead");
        }
        l = std::max(l, 0.0);
    }

    std::lock_guard lock(lambda_cache().mu);
    return lambda_cache().entries.emplace(key, std::move(lambda)).first->second;
}

// Unit-variance fGn of length n via circulant embedding.
std::vector<double> sample_fgn_circulant(HurstIndex h, std::size_t n, std::uint64_t seed) {
    const LambdaPtr lambda = embedding_eigenvalues(h, n);
    const std::size_t m = 2 * n;
    const double inv_m = 1.0 / static_cast<double>(m);

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    FftwComplexBuffer spectrum(n + 1);
    spectrum.data[0][0] = std::sqrt((*lambda)[0] * inv_m) * normal(gen);
    spectrum.data[0][1] = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double scale = std::sqrt((*lambda)[k] * inv_m * 0.5);
        const double re = normal(gen);
        const double im = normal(gen);
        spectrum.data[k][0] = scale * re;
        spectrum.data[k][1] = scale * im;
    }
    spectrum.data[n][0] = std::sqrt((*lambda)[n] * inv_m) * normal(gen);
    spectrum.data[n][1] = 0.0;

    fftw_plan plan = nullptr;
    {
        std::lock_guard lock(fftw_plans().mu);
        auto& cached = fftw_plans().c2r[m];
        if (cached == nullptr) {
            FftwComplexBuffer in(n + 1);
            FftwRealBuffer out(m);
            cached = fftw_plan_dft_c2r_1d(static_cast<int>(m), in.data, out.data, FFTW_ESTIMATE);
        }
        plan = cached;
    }

    FftwRealBuffer series(m);
    fftw_execute_dft_c2r(plan, spectrum.data, series.data);

    return std::vector<double>(series.data, series.data + n);
}

// ---------------------------------------------------------------------------
// Cholesky oracle: factor the n x n Toeplitz autocovariance matrix once per
// (h, n) and multiply a standard normal vector.

constexpr std::size_t kCholeskyCap = 4096;

using FactorPtr = std::shared_ptr<const Eigen::MatrixXd>;

struct FactorCache {
    std::mutex mu;
    std::map<std::pair<std::uint64_t, std::size_t>, FactorPtr> entries;
};

FactorCache& factor_cache() {
    static FactorCache cache;
    return cache;
}

FactorPtr cholesky_factor(HurstIndex h, std::size_t n) {
    const auto key = std::make_pair(hurst_key(h), n);
    {
        std::lock_guard lock(factor_cache().mu);
        if (const auto it = factor_cache().entries.find(key); it != factor_cache().entries.end()) {
            return it->second;
        }
    }

    Eigen::MatrixXd gamma(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double g = fgn_autocovariance(h, i - j);
            gamma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g;
            gamma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = g;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gamma);
    if (llt.info() != Eigen::Success) {
        throw validation_error("cholesky factorization of the fGn covariance failed for n_steps " +
                               std::to_string(n));
    }
    auto factor = std::make_shared<Eigen::MatrixXd>(llt.matrixL());

    std::lock_guard lock(factor_cache().mu);
    return factor_cache().entries.emplace(key, std::move(factor)).first->second;
}

std::vector<double> sample_fgn_cholesky(HurstIndex h, std::size_t n, std::uint64_t seed) {
    if (n > kCholeskyCap) {
        throw validation_error("cholesky sampling is capped at " + std::to_string(kCholeskyCap) +
                               " steps, got " + std::to_string(n));
    }
    const FactorPtr factor = cholesky_factor(h, n);

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        z(static_cast<Eigen::Index>(k)) = normal(gen);
    }
    const Eigen::VectorXd fgn = (*factor) * z;
    return std::vector<double>(fgn.data(), fgn.data() + n);
}

} // namespace

double fgn_autocovariance(HurstIndex h, std::uint64_t lag) {
    if (lag == 0) {
        return 1.0;
    }
    const double two_h = 2.0 * h.value();
    const double k = static_cast<double>(lag);
    return 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(k - 1.0, two_h));
}

IncrementInterval::IncrementInterval(double s_, double t_) : s(s_), t(t_) {
    if (!(s < t) || !std::isfinite(s) || !std::isfinite(t)) {
        throw validation_error("increment interval requires s < t, got [" + format_double(s) +
                               ", " + format_double(t) + "]");
    }
}

double increment_sum_covariance(HurstIndex h, IncrementInterval a, IncrementInterval b) {
    const double two_h = 2.0 * h.value();
    const auto pw = [two_h](double x) { return std::pow(std::abs(x), two_h); };
    return 0.5 * (pw(b.t - a.s) + pw(a.t - b.s) - pw(b.s - a.s) - pw(b.t - a.t));
}

double weak_variance_alternating(HurstIndex h, double S, std::size_t n) {
    if (!(S > 0.0) || !std::isfinite(S)) {
        throw validation_error("interval length must be finite and > 0, got " + format_double(S));
    }
    if (n == 0) {
        throw validation_error("the alternating configuration needs at least one increment");
    }
    const double half_step = S / static_cast<double>(2 * n);
    std::vector<IncrementInterval> intervals;
    intervals.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        intervals.emplace_back(static_cast<double>(2 * i - 1) * half_step,
                               static_cast<double>(2 * i) * half_step);
    }
    double total = 0.0;
    for (const IncrementInterval& a : intervals) {
        for (const IncrementInterval& b : intervals) {
            total += increment_sum_covariance(h, a, b);
        }
    }
    return total;
}

double weak_variance_sup_bruteforce(HurstIndex h, double S, std::size_t n,
                                    std::size_t grid_resolution) {
    if (!(S > 0.0) || !std::isfinite(S)) {
        throw validation_error("interval length must be finite and > 0, got " + format_double(S));
    }
    if (n < 1 || n > 4 || grid_resolution < 2 || grid_resolution > 24) {
        throw validation_error(
            "exhaustive weak-variance search requires 1 <= n <= 4 and a grid of 2..24 points");
    }
    std::vector<double> grid(grid_resolution);
    for (std::size_t j = 0; j < grid_resolution; ++j) {
        grid[j] = S * static_cast<double>(j) / static_cast<double>(grid_resolution - 1);
    }

    std::vector<IncrementInterval> chosen;
    chosen.reserve(n);
    double best = 0.0;

    // Depth-first over configurations; `acc` carries the variance of the
    // partial sum, updated incrementally with the new pair's variance and
    // cross terms.
    const auto recurse = [&](auto&& self, std::size_t start, double acc) -> void {
        if (chosen.size() == n) {
            best = std::max(best, acc);
            return;
        }
        for (std::size_t u = start; u + 1 < grid_resolution; ++u) {
            for (std::size_t v = u + 1; v < grid_resolution; ++v) {
                IncrementInterval iv(grid[u], grid[v]);
                double delta = increment_sum_covariance(h, iv, iv);
                for (const IncrementInterval& prev : chosen) {
                    delta += 2.0 * increment_sum_covariance(h, prev, iv);
                }
                chosen.push_back(iv);
                self(self, v, acc + delta); // next pair may share the junction
                chosen.pop_back();
            }
        }
    };
    recurse(recurse, 0, 0.0);
    return best;
}

std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t replica_index) {
    return splitmix64(master_seed ^ (0x9E3779B97F4A7C15ULL * (replica_index + 1)));
}

SamplePath sample_fbm(const FbmSpec& spec) {
    if (spec.n_steps < 1) {
        throw validation_error("fBm sampling needs n_steps >= 1");
    }
    if (!(spec.dt > 0.0) || !std::isfinite(spec.dt)) {
        throw validation_error("fBm sampling needs dt > 0, got " + format_double(spec.dt));
    }

    std::vector<double> fgn;
    switch (spec.method) {
        case FbmMethod::circulant_embedding:
            if (spec.n_steps < 2) {
                throw validation_error("circulant embedding needs n_steps >= 2");
            }
            fgn = sample_fgn_circulant(spec.h, spec.n_steps, spec.seed);
            break;
        case FbmMethod::cholesky:
            fgn = sample_fgn_cholesky(spec.h, spec.n_steps, spec.seed);
            break;
    }

    const double scale = std::pow(spec.dt, spec.h.value());
    std::vector<double> values(spec.n_steps + 1);
    values[0] = 0.0;
    for (std::size_t k = 0; k < spec.n_steps; ++k) {
        values[k + 1] = values[k] + scale * fgn[k];
    }
    return SamplePath(0.0, spec.dt, std::move(values));
}

} // namespace fbmtv
