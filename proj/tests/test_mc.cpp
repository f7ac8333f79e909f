#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbmtv/config.hpp"
#include "fbmtv/errors.hpp"
#include "fbmtv/fbm.hpp"
#include "fbmtv/mc.hpp"

using namespace fbmtv;
using Catch::Matchers::WithinAbs;

namespace {

McConfig small_mean_tv(std::size_t workers) {
    McConfig cfg;
    cfg.experiment = ExperimentKind::mean_tv;
    cfg.h = HurstIndex(0.5);
    cfg.horizon = 1.0;
    cfg.c_list = {0.5, 0.35355339059327373, 0.25};
    cfg.replicas = 48;
    cfg.seed = 7;
    cfg.workers = workers;
    cfg.resolution = 256;
    cfg.validate();
    return cfg;
}

} // namespace

TEST_CASE("replica seeds", "[mc]") {
    std::set<std::uint64_t> seen;
    for (std::size_t r = 0; r < 1000; ++r) {
        const std::uint64_t s = replica_seed(99, r);
        REQUIRE(s == substream_seed(99, r)); // replayable via the documented rule
        seen.insert(s);
    }
    REQUIRE(seen.size() == 1000);
}

TEST_CASE("summary statistics", "[mc]") {
    const SummaryStats s = summarize({1.0, 2.0, 3.0, 4.0});
    REQUIRE(s.mean == 2.5);
    REQUIRE_THAT(s.std_dev, WithinAbs(std::sqrt(5.0 / 3.0), 1e-15));
    REQUIRE_THAT(s.std_err, WithinAbs(std::sqrt(5.0 / 3.0) / 2.0, 1e-15));

    const SummaryStats one = summarize({3.25});
    REQUIRE(one.mean == 3.25);
    REQUIRE(one.std_dev == 0.0);
    REQUIRE(one.std_err == 0.0);
}

TEST_CASE("reports are identical across worker counts", "[mc]") {
    const ExperimentReport serial = run_experiment(small_mean_tv(1));
    const ExperimentReport pooled = run_experiment(small_mean_tv(3));
    REQUIRE(serial.json_text == pooled.json_text);
    REQUIRE(serial.config_echo == pooled.config_echo);
    REQUIRE(serial.experiment == "mean-tv");
    REQUIRE(serial.seed == 7);

    // And across repeat runs of the same schedule.
    const ExperimentReport again = run_experiment(small_mean_tv(1));
    REQUIRE(again.json_text == serial.json_text);

    McConfig reseeded = small_mean_tv(1);
    reseeded.seed = 8;
    REQUIRE(run_experiment(reseeded).json_text != serial.json_text);
}

TEST_CASE("mean-variation rows and slope", "[mc]") {
    const McConfig cfg = small_mean_tv(0);
    const MeanTvResult res = estimate_mean_tv(cfg);
    REQUIRE(res.rows.size() == cfg.c_list.size());
    REQUIRE(res.slope_target == 1.0 - 1.0 / 0.5);
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const MeanTvRow& row = res.rows[i];
        REQUIRE(row.c == cfg.c_list[i]);
        REQUIRE(row.ttv.mean > 0.0);
        REQUIRE(row.ttv.std_err > 0.0);
        REQUIRE_THAT(row.ttv.mean, WithinAbs(row.utv.mean + row.dtv.mean,
                                             1e-9 * std::max(1.0, row.ttv.mean)));
        REQUIRE(row.normalized > 0.0);
        // The paired contrasts summarize symmetric statistics.
        REQUIRE(row.utv_minus_dtv_std_err > 0.0);
        REQUIRE(row.ttv_minus_2utv_std_err > 0.0);
    }
    // Rough Brownian check only; the calibrated run belongs to the acceptance suite.
    REQUIRE_THAT(res.slope, WithinAbs(-1.0, 0.2));
    REQUIRE(res.symmetry_ok);
}

TEST_CASE("subadditive horizon bounds", "[mc]") {
    McConfig cfg;
    cfg.experiment = ExperimentKind::frak_c;
    cfg.h = HurstIndex(0.5);
    cfg.horizon = 16.0;
    cfg.n_list = {4, 16};
    cfg.replicas = 12;
    cfg.seed = 11;
    cfg.resolution = 128;
    cfg.validate();

    const FeketeResult res = estimate_frak_c(cfg);
    REQUIRE(res.bounds.size() == 2);
    for (std::size_t i = 0; i < res.bounds.size(); ++i) {
        const FeketeBounds& b = res.bounds[i];
        REQUIRE(b.n == cfg.n_list[i]);
        REQUIRE(b.lower > 0.0);
        REQUIRE(b.std_err > 0.0);
        const double n = static_cast<double>(b.n);
        REQUIRE_THAT((b.upper - b.lower) * n, WithinAbs(1.0, 1e-12));
    }
    REQUIRE_THAT(res.midpoint,
                 WithinAbs(0.5 * (res.bounds.back().lower + res.bounds.back().upper), 1e-15));
}

TEST_CASE("tail curve structure", "[mc]") {
    McConfig cfg;
    cfg.experiment = ExperimentKind::tails;
    cfg.h = HurstIndex(0.25);
    cfg.horizon = 1.0;
    cfg.c_list = {0.85};
    cfg.replicas = 3000;
    cfg.seed = 5;
    cfg.resolution = 256;
    cfg.v_max = 2.0;
    cfg.v_points = 25;
    cfg.validate();

    const TailCurve curve = tail_experiment(cfg);
    REQUIRE(curve.points.size() == cfg.v_points);
    REQUIRE_THAT(curve.points.front().v, WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(curve.points.back().v, WithinAbs(2.0, 1e-12));
    const double ratio = curve.points[1].v / curve.points[0].v;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        REQUIRE_THAT(curve.points[i].v / curve.points[i - 1].v, WithinAbs(ratio, 1e-9));
        REQUIRE(curve.points[i].p <= curve.points[i - 1].p); // tails only thin out
    }
    const double r = static_cast<double>(cfg.replicas);
    for (const TailPoint& pt : curve.points) {
        REQUIRE(pt.p >= 0.0);
        REQUIRE(pt.p <= 1.0);
        REQUIRE_THAT(pt.std_err, WithinAbs(std::sqrt(pt.p * (1.0 - pt.p) / r), 1e-12));
    }
    REQUIRE_THAT(curve.scale, WithinAbs(std::pow(0.85, 1.0 - 4.0), 1e-12));
    REQUIRE(curve.target == 1.5); // min(1 + 2H, 2) at H = 1/4
    REQUIRE_FALSE(curve.regime.empty());
    REQUIRE(curve.window_lo >= 1.0);
    REQUIRE(curve.window_hi > curve.window_lo);
    REQUIRE(curve.stability_ok == (std::abs(curve.slope - curve.slope_half_window) < 0.2));
    REQUIRE(curve.not_lighter_ok == (curve.slope <= curve.target + 0.4));

    SECTION("hopeless window reports the largest usable deviation") {
        McConfig weak = cfg;
        weak.h = HurstIndex(0.5);
        weak.c_list = {0.4}; // tight concentration: deviations never reach v = 1
        weak.replicas = 100;
        try {
            tail_experiment(weak);
            FAIL("expected the run to be underpowered");
        } catch (const underpowered_error& e) {
            REQUIRE(e.largest_usable() >= 0.0);
            REQUIRE(e.largest_usable() < 1.0);
        }
    }
}

TEST_CASE("normalized-variation limit rows", "[mc]") {
    McConfig cfg;
    cfg.experiment = ExperimentKind::limits;
    cfg.h = HurstIndex(0.5);
    cfg.horizon = 1.0;
    cfg.c_list = {0.5, 0.35355339059327373, 0.25};
    cfg.replicas = 32;
    cfg.seed = 3;
    cfg.resolution = 256;
    cfg.validate();

    const LimitResult res = ttv_limit_experiment(cfg);
    REQUIRE(res.rows.size() == 3);
    bool shrinking = true;
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const LimitRow& row = res.rows[i];
        REQUIRE(row.c == cfg.c_list[i]);
        REQUIRE(row.ttv.mean > 0.0);
        REQUIRE_THAT(row.ttv.mean, WithinAbs(row.utv.mean + row.dtv.mean,
                                             1e-9 * std::max(1.0, row.ttv.mean)));
        if (i > 0 && row.ttv.std_dev > res.rows[i - 1].ttv.std_dev) shrinking = false;
    }
    REQUIRE(res.dispersion_shrinking == shrinking);
}

TEST_CASE("crossing-count limit rows", "[mc]") {
    McConfig cfg;
    cfg.experiment = ExperimentKind::k_limit;
    cfg.h = HurstIndex(0.5);
    cfg.horizon = 1.0;
    cfg.c_list = {0.5, 0.25};
    cfg.replicas = 24;
    cfg.seed = 13;
    cfg.resolution = 256;
    cfg.rho = 0.1;
    cfg.validate();

    const KLimitResult res = k_convergence_experiment(cfg);
    REQUIRE(res.rows.size() == 2);
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        REQUIRE(res.rows[i].c == cfg.c_list[i]);
        REQUIRE(res.rows[i].stat.mean >= 0.0);
    }
    REQUIRE(res.sandwich_all_ok);
    REQUIRE(res.rho_shift_ok);
}

TEST_CASE("distributional self-similarity check", "[mc]") {
    McConfig cfg;
    cfg.experiment = ExperimentKind::scaling;
    cfg.h = HurstIndex(0.5);
    cfg.horizon = 4.0;
    cfg.c_list = {0.4};
    cfg.replicas = 48;
    cfg.seed = 17;
    cfg.resolution = 64;
    cfg.validate();

    const ScalingResult res = scaling_distribution_check(cfg);
    REQUIRE(res.mean_direct > 0.0);
    REQUIRE(res.mean_rescaled > 0.0);
    const double joint = std::sqrt(res.std_err_direct * res.std_err_direct +
                                   res.std_err_rescaled * res.std_err_rescaled);
    REQUIRE(res.means_ok ==
            (std::abs(res.mean_direct - res.mean_rescaled) <= 2.0 * joint));
    REQUIRE_THAT(res.z_statistic,
                 WithinAbs((res.mean_direct - res.mean_rescaled) / joint, 1e-12));
    REQUIRE(res.location_ok == (std::abs(res.z_statistic) <= 2.5758293035489004));
    REQUIRE(res.quantiles.size() == 3);
    const double probs[] = {0.1, 0.5, 0.9};
    bool all = true;
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(res.quantiles[i].prob == probs[i]);
        REQUIRE(res.quantiles[i].direct_lo <= res.quantiles[i].direct_hi);
        REQUIRE(res.quantiles[i].rescaled_lo <= res.quantiles[i].rescaled_hi);
        all = all && res.quantiles[i].overlap;
    }
    REQUIRE(res.quantiles_ok == all);
    // Same law by construction: the pinned seed must not reject.
    REQUIRE(res.means_ok);
    REQUIRE(res.location_ok);
    REQUIRE(res.quantiles_ok);
}

TEST_CASE("report document shape", "[mc]") {
    const ExperimentReport report = run_experiment(small_mean_tv(2));
    const nlohmann::json doc = nlohmann::json::parse(report.json_text);
    REQUIRE(doc.at("experiment") == "mean-tv");
    REQUIRE(doc.at("seed") == 7);
    // The embedded config object carries the same keys and values as the
    // canonical flat echo, workers excluded from both.
    const nlohmann::json& cfg_obj = doc.at("config");
    const ConfigDocument echo = ConfigDocument::parse(report.config_echo);
    REQUIRE(cfg_obj.size() == echo.values().size());
    REQUIRE_FALSE(cfg_obj.contains("workers"));
    REQUIRE(cfg_obj.at("experiment") == "mean-tv");
    REQUIRE(cfg_obj.at("seed") == 7);
    REQUIRE(cfg_obj.at("replicas") == 48);
    REQUIRE(cfg_obj.at("hurst") == 0.5);
    REQUIRE(doc.contains("results"));
    REQUIRE(doc.contains("checks"));
    REQUIRE(report.json_text.find("wall") == std::string::npos);
    REQUIRE(report.tail_csv.empty());
    REQUIRE(report.wall_seconds >= 0.0);

    McConfig tails;
    tails.experiment = ExperimentKind::tails;
    tails.h = HurstIndex(0.25);
    tails.horizon = 1.0;
    tails.c_list = {0.85};
    tails.replicas = 3000;
    tails.seed = 5;
    tails.resolution = 128;
    tails.v_max = 4.0;
    tails.v_points = 9;
    tails.validate();
    const ExperimentReport tail_report = run_experiment(tails);
    REQUIRE(tail_report.tail_csv.rfind("v,p,stderr\n", 0) == 0);
    std::size_t rows = 0;
    for (const char ch : tail_report.tail_csv) rows += ch == '\n' ? 1 : 0;
    REQUIRE(rows == 1 + tails.v_points);
}
