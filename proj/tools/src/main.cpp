#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fbmtv/config.hpp"
#include "fbmtv/crossings.hpp"
#include "fbmtv/errors.hpp"
#include "fbmtv/fbm.hpp"
#include "fbmtv/local_time.hpp"
#include "fbmtv/manifest.hpp"
#include "fbmtv/mc.hpp"
#include "fbmtv/path.hpp"
#include "fbmtv/variation.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using fbmtv::format_double;

std::string reassemble_command(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i > 0) out.push_back(' ');
        out += argv[i];
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw fbmtv::validation_error("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw fbmtv::validation_error("failed writing '" + path + "'");
}

fbmtv::RunManifest make_manifest(const std::string& command) {
    fbmtv::RunManifest manifest;
    manifest.tool_version = FBMTV_VERSION;
    manifest.command = command;
    manifest.started_at = fbmtv::utc_timestamp_now();
    return manifest;
}

struct SimulateArgs {
    double hurst = 0.5;
    std::size_t steps = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::string method = "fft";
    std::string out;
};

void run_simulate(const SimulateArgs& args, const std::string& command) {
    fbmtv::RunManifest manifest = make_manifest(command);
    manifest.has_seed = true;
    manifest.seed = args.seed;
    const fbmtv::FbmMethod method = args.method == "chol"
                                        ? fbmtv::FbmMethod::cholesky
                                        : fbmtv::FbmMethod::circulant_embedding;
    const fbmtv::FbmSpec spec{fbmtv::HurstIndex(args.hurst), args.steps, args.dt, args.seed,
                              method};
    const fbmtv::SamplePath path = fbmtv::sample_fbm(spec);
    if (args.out.empty()) {
        fbmtv::write_path_csv(path, std::cout);
        return;
    }
    fbmtv::write_path_csv_file(path, args.out);
    manifest.finished_at = fbmtv::utc_timestamp_now();
    manifest.add_output(args.out);
    manifest.write_beside(args.out);
}

struct TvArgs {
    std::string input;
    double c = 0.0;
    std::string kind = "ttv";
    std::string witness;
};

void run_tv(const TvArgs& args, const std::string& command) {
    const fbmtv::SamplePath path = fbmtv::read_path_csv_file(args.input);
    const fbmtv::VariationKind kind = fbmtv::variation_kind_from_string(args.kind);
    double value = 0.0;
    if (args.witness.empty()) {
        value = kind == fbmtv::VariationKind::ttv   ? fbmtv::ttv_value(path, args.c)
                : kind == fbmtv::VariationKind::utv ? fbmtv::utv_value(path, args.c)
                                                    : fbmtv::dtv_value(path, args.c);
    } else {
        fbmtv::RunManifest manifest = make_manifest(command);
        const fbmtv::VariationResult result =
            kind == fbmtv::VariationKind::ttv   ? fbmtv::ttv(path, args.c)
            : kind == fbmtv::VariationKind::utv ? fbmtv::utv(path, args.c)
                                                : fbmtv::dtv(path, args.c);
        value = result.value;
        std::string csv = "s_index,t_index,payoff\n";
        for (const auto& pair : result.witness) {
            csv += std::to_string(pair.s_index);
            csv += ',';
            csv += std::to_string(pair.t_index);
            csv += ',';
            csv += format_double(pair.payoff);
            csv += '\n';
        }
        write_text_file(args.witness, csv);
        manifest.finished_at = fbmtv::utc_timestamp_now();
        manifest.add_output(args.witness);
        manifest.write_beside(args.witness);
    }
    std::cout << format_double(value) << "\n";
}

struct CrossingsArgs {
    std::string input;
    double c = 0.0;
    double rho = 0.0;
    double a = 0.0;
    bool has_a = false;
    std::string report = "json";
};

void run_crossings(const CrossingsArgs& args) {
    const fbmtv::SamplePath path = fbmtv::read_path_csv_file(args.input);
    if (args.has_a) {
        const fbmtv::CrossingCounts counts = fbmtv::strip_crossings(path, args.c, args.a);
        if (args.report == "csv") {
            std::cout << "a,u,d,n\n"
                      << format_double(args.a) << ',' << counts.u << ',' << counts.d << ','
                      << counts.n << "\n";
        } else {
            nlohmann::ordered_json doc;
            doc["c"] = args.c;
            doc["a"] = args.a;
            doc["u"] = counts.u;
            doc["d"] = counts.d;
            doc["n"] = counts.n;
            std::cout << doc.dump(2) << "\n";
        }
        return;
    }
    const fbmtv::LevelGrid grid(args.c, args.rho);
    const fbmtv::LevelCrossingSummary summary = fbmtv::level_crossings(path, grid);
    if (args.report == "csv") {
        std::cout << "level_index,level,u,d,n\n";
        for (const auto& [index, counts] : summary.per_level) {
            std::cout << index << ',' << format_double(grid.level(index)) << ',' << counts.u
                      << ',' << counts.d << ',' << counts.n << "\n";
        }
        return;
    }
    nlohmann::ordered_json doc;
    doc["c"] = args.c;
    doc["rho"] = grid.rho();
    doc["k"] = summary.k;
    doc["ku"] = summary.ku;
    doc["kd"] = summary.kd;
    nlohmann::ordered_json levels = nlohmann::ordered_json::array();
    for (const auto& [index, counts] : summary.per_level) {
        nlohmann::ordered_json item;
        item["index"] = index;
        item["level"] = grid.level(index);
        item["u"] = counts.u;
        item["d"] = counts.d;
        item["n"] = counts.n;
        levels.push_back(item);
    }
    doc["per_level"] = levels;
    std::cout << doc.dump(2) << "\n";
}

struct LoctimeArgs {
    std::string input;
    double hurst = 0.5;
    double c = 0.0;
    double ckh = 0.0;
    std::string levels;
    std::string out;
};

std::vector<double> parse_level_range(const std::string& text) {
    const std::size_t first = text.find(':');
    const std::size_t second = first == std::string::npos ? std::string::npos
                                                          : text.find(':', first + 1);
    if (first == std::string::npos || second == std::string::npos) {
        throw fbmtv::validation_error("levels must be given as a0:a1:step");
    }
    std::size_t used = 0;
    const std::string a0_text = text.substr(0, first);
    const std::string a1_text = text.substr(first + 1, second - first - 1);
    const std::string step_text = text.substr(second + 1);
    try {
        const double a0 = std::stod(a0_text, &used);
        if (used != a0_text.size()) throw std::invalid_argument(a0_text);
        const double a1 = std::stod(a1_text, &used);
        if (used != a1_text.size()) throw std::invalid_argument(a1_text);
        const double step = std::stod(step_text, &used);
        if (used != step_text.size()) throw std::invalid_argument(step_text);
        if (!(step > 0.0) || !(a1 >= a0)) {
            throw fbmtv::validation_error("levels need a1 >= a0 and step > 0");
        }
        const auto count =
            static_cast<std::size_t>(std::floor((a1 - a0) / step + 1e-9)) + 1;
        std::vector<double> levels(count);
        for (std::size_t i = 0; i < count; ++i) {
            levels[i] = a0 + static_cast<double>(i) * step;
        }
        return levels;
    } catch (const std::invalid_argument&) {
        throw fbmtv::validation_error("malformed level range '" + text + "'");
    } catch (const std::out_of_range&) {
        throw fbmtv::validation_error("level range out of range '" + text + "'");
    }
}

void run_loctime(const LoctimeArgs& args, const std::string& command) {
    fbmtv::RunManifest manifest = make_manifest(command);
    const fbmtv::SamplePath path = fbmtv::read_path_csv_file(args.input);
    const std::vector<double> levels = parse_level_range(args.levels);
    const fbmtv::OccupationDensity curve = fbmtv::local_time_curve(
        path, args.c, fbmtv::HurstIndex(args.hurst), levels, args.ckh);
    std::string csv = "level,density\n";
    for (std::size_t i = 0; i < curve.levels.size(); ++i) {
        csv += format_double(curve.levels[i]);
        csv += ',';
        csv += format_double(curve.density[i]);
        csv += '\n';
    }
    write_text_file(args.out, csv);
    manifest.finished_at = fbmtv::utc_timestamp_now();
    manifest.add_output(args.out);
    manifest.write_beside(args.out);
}

struct McArgs {
    std::string experiment;
    std::string config;
    std::string out;
    long long workers = -1; // -1: not given on the command line
};

std::string tail_csv_path_for(const std::string& report_path) {
    const std::string suffix = ".json";
    if (report_path.size() > suffix.size() &&
        report_path.compare(report_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return report_path.substr(0, report_path.size() - suffix.size()) + ".curve.csv";
    }
    return report_path + ".curve.csv";
}

void run_mc(const McArgs& args, const std::string& command) {
    fbmtv::RunManifest manifest = make_manifest(command);
    fbmtv::McConfig cfg = fbmtv::McConfig::from_file(args.config);
    const fbmtv::ExperimentKind requested =
        fbmtv::experiment_kind_from_string(args.experiment);
    if (requested != cfg.experiment) {
        throw fbmtv::validation_error("config declares experiment '" +
                                      fbmtv::to_string(cfg.experiment) +
                                      "' but the command line asked for '" + args.experiment +
                                      "'");
    }
    if (args.workers >= 0) cfg.workers = static_cast<std::size_t>(args.workers);
    if (const char* env = std::getenv("FBMTV_WORKERS")) {
        try {
            std::size_t used = 0;
            const long long parsed = std::stoll(env, &used);
            if (used != std::string(env).size() || parsed < 0) {
                throw std::invalid_argument(env);
            }
            cfg.workers = static_cast<std::size_t>(parsed);
        } catch (const std::exception&) {
            throw fbmtv::validation_error(std::string("FBMTV_WORKERS is not a valid count: '") +
                                          env + "'");
        }
    }
    manifest.has_seed = true;
    manifest.seed = cfg.seed;
    manifest.config_echo = cfg.to_document().canonical_text();
    const fbmtv::ExperimentReport report = fbmtv::run_experiment(cfg);
    write_text_file(args.out, report.json_text);
    manifest.finished_at = fbmtv::utc_timestamp_now();
    manifest.add_output(args.out);
    if (!report.tail_csv.empty()) {
        const std::string curve_path = tail_csv_path_for(args.out);
        write_text_file(curve_path, report.tail_csv);
        manifest.add_output(curve_path);
    }
    manifest.write_beside(args.out);
}

} // namespace

int main(int argc, char** argv) {
    const std::string command = reassemble_command(argc, argv);
    CLI::App app{"fractional Brownian path statistics: simulation, truncated variation, "
                 "level crossings, local time, and Monte Carlo experiments"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "sample a fractional Brownian path to CSV");
    sim->add_option("--hurst", sim_args.hurst, "Hurst index in (0,1)")->required();
    sim->add_option("--steps", sim_args.steps, "number of increments")->required();
    sim->add_option("--dt", sim_args.dt, "time step")->required();
    sim->add_option("--seed", sim_args.seed, "random seed")->required();
    sim->add_option("--method", sim_args.method, "sampling method")
        ->check(CLI::IsMember({"fft", "chol"}));
    sim->add_option("--out", sim_args.out, "output CSV path (stdout if omitted)");
    sim->callback([&]() { run_simulate(sim_args, command); });

    TvArgs tv_args;
    auto* tv = app.add_subcommand("tv", "truncated variation of a CSV path");
    tv->add_option("--input", tv_args.input, "input CSV path")->required();
    tv->add_option("--c", tv_args.c, "truncation threshold (>= 0)")->required();
    tv->add_option("--kind", tv_args.kind, "variation kind")
        ->check(CLI::IsMember({"ttv", "utv", "dtv"}));
    tv->add_option("--witness", tv_args.witness, "write the optimal pairs to this CSV");
    tv->callback([&]() { run_tv(tv_args, command); });

    CrossingsArgs cross_args;
    auto* crossings = app.add_subcommand("crossings", "level-crossing counts of a CSV path");
    crossings->add_option("--input", cross_args.input, "input CSV path")->required();
    crossings->add_option("--c", cross_args.c, "strip width (> 0)")->required();
    crossings->add_option("--rho", cross_args.rho, "grid offset");
    auto* a_opt = crossings->add_option("--a", cross_args.a, "single strip at [a, a+c]");
    crossings->add_option("--report", cross_args.report, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    crossings->callback([&]() {
        cross_args.has_a = a_opt->count() > 0;
        run_crossings(cross_args);
    });

    LoctimeArgs loc_args;
    auto* loctime = app.add_subcommand("loctime", "local-time curve of a CSV path");
    loctime->add_option("--input", loc_args.input, "input CSV path")->required();
    loctime->add_option("--hurst", loc_args.hurst, "Hurst index in (0,1)")->required();
    loctime->add_option("--c", loc_args.c, "truncation threshold (> 0)")->required();
    loctime->add_option("--ckh", loc_args.ckh, "variation-constant estimate (> 0)")->required();
    loctime->add_option("--levels", loc_args.levels, "level range a0:a1:step")->required();
    loctime->add_option("--out", loc_args.out, "output CSV path")->required();
    loctime->callback([&]() { run_loctime(loc_args, command); });

    McArgs mc_args;
    auto* mc = app.add_subcommand("mc", "seeded Monte Carlo experiments");
    mc->add_option("experiment", mc_args.experiment, "experiment to run")
        ->required()
        ->check(CLI::IsMember({"mean-tv", "frak-c", "tails", "limits", "k-limit", "scaling"}));
    mc->add_option("--config", mc_args.config, "flat TOML config file")->required();
    mc->add_option("--out", mc_args.out, "output report JSON path")->required();
    mc->add_option("--workers", mc_args.workers, "worker threads (0 = auto)")
        ->check(CLI::NonNegativeNumber);
    mc->callback([&]() { run_mc(mc_args, command); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const fbmtv::invariant_violation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 2;
    } catch (const fbmtv::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
