#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbmtv/manifest.hpp"
#include "fbmtv/path.hpp"
#include "fbmtv/variation.hpp"

using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("fbmtv_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    static int counter = 0;
    const fs::path out = work_dir() / ("stdout_" + std::to_string(counter) + ".txt");
    const fs::path err = work_dir() / ("stderr_" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = env_prefix + std::string(FBMTV_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    CliResult result;
    result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (const char ch : text) n += ch == '\n' ? 1 : 0;
    return n;
}

// Writes the standard zigzag fixture and returns its path.
fs::path zigzag_csv() {
    const fs::path p = work_dir() / "zigzag.csv";
    fbmtv::write_path_csv_file(fbmtv::SamplePath(0.0, 1.0, {0.0, 1.0, 0.0, 1.0}), p.string());
    return p;
}

void require_manifest_verifies(const fs::path& output_file) {
    const fs::path manifest_path = fbmtv::manifest_path_for(output_file.string());
    REQUIRE(fs::exists(manifest_path));
    const nlohmann::json doc = nlohmann::json::parse(slurp(manifest_path));
    REQUIRE_FALSE(doc.at("tool_version").get<std::string>().empty());
    REQUIRE_FALSE(doc.at("command").get<std::string>().empty());
    bool found = false;
    for (const auto& entry : doc.at("outputs")) {
        if (entry.at("path").get<std::string>() == output_file.string()) {
            found = true;
            REQUIRE(entry.at("sha256").get<std::string>() ==
                    fbmtv::sha256_file_hex(output_file.string()));
        }
    }
    REQUIRE(found);
    for (const char* key : {"started_at", "finished_at"}) {
        const std::string stamp = doc.at(key).get<std::string>();
        REQUIRE(stamp.size() == 20);
        REQUIRE(stamp[4] == '-');
        REQUIRE(stamp[10] == 'T');
        REQUIRE(stamp.back() == 'Z');
    }
}

} // namespace

TEST_CASE("digest known answers", "[cli]") {
    REQUIRE(fbmtv::sha256_hex(std::string()) ==
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    REQUIRE(fbmtv::sha256_hex(std::string("abc")) ==
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("simulate prints a CSV when no output file is given", "[cli]") {
    const CliResult r = run_cli("simulate --hurst 0.5 --steps 16 --dt 0.0625 --seed 7");
    REQUIRE(r.code == 0);
    REQUIRE(r.out.rfind("t,value\n", 0) == 0);
    REQUIRE(count_lines(r.out) == 18); // header + 17 samples
}

TEST_CASE("simulate writes a path file with a verifying manifest", "[cli]") {
    const fs::path out = work_dir() / "sim.csv";
    const CliResult r = run_cli("simulate --hurst 0.7 --steps 32 --dt 0.03125 --seed 9 --out " +
                                out.string());
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(out));
    require_manifest_verifies(out);

    const nlohmann::json doc =
        nlohmann::json::parse(slurp(fbmtv::manifest_path_for(out.string())));
    REQUIRE(doc.at("seed") == 9);
    REQUIRE_THAT(doc.at("command").get<std::string>(), ContainsSubstring("simulate"));

    SECTION("same command, same bytes") {
        const fs::path again = work_dir() / "sim_again.csv";
        REQUIRE(run_cli("simulate --hurst 0.7 --steps 32 --dt 0.03125 --seed 9 --out " +
                        again.string())
                    .code == 0);
        REQUIRE(slurp(again) == slurp(out));
    }
    SECTION("round trip through the reader") {
        const fbmtv::SamplePath p = fbmtv::read_path_csv_file(out.string());
        REQUIRE(p.size() == 33);
        REQUIRE(p.dt() == 0.03125);
    }
}

TEST_CASE("tv prints the requested variation", "[cli]") {
    const fs::path input = zigzag_csv();
    SECTION("zero truncation gives the raw total variation") {
        const CliResult r = run_cli("tv --input " + input.string() + " --c 0");
        REQUIRE(r.code == 0);
        REQUIRE(r.out == "3\n");
    }
    SECTION("kinds agree with the library") {
        const fbmtv::SamplePath p = fbmtv::read_path_csv_file(input.string());
        for (const std::string kind : {"ttv", "utv", "dtv"}) {
            const CliResult r =
                run_cli("tv --input " + input.string() + " --c 0.3 --kind " + kind);
            REQUIRE(r.code == 0);
            const double want = kind == "ttv"   ? fbmtv::ttv_value(p, 0.3)
                                : kind == "utv" ? fbmtv::utv_value(p, 0.3)
                                                : fbmtv::dtv_value(p, 0.3);
            REQUIRE(r.out == fbmtv::format_double(want) + "\n");
        }
    }
    SECTION("witness file lists the selected pairs") {
        const fs::path witness = work_dir() / "pairs.csv";
        const CliResult r = run_cli("tv --input " + input.string() + " --c 0.3 --kind utv" +
                                    " --witness " + witness.string());
        REQUIRE(r.code == 0);
        const std::string text = slurp(witness);
        REQUIRE(text.rfind("s_index,t_index,payoff\n", 0) == 0);
        const fbmtv::SamplePath p = fbmtv::read_path_csv_file(input.string());
        REQUIRE(count_lines(text) == 1 + fbmtv::utv(p, 0.3).witness.size());
        require_manifest_verifies(witness);
    }
}

TEST_CASE("crossings reports", "[cli]") {
    const fs::path input = work_dir() / "swings.csv";
    fbmtv::write_path_csv_file(fbmtv::SamplePath(0.0, 1.0, {-0.5, 1.5, -0.5, 1.5}),
                               input.string());
    SECTION("grid summary as json") {
        const CliResult r = run_cli("crossings --input " + input.string() + " --c 1");
        REQUIRE(r.code == 0);
        const nlohmann::json doc = nlohmann::json::parse(r.out);
        REQUIRE(doc.at("k") == 3);
        REQUIRE(doc.at("ku") == 2);
        REQUIRE(doc.at("kd") == 1);
        REQUIRE(doc.at("per_level").size() == 1);
        REQUIRE(doc.at("per_level")[0].at("index") == 0);
    }
    SECTION("single strip") {
        const CliResult r = run_cli("crossings --input " + input.string() + " --c 1 --a 0");
        REQUIRE(r.code == 0);
        const nlohmann::json doc = nlohmann::json::parse(r.out);
        REQUIRE(doc.at("u") == 2);
        REQUIRE(doc.at("d") == 1);
        REQUIRE(doc.at("n") == 3);
    }
    SECTION("csv shape") {
        const CliResult r =
            run_cli("crossings --input " + input.string() + " --c 1 --report csv");
        REQUIRE(r.code == 0);
        REQUIRE(r.out.rfind("level_index,level,u,d,n\n", 0) == 0);
        REQUIRE(count_lines(r.out) == 2);
    }
}

TEST_CASE("loctime writes the sampled curve", "[cli]") {
    const fs::path input = work_dir() / "unit_span.csv";
    const CliResult sim = run_cli("simulate --hurst 0.5 --steps 64 --dt 0.015625 --seed 21" +
                                  std::string(" --out ") + input.string());
    REQUIRE(sim.code == 0);
    const fs::path out = work_dir() / "curve.csv";
    const CliResult r = run_cli("loctime --input " + input.string() +
                                " --hurst 0.5 --c 0.25 --ckh 0.9 --levels -2:2:0.5 --out " +
                                out.string());
    REQUIRE(r.code == 0);
    const std::string text = slurp(out);
    REQUIRE(text.rfind("level,density\n", 0) == 0);
    REQUIRE(count_lines(text) == 1 + 9); // levels -2, -1.5, ..., 2
    require_manifest_verifies(out);
}

TEST_CASE("mc runs are schedule-independent on disk", "[cli]") {
    const fs::path cfg = work_dir() / "mean_tv.toml";
    spit(cfg,
         "experiment = \"mean-tv\"\n"
         "hurst = 0.5\n"
         "c_list = [0.5, 0.25]\n"
         "replicas = 8\n"
         "seed = 4\n"
         "resolution = 64\n");
    const fs::path report1 = work_dir() / "report1.json";
    const fs::path report2 = work_dir() / "report2.json";

    const CliResult r1 = run_cli("mc mean-tv --config " + cfg.string() + " --out " +
                                 report1.string() + " --workers 1");
    REQUIRE(r1.code == 0);
    const CliResult r2 = run_cli("mc mean-tv --config " + cfg.string() + " --out " +
                                 report2.string() + " --workers 3");
    REQUIRE(r2.code == 0);
    REQUIRE(slurp(report1) == slurp(report2));
    require_manifest_verifies(report1);

    SECTION("the environment override must be a count") {
        const CliResult bad = run_cli("mc mean-tv --config " + cfg.string() + " --out " +
                                          (work_dir() / "r3.json").string(),
                                      "FBMTV_WORKERS=abc ");
        REQUIRE(bad.code == 1);
        REQUIRE_THAT(bad.err, ContainsSubstring("FBMTV_WORKERS"));
    }
    SECTION("the environment override wins over the flag") {
        const fs::path report3 = work_dir() / "report_env.json";
        const CliResult r3 = run_cli("mc mean-tv --config " + cfg.string() + " --out " +
                                         report3.string() + " --workers 1",
                                     "FBMTV_WORKERS=2 ");
        REQUIRE(r3.code == 0);
        REQUIRE(slurp(report3) == slurp(report1)); // and results never depend on it
    }
    SECTION("experiment name must match the config") {
        const CliResult r = run_cli("mc tails --config " + cfg.string() + " --out " +
                                    (work_dir() / "r4.json").string());
        REQUIRE(r.code == 1);
        REQUIRE_THAT(r.err, ContainsSubstring("mean-tv"));
    }
}

TEST_CASE("failure exit codes", "[cli]") {
    REQUIRE(run_cli("tv --input " + (work_dir() / "missing.csv").string() + " --c 1").code == 1);
    REQUIRE(run_cli("tv --c 1").code == 1);                       // missing required flag
    REQUIRE(run_cli("simulate --bogus 1").code == 1);             // unknown flag
    REQUIRE(run_cli("nonsense").code == 1);                       // unknown subcommand
    REQUIRE(run_cli("").code == 1);                               // subcommand required
    REQUIRE(run_cli("--help").code == 0);
    const fs::path bad = work_dir() / "bad.csv";
    spit(bad, "time,value\n0,zero\n1,1\n");
    REQUIRE(run_cli("tv --input " + bad.string() + " --c 1").code == 1);
    const CliResult neg = run_cli("tv --input " + zigzag_csv().string() + " --c -1");
    REQUIRE(neg.code == 1);
    REQUIRE_THAT(neg.err, ContainsSubstring("error"));
}
