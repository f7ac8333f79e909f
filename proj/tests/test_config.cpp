#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "fbmtv/config.hpp"
#include "fbmtv/errors.hpp"

using namespace fbmtv;

TEST_CASE("config values are strictly typed", "[config]") {
    const ConfigValue b(true);
    const ConfigValue i(std::int64_t{7});
    const ConfigValue d(2.5);
    const ConfigValue s(std::string("hi"));

    REQUIRE(b.as_bool());
    REQUIRE(i.as_integer() == 7);
    REQUIRE(i.as_number() == 7.0); // integers are usable as numbers
    REQUIRE(d.as_number() == 2.5);
    REQUIRE(s.as_string() == "hi");

    REQUIRE(i.is_number());
    REQUIRE(d.is_number());
    REQUIRE_FALSE(d.is_integer());

    REQUIRE_THROWS_AS(b.as_integer(), validation_error);
    REQUIRE_THROWS_AS(i.as_bool(), validation_error);
    REQUIRE_THROWS_AS(d.as_integer(), validation_error);
    REQUIRE_THROWS_AS(s.as_number(), validation_error);
    REQUIRE_THROWS_AS(i.as_array(), validation_error);
}

TEST_CASE("document parsing", "[config]") {
    SECTION("every value shape") {
        const ConfigDocument doc = ConfigDocument::parse(
            "count = 3\n"
            "scale = 2.5\n"
            "big = 1e3\n"
            "name = \"run one\"\n"
            "flag = true\n"
            "offsets = [1, 2.5, -3]\n"
            "empty_line_below = 0\n"
            "\n"
            "# full-line comment\n"
            "trailing = 7 # explains the seven\n");
        REQUIRE(doc.get_integer("count") == 3);
        REQUIRE(doc.get_number("scale") == 2.5);
        REQUIRE(doc.get_number("big") == 1000.0);
        REQUIRE(doc.get_string("name") == "run one");
        REQUIRE(doc.get_bool("flag", false));
        REQUIRE(doc.get_number_list("offsets") == std::vector<double>{1.0, 2.5, -3.0});
        REQUIRE(doc.get_integer("trailing") == 7);
    }
    SECTION("hash inside a quoted string is data") {
        const ConfigDocument doc = ConfigDocument::parse("s = \"a#b\" # comment\n");
        REQUIRE(doc.get_string("s") == "a#b");
    }
    SECTION("string escapes") {
        const ConfigDocument doc = ConfigDocument::parse("s = \"a\\nb\\t\\\"q\\\" c:\\\\\"\n");
        REQUIRE(doc.get_string("s") == "a\nb\t\"q\" c:\\");
    }
    SECTION("trailing comma in arrays") {
        const ConfigDocument doc = ConfigDocument::parse("xs = [1, 2,]\n");
        REQUIRE(doc.get_integer_list("xs") == std::vector<std::int64_t>{1, 2});
    }
    SECTION("rejected inputs") {
        REQUIRE_THROWS_AS(ConfigDocument::parse("a = 1\na = 2\n"), validation_error);
        REQUIRE_THROWS_AS(ConfigDocument::parse("a 1\n"), validation_error);
        REQUIRE_THROWS_AS(ConfigDocument::parse("= 1\n"), validation_error);
        REQUIRE_THROWS_AS(ConfigDocument::parse("a =\n"), validation_error);
        REQUIRE_THROWS_AS(ConfigDocument::parse("a = 1 2\n"), validation_error);
        REQUIRE_THROWS_AS(ConfigDocument::parse("a = \"open\n"), validation_error);
        REQUIRE_THROWS_AS(ConfigDocument::parse("a = [1, 2\n"), validation_error);
        REQUIRE_THROWS_AS(ConfigDocument::parse("a = nan\n"), validation_error);
        REQUIRE_THROWS_AS(ConfigDocument::parse("a = inf\n"), validation_error);
        REQUIRE_THROWS_AS(ConfigDocument::parse("a = \"x\\q\"\n"), validation_error);
    }
    SECTION("typed getters and fallbacks") {
        const ConfigDocument doc = ConfigDocument::parse("a = 1\nb = 2.5\n");
        REQUIRE(doc.get_integer("a") == 1);
        REQUIRE_THROWS_AS(doc.get_integer("b"), validation_error); // not an integer
        REQUIRE(doc.get_number("b") == 2.5);
        REQUIRE(doc.get_integer("missing", 9) == 9);
        REQUIRE(doc.get_number("missing", 0.5) == 0.5);
        REQUIRE(doc.get_string("missing", "x") == "x");
        REQUIRE_FALSE(doc.get_bool("missing", false));
        REQUIRE_THROWS_AS(doc.get_integer("missing"), validation_error);
        REQUIRE_THROWS_AS(doc.get_number("missing"), validation_error);
        REQUIRE_THROWS_AS(doc.get_number_list("missing"), validation_error);
    }
    SECTION("unknown keys are called out") {
        const ConfigDocument doc = ConfigDocument::parse("a = 1\nzz = 2\n");
        REQUIRE_NOTHROW(doc.require_known_keys({"a", "zz"}));
        REQUIRE_THROWS_WITH(doc.require_known_keys({"a"}),
                            Catch::Matchers::ContainsSubstring("zz"));
    }
}

TEST_CASE("canonical rendering is sorted, exact, and stable", "[config]") {
    const ConfigDocument doc = ConfigDocument::parse(
        "b = 2\n"
        "a = 1.5\n"
        "t = \"x#\\\"y\\nz\"\n"
        "d = [1, 2.5, true]\n"
        "e = false\n");
    const std::string canon = doc.canonical_text();
    REQUIRE(canon ==
            "a = 1.5\n"
            "b = 2\n"
            "d = [1, 2.5, true]\n"
            "e = false\n"
            "t = \"x#\\\"y\\nz\"\n");
    // Rendering fixed point: reparsing the canonical text reproduces it.
    REQUIRE(ConfigDocument::parse(canon).canonical_text() == canon);
}

namespace {

std::string minimal_mean_tv() {
    return "experiment = \"mean-tv\"\n"
           "hurst = 0.5\n"
           "c_list = [0.5, 0.25]\n"
           "replicas = 10\n"
           "seed = 1\n";
}

} // namespace

TEST_CASE("experiment config parsing and defaults", "[config]") {
    const McConfig cfg = McConfig::from_document(ConfigDocument::parse(minimal_mean_tv()));
    REQUIRE(cfg.experiment == ExperimentKind::mean_tv);
    REQUIRE(cfg.h.value() == 0.5);
    REQUIRE(cfg.horizon == 1.0);
    REQUIRE(cfg.c_list == std::vector<double>{0.5, 0.25});
    REQUIRE(cfg.replicas == 10);
    REQUIRE(cfg.seed == 1);
    REQUIRE(cfg.workers == 0);
    REQUIRE(cfg.resolution == 16384);
    REQUIRE(cfg.kind == VariationKind::ttv);
    REQUIRE(cfg.method == FbmMethod::circulant_embedding);
    REQUIRE(cfg.rho == 0.0);

    SECTION("name round trips") {
        for (const char* name : {"mean-tv", "frak-c", "tails", "limits", "k-limit", "scaling"}) {
            REQUIRE(to_string(experiment_kind_from_string(name)) == name);
        }
        for (const char* name : {"ttv", "utv", "dtv"}) {
            REQUIRE(to_string(variation_kind_from_string(name)) == name);
        }
        REQUIRE_THROWS_AS(experiment_kind_from_string("meantv"), validation_error);
        REQUIRE_THROWS_AS(variation_kind_from_string("tv"), validation_error);
    }
}

TEST_CASE("experiment config validation", "[config]") {
    const auto parse_cfg = [](const std::string& text) {
        return McConfig::from_document(ConfigDocument::parse(text));
    };
    SECTION("truncations must fit under horizon^hurst") {
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"mean-tv\"\nhurst = 0.5\n"
                                    "c_list = [1.5, 0.5]\nreplicas = 5\nseed = 1\n"),
                          validation_error);
        // horizon 4, h = 0.5 caps c at 2.
        REQUIRE_NOTHROW(parse_cfg("experiment = \"mean-tv\"\nhurst = 0.5\nhorizon = 4\n"
                                  "c_list = [1.5, 0.5]\nreplicas = 5\nseed = 1\n"));
    }
    SECTION("c_list must be strictly decreasing and positive") {
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"mean-tv\"\nhurst = 0.5\n"
                                    "c_list = [0.25, 0.5]\nreplicas = 5\nseed = 1\n"),
                          validation_error);
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"mean-tv\"\nhurst = 0.5\n"
                                    "c_list = [0.5, 0.5]\nreplicas = 5\nseed = 1\n"),
                          validation_error);
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"mean-tv\"\nhurst = 0.5\n"
                                    "c_list = [0.5, 0]\nreplicas = 5\nseed = 1\n"),
                          validation_error);
    }
    SECTION("tail runs need replicas for the far quantiles") {
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"tails\"\nhurst = 0.25\n"
                                    "c_list = [0.5]\nreplicas = 99\nseed = 1\n"),
                          validation_error);
        REQUIRE_NOTHROW(parse_cfg("experiment = \"tails\"\nhurst = 0.25\n"
                                  "c_list = [0.5]\nreplicas = 100\nseed = 1\n"));
    }
    SECTION("subadditive-bound runs take horizons, not truncations") {
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"frak-c\"\nhurst = 0.5\n"
                                    "replicas = 5\nseed = 1\n"),
                          validation_error);
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"frak-c\"\nhurst = 0.5\n"
                                    "n_list = [4, 4]\nreplicas = 5\nseed = 1\nhorizon = 64\n"),
                          validation_error);
        REQUIRE_NOTHROW(parse_cfg("experiment = \"frak-c\"\nhurst = 0.5\n"
                                  "n_list = [4, 16]\nreplicas = 5\nseed = 1\nhorizon = 64\n"));
    }
    SECTION("scaling takes exactly one truncation") {
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"scaling\"\nhurst = 0.5\n"
                                    "c_list = [0.5, 0.25]\nreplicas = 5\nseed = 1\n"),
                          validation_error);
    }
    SECTION("slope fits need at least two truncations") {
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"mean-tv\"\nhurst = 0.5\n"
                                    "c_list = [0.5]\nreplicas = 5\nseed = 1\n"),
                          validation_error);
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"limits\"\nhurst = 0.5\n"
                                    "c_list = [0.5]\nreplicas = 5\nseed = 1\n"),
                          validation_error);
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"k-limit\"\nhurst = 0.5\n"
                                    "c_list = [0.5]\nreplicas = 5\nseed = 1\n"),
                          validation_error);
    }
    SECTION("assorted field checks") {
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"mean-tv\"\nhurst = 0.5\n"
                                    "c_list = [0.5, 0.25]\nreplicas = 0\nseed = 1\n"),
                          validation_error);
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"mean-tv\"\nhurst = 0.5\n"
                                    "c_list = [0.5, 0.25]\nreplicas = 5\nseed = 1\nworkers = -1\n"),
                          validation_error);
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"mean-tv\"\nhurst = 1.5\n"
                                    "c_list = [0.5, 0.25]\nreplicas = 5\nseed = 1\n"),
                          validation_error);
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"mean-tv\"\nhurst = 0.5\n"
                                    "c_list = [0.5, 0.25]\nreplicas = 5\nseed = 1\nmethod = \"x\"\n"),
                          validation_error);
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"mean-tv\"\nhurst = 0.5\n"
                                    "c_list = [0.5, 0.25]\nreplicas = 5\nseed = 1\nbogus = 1\n"),
                          validation_error);
        REQUIRE_THROWS_AS(parse_cfg("experiment = \"tails\"\nhurst = 0.25\nc_list = [0.5]\n"
                                    "replicas = 100\nseed = 1\nv_max = 1\n"),
                          validation_error);
    }
}

TEST_CASE("config echo excludes scheduling and round trips", "[config]") {
    McConfig cfg = McConfig::from_document(ConfigDocument::parse(minimal_mean_tv()));
    cfg.workers = 7; // must not leak into the echo
    const ConfigDocument echo = cfg.to_document();
    REQUIRE_FALSE(echo.contains("workers"));
    REQUIRE(echo.get_string("experiment") == "mean-tv");

    McConfig back = McConfig::from_document(echo);
    back.workers = 3; // different schedule, same echo
    REQUIRE(back.to_document().canonical_text() == echo.canonical_text());

    SECTION("tail grid appears only for tail runs") {
        REQUIRE_FALSE(echo.contains("v_max"));
        REQUIRE_FALSE(echo.contains("v_points"));
        const McConfig tails = McConfig::from_document(
            ConfigDocument::parse("experiment = \"tails\"\nhurst = 0.25\nc_list = [0.5]\n"
                                  "replicas = 100\nseed = 1\n"));
        const ConfigDocument tail_echo = tails.to_document();
        REQUIRE(tail_echo.get_number("v_max") == 16.0);
        REQUIRE(tail_echo.get_integer("v_points") == 49);
    }
}
