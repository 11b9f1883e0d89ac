#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwlab/experiments.hpp"

using namespace gwlab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("gwlab-test-" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("config files parse flat key-value pairs with comments") {
    const auto cfg = ExperimentConfig::from_string(
        "# header comment\n"
        "family = two-point\n"
        "seed= 42   # trailing comment\n"
        "\n"
        "r_list = 2, 4, 8\n");
    CHECK(cfg.has("family"));
    CHECK(cfg.get("family", "?") == "two-point");
    CHECK(cfg.get_u64("seed", 0) == 42);
    CHECK(cfg.get_double("missing", 3.5) == 3.5);
    const auto lst = cfg.get_list("r_list", {});
    REQUIRE(lst.size() == 3);
    CHECK(lst[1] == 4.0);

    CHECK_THROWS(ExperimentConfig::from_string("this line has no equals sign\n"));
    CHECK_THROWS(ExperimentConfig::from_file("/no/such/config/file.cfg"));
}

TEST_CASE("config digests depend on content, not construction order") {
    ExperimentConfig a, b;
    a.set("x", "1");
    a.set("y", "2");
    b.set("y", "2");
    b.set("x", "1");
    CHECK(a.digest() == b.digest());
    b.set("x", "3");
    CHECK(a.digest() != b.digest());
    CHECK(a.digest().size() == 16);
}

TEST_CASE("unknown experiments and bad configs map to distinct exit codes") {
    RunOptions opts;
    opts.out_dir = fresh_dir("exitcodes").string();
    CHECK(run_experiment("no-such-experiment", ExperimentConfig{}, opts) ==
          kExitUnknownExperiment);

    // an impossible step budget surfaces as the budget exit code
    ExperimentConfig cfg;
    cfg.set("step_budget", "10");
    cfg.set("n_excursions", "1000");
    cfg.set("replicas", "1");
    CHECK(run_experiment("zr-moments", cfg, opts) == kExitBudgetExceeded);
}

TEST_CASE("experiments write a csv and a summary and rerun byte-identically") {
    ExperimentConfig cfg;
    cfg.set("n_samples", "20000");
    const auto d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
    RunOptions o1, o2;
    o1.out_dir = d1.string();
    o2.out_dir = d2.string();
    REQUIRE(run_experiment("verify-law", cfg, o1) == kExitOk);
    REQUIRE(run_experiment("verify-law", cfg, o2) == kExitOk);

    const auto rows1 = csv_data_rows((d1 / "verify-law.csv").string());
    const auto rows2 = csv_data_rows((d2 / "verify-law.csv").string());
    REQUIRE(!rows1.empty());
    CHECK(rows1 == rows2);

    std::ifstream in(d1 / "verify-law-summary.json");
    REQUIRE(in.good());
    const auto j = nlohmann::json::parse(in);
    CHECK(j["experiment"] == "verify-law");
    CHECK(j["config_digest"] == cfg.digest());
    CHECK(j["schema_version"] == 1);
    CHECK(j.contains("metrics"));
    CHECK(j.contains("verdicts"));
}

TEST_CASE("verdict assertion turns failures into a nonzero exit") {
    // the default verify-law verdicts pass, so --assert stays clean
    ExperimentConfig cfg;
    cfg.set("n_samples", "20000");
    RunOptions opts;
    opts.out_dir = fresh_dir("assert").string();
    opts.assert_verdicts = true;
    CHECK(run_experiment("verify-law", cfg, opts) == kExitOk);
}

TEST_CASE("csv aggregation reports schema-checked medians and exact slopes") {
    const auto dir = fresh_dir("summarize");
    const auto p1 = dir / "a.csv";
    {
        std::ofstream out(p1);
        out << "# comment\nx, y\n1, 3\n2, 5\n3, 7\n";
    }
    const auto j = nlohmann::json::parse(summarize_csv({p1.string()}, "x", "y"));
    CHECK(j["n_rows"] == 3);
    CHECK(j["columns"]["x"]["median"] == 2.0);
    CHECK(j["columns"]["y"]["median"] == 5.0);
    CHECK(std::abs(j["slope"].get<double>() - 2.0) < 1e-12);

    // merging a file with a different schema is an error
    const auto p2 = dir / "b.csv";
    {
        std::ofstream out(p2);
        out << "x, z\n1, 1\n";
    }
    CHECK_THROWS(summarize_csv({p1.string(), p2.string()}));

    // single data row: median is the row itself
    const auto p3 = dir / "c.csv";
    {
        std::ofstream out(p3);
        out << "x, y\n4, 9\n";
    }
    const auto js = nlohmann::json::parse(summarize_csv({p3.string()}));
    CHECK(js["columns"]["x"]["median"] == 4.0);
    CHECK(js["columns"]["y"]["iqr"] == 0.0);
}

TEST_CASE("every registered experiment name dispatches") {
    CHECK(experiment_names().size() == 10);
    for (const auto& n : experiment_names()) CHECK(!n.empty());
}
