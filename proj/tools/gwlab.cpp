#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gwlab/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"random-walk-on-trees experiment harness"};
    app.require_subcommand(0, 1);

    std::string config_path, out_dir = "out";
    std::uint64_t seed = 0;
    std::int64_t replicas = 0;
    bool assert_verdicts = false, refresh_fixtures = false;
    bool seed_given = false, replicas_given = false;

    std::string experiment;
    app.add_option("experiment", experiment, "experiment name")->required(false);
    app.add_option("--config", config_path, "flat key = value config file");
    app.add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
        seed_given = true;
    });
    app.add_option("--replicas", replicas, "replica count override")
        ->each([&](const std::string&) { replicas_given = true; });
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--assert", assert_verdicts, "nonzero exit when any verdict fails");
    app.add_flag("--refresh-fixtures", refresh_fixtures,
                 "regenerate frozen reference estimates");
    bool list = false;
    app.add_flag("--list", list, "list experiment names and exit");

    auto* sum = app.add_subcommand("summarize", "aggregate CSVs sharing one schema");
    std::vector<std::string> csv_paths;
    std::string x_col, y_col;
    sum->add_option("csv", csv_paths, "input csv files")->required();
    sum->add_option("--slope-x", x_col, "regressor column for an OLS slope");
    sum->add_option("--slope-y", y_col, "response column for an OLS slope");

    CLI11_PARSE(app, argc, argv);

    if (list) {
        for (const auto& n : gwlab::experiment_names()) std::cout << n << "\n";
        return gwlab::kExitOk;
    }

    if (sum->parsed()) {
        try {
            std::cout << gwlab::summarize_csv(csv_paths, x_col, y_col) << "\n";
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
            return gwlab::kExitBadConfig;
        }
        return gwlab::kExitOk;
    }

    if (experiment.empty()) {
        std::cerr << "usage: gwlab <experiment> [--config FILE] "
                     "[--seed N] [--replicas K] [--out DIR] [--assert] [--refresh-fixtures]\n"
                     "       gwlab summarize <csv...> [--slope-x COL --slope-y COL]\n"
                     "       gwlab --list\n";
        return gwlab::kExitUnknownExperiment;
    }

    gwlab::ExperimentConfig cfg;
    if (!config_path.empty()) {
        try {
            cfg = gwlab::ExperimentConfig::from_file(config_path);
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
            return gwlab::kExitBadConfig;
        }
    }
    if (seed_given) cfg.set("seed", std::to_string(seed));
    if (replicas_given) cfg.set("replicas", std::to_string(replicas));

    gwlab::RunOptions opts;
    opts.out_dir = out_dir;
    opts.assert_verdicts = assert_verdicts;
    opts.refresh_fixtures = refresh_fixtures;

    try {
        return gwlab::run_experiment(experiment, cfg, opts);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return gwlab::kExitBadConfig;
    }
}
