#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gwlab {

// Flat key = value configuration ('#' starts a comment); everything an
// experiment needs, fully determining its output rows.
class ExperimentConfig {
public:
    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_string(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_list(const std::string& key,
                                 const std::vector<double>& fallback) const;
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    // stable hash of the sorted key/value pairs, hex encoded
    std::string digest() const;

private:
    std::map<std::string, std::string> kv_;
};

struct RunOptions {
    std::string out_dir = "out";
    bool assert_verdicts = false;   // nonzero exit when any verdict fails
    bool refresh_fixtures = false;  // regenerate frozen reference estimates
};

// exit codes shared by the library entry point and the CLI wrapper
inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertFailed = 1;
inline constexpr int kExitUnknownExperiment = 2;
inline constexpr int kExitBadConfig = 3;
inline constexpr int kExitBudgetExceeded = 4;

const std::vector<std::string>& experiment_names();

// runs one named experiment: writes <out_dir>/<name>.csv and
// <out_dir>/<name>-summary.json, returns an exit code
int run_experiment(const std::string& name, const ExperimentConfig& config,
                   const RunOptions& options);

// aggregates CSVs sharing one schema into a JSON string with per-column
// median/IQR; fits an OLS slope of y_column over x_column when both are given
std::string summarize_csv(const std::vector<std::string>& csv_paths,
                          const std::string& x_column = "",
                          const std::string& y_column = "");

// data rows of a CSV artifact (comment lines starting with '#' dropped);
// used by the determinism checks
std::vector<std::string> csv_data_rows(const std::string& path);

}  // namespace gwlab
