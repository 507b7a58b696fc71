#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fasticp/dataset.hpp"
#include "fasticp/discover.hpp"
#include "fasticp/evalkit.hpp"
#include "fasticp/invariance.hpp"
#include "fasticp/scm.hpp"

namespace fasticp::cli {

enum ExitCode { exit_ok = 0, exit_usage = 2, exit_data = 3, exit_internal = 4 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` document; `#` starts a comment, later keys win.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap read_config(std::istream& in);
ConfigMap read_config_file(const std::filesystem::path& path);
void merge_config(ConfigMap& base, const ConfigMap& overrides);

struct SweepConfig {
    std::string setup = "custom";
    ScmParams params;
    /// When above params.n_int, each graph draws N_int uniformly from [n_int, n_int_max].
    int n_int_max = 0;
    /// "fixed" uses params.p_edge; "two_over_nint" recomputes it per graph.
    std::string p_edge_rule = "fixed";
    std::vector<int> sample_sizes{1000};
    int graphs = 100;
    int draws = 50;
    std::vector<Method> methods{Method::icp, Method::ias, Method::mmse_icp, Method::fast_icp};
    double alpha = 0.05;
    int max_depth = 2;
    int max_set_size = 1;
    std::optional<double> ias_alpha0;
    ModelKind model = ModelKind::ols;
    bool bonferroni_envs = true;
    bool oracle = false;
    int preselect_k = 10;
    int fast_scope_cap = 100;
    std::uint64_t seed = 0;

    void validate() const;
    /// Canonical key/value form; round-trips through sweep_from_config.
    ConfigMap to_map() const;
    InvarianceConfig invariance() const;
    DiscoveryOptions discovery() const;
};

const std::vector<std::string>& preset_names();
SweepConfig preset(const std::string& name);

/// Starts from the `setup` preset (if any) and applies the remaining keys.
SweepConfig sweep_from_config(const ConfigMap& config);

/// Deterministic per-task generation shared by simulate and bench.
Scm task_scm(const SweepConfig& config, int graph, int draw);
Dataset task_dataset(const SweepConfig& config, const Scm& scm, int graph, int draw, int n);

/// Restricts the scope to the L2-boosting pre-selection when the covariate
/// count exceeds what `method` enumerates.
DiscoveryOptions scoped_options(Method method, const Dataset& data, DiscoveryOptions options, int preselect_k);

/// Writes data_g{g}_c{c}_n{n}.csv, its .truth sidecar and manifest.json.
/// Returns the manifest.
nlohmann::json cmd_simulate(const SweepConfig& config, const std::filesystem::path& out_dir);

struct DiscoverRequest {
    std::filesystem::path data_path;
    Method method = Method::mmse_icp;
    InvarianceConfig invariance;
    DiscoveryOptions options;
    int preselect_k = 10;
};

nlohmann::json cmd_discover(const DiscoverRequest& request);

/// Scores predicted ids or column names ("X3" means id 2) against a sidecar.
nlohmann::json cmd_score(const std::vector<std::string>& predicted, const std::filesystem::path& truth_path);

struct BenchOptions {
    std::filesystem::path out_csv;
    int jobs = 1;
    bool resume = false;
};

struct BenchReport {
    long rows_total = 0;
    long rows_written = 0;
    long rows_skipped = 0;
    long rows_failed = 0;
    std::filesystem::path manifest_path;
    std::filesystem::path summary_path;
};

const std::vector<std::string>& bench_columns();

/// One row per (graph, draw, n, method), written in row order; the
/// manifest and summary JSON sit next to the CSV.
BenchReport cmd_bench(const SweepConfig& config, const BenchOptions& options);

/// Means and standard errors per (method, n) from a results CSV.
nlohmann::json summarize_results(const std::filesystem::path& csv_path);

}  // namespace fasticp::cli
