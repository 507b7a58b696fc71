#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fasticp/cli.hpp"
#include "fasticp/regress.hpp"

namespace fasticp::cli {

namespace {

nlohmann::json names_of(const Dataset& data, const NodeSet& ids) {
    nlohmann::json out = nlohmann::json::array();
    for (NodeId v : ids) out.push_back(data.column_name(v));
    return out;
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace

Scm task_scm(const SweepConfig& config, int graph, int draw) {
    Rng graph_rng = Rng(config.seed, 1).split(static_cast<std::uint64_t>(graph));
    ScmParams params = config.params;
    if (config.n_int_max > params.n_int) params.n_int = graph_rng.uniform_int(params.n_int, config.n_int_max);
    if (config.p_edge_rule == "two_over_nint") params.p_edge = p_edge_two_over_nint(params.n_int);
    const Dag dag = sample_random_dag(params, graph_rng);
    Rng mech_rng = Rng(config.seed, 2).split(static_cast<std::uint64_t>(graph)).split(static_cast<std::uint64_t>(draw));
    return draw_mechanism(dag, params, mech_rng);
}

Dataset task_dataset(const SweepConfig& config, const Scm& scm, int graph, int draw, int n) {
    Rng rng = Rng(config.seed, 3)
                  .split(static_cast<std::uint64_t>(graph))
                  .split(static_cast<std::uint64_t>(draw))
                  .split(static_cast<std::uint64_t>(n));
    return simulate(scm, n, rng);
}

DiscoveryOptions scoped_options(Method method, const Dataset& data, DiscoveryOptions options, int preselect_k) {
    if (options.scope) return options;
    const bool narrow = method == Method::fast_icp || (method == Method::ias && options.max_set_size <= 1);
    const int cap = narrow ? options.fast_scope_cap : options.exhaustive_scope_cap;
    if (data.covariate_count() <= cap) return options;
    const int k = narrow ? cap : std::min(preselect_k, cap);
    options.scope = make_set(l2_boost_select(data.x, data.y, k));
    return options;
}

nlohmann::json cmd_simulate(const SweepConfig& config, const std::filesystem::path& out_dir) {
    config.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());

    nlohmann::json manifest;
    manifest["command"] = "simulate";
    manifest["config"] = config.to_map();
    manifest["files"] = nlohmann::json::array();
    for (int g = 0; g < config.graphs; ++g) {
        for (int c = 0; c < config.draws; ++c) {
            Scm scm;
            try {
                scm = task_scm(config, g, c);
            } catch (const GenerationError& e) {
                throw DataError("graph " + std::to_string(g) + " draw " + std::to_string(c) + ": " + e.what());
            }
            std::ostringstream truth;
            write_sidecar(truth, scm.dag);
            for (int n : config.sample_sizes) {
                const Dataset data = task_dataset(config, scm, g, c, n);
                const std::string stem =
                    "data_g" + std::to_string(g) + "_c" + std::to_string(c) + "_n" + std::to_string(n);
                std::ostringstream csv;
                write_csv(csv, data);
                write_file(out_dir / (stem + ".csv"), csv.str());
                write_file(out_dir / (stem + ".truth"), truth.str());
                manifest["files"].push_back({{"data", stem + ".csv"},
                                             {"truth", stem + ".truth"},
                                             {"graph", g},
                                             {"draw", c},
                                             {"n", n},
                                             {"scm_seed", scm.seed},
                                             {"data_seed", data.seed}});
            }
        }
    }
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

nlohmann::json cmd_discover(const DiscoverRequest& request) {
    std::ifstream in(request.data_path);
    if (!in) throw DataError("cannot open " + request.data_path.string());
    Dataset data;
    try {
        data = read_csv(in);
    } catch (const ParseError& e) {
        throw DataError(request.data_path.string() + ": " + e.what());
    }
    if (data.environments().size() < 2) {
        throw UsageError(request.data_path.string() + ": discovery needs at least 2 environments");
    }
    const DiscoveryOptions options = scoped_options(request.method, data, request.options, request.preselect_k);
    StatisticalProvider provider(data, request.invariance);
    const DiscoveryResult result = discover(request.method, provider, options);

    nlohmann::json out;
    out["method"] = to_string(result.method);
    out["parents_hat"] = names_of(data, result.parents_hat);
    out["parents_hat_ids"] = result.parents_hat;
    out["scope"] = names_of(data, result.scope);
    out["no_invariant_set"] = result.no_invariant_set;
    out["final_p_value"] = result.final_p_value ? nlohmann::json(*result.final_p_value) : nlohmann::json();
    out["invariance_tests_run"] = result.invariance_tests_run;
    out["wall_time_s"] = result.wall_time.count();
    out["candidates"] = nlohmann::json::array();
    for (const Candidate& c : result.candidates) {
        out["candidates"].push_back(
            {{"subset", names_of(data, c.subset)}, {"mmse_hat", finite_or_null(c.mmse_hat)}, {"p_value", c.p_value}});
    }
    out["config"] = {{"alpha", request.invariance.alpha},
                     {"model", to_string(request.invariance.model)},
                     {"bonferroni", request.invariance.bonferroni_envs},
                     {"max_depth", options.max_depth},
                     {"max_set_size", options.max_set_size},
                     {"preselect_k", request.preselect_k}};
    return out;
}

nlohmann::json cmd_score(const std::vector<std::string>& predicted, const std::filesystem::path& truth_path) {
    std::ifstream in(truth_path);
    if (!in) throw DataError("cannot open " + truth_path.string());
    GroundTruth truth;
    try {
        truth = read_sidecar(in);
    } catch (const std::exception& e) {
        throw DataError(truth_path.string() + ": " + e.what());
    }
    const int d = truth.dag.covariate_count();
    NodeSet ids;
    for (const std::string& tok : predicted) {
        const bool named = !tok.empty() && (tok[0] == 'X' || tok[0] == 'x');
        const char* first = tok.data() + (named ? 1 : 0);
        const char* last = tok.data() + tok.size();
        int v = 0;
        auto res = std::from_chars(first, last, v);
        if (first == last || res.ec != std::errc() || res.ptr != last) {
            throw UsageError("cannot read covariate '" + tok + "' (use an id or a name like X3)");
        }
        if (named) --v;
        if (v < 0 || v >= d) throw UsageError("covariate '" + tok + "' is outside the graph");
        ids.push_back(v);
    }
    ids = make_set(std::move(ids));
    nlohmann::json out;
    out["predicted"] = ids;
    for (ReferenceKind kind : {ReferenceKind::PA, ReferenceKind::S_star}) {
        const ScoreReport r = score(ids, truth.dag, kind);
        out[to_string(kind)] = {{"reference", r.reference}, {"jaccard", r.jaccard}, {"f1", r.f1}, {"recall", r.recall}};
    }
    return out;
}

}  // namespace fasticp::cli
