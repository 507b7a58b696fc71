#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "fasticp/cli.hpp"

using namespace fasticp;
using namespace fasticp::cli;

namespace {

const std::vector<std::string> kSweepKeys{
    "setup",        "d",           "p_edge",     "p_edge_rule", "n_int",       "n_int_max",   "mechanism",
    "intervention", "symmetric_coefficients",    "noise_variance_shift",     "sample_sizes", "graphs",
    "draws",        "methods",     "alpha",      "max_depth",   "max_set_size", "ias_alpha0", "model",
    "bonferroni",   "oracle",      "preselect_k", "fast_scope_cap", "seed"};

struct SweepFlags {
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
};

void add_sweep_flags(CLI::App* cmd, SweepFlags& flags) {
    cmd->add_option("--config", flags.config_path, "flat key = value config file");
    for (const std::string& key : kSweepKeys) {
        std::string dashed = key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        std::string names = "--" + key;
        if (dashed != key) names += ",--" + dashed;
        if (key == "setup") names += ",--preset";
        if (key == "methods") names += ",--method";
        flags.options[key] = cmd->add_option(names, flags.values[key], "overrides config key " + key);
    }
}

SweepConfig sweep_from_flags(const SweepFlags& flags) {
    ConfigMap cfg;
    if (!flags.config_path.empty()) cfg = read_config_file(flags.config_path);
    ConfigMap overrides;
    for (const auto& [key, opt] : flags.options) {
        if (opt->count() > 0) overrides[key] = flags.values.at(key);
    }
    merge_config(cfg, overrides);
    return sweep_from_config(cfg);
}

void emit(const nlohmann::json& doc, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + out_path);
    out << doc.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Invariance-based causal parent discovery"};
    app.require_subcommand(1);

    SweepFlags sim_flags;
    std::string sim_out;
    CLI::App* sim = app.add_subcommand("simulate", "write simulated datasets and ground-truth sidecars");
    add_sweep_flags(sim, sim_flags);
    sim->add_option("--out", sim_out, "output directory")->required();

    DiscoverRequest req;
    std::string method = "mmse_icp";
    std::string model = "ols";
    std::string disc_out;
    double ias_alpha0 = 0.0;
    bool no_bonferroni = false;
    CLI::App* disc = app.add_subcommand("discover", "estimate the parents of Y in a dataset CSV");
    disc->add_option("--data", req.data_path, "dataset CSV (env, covariates, Y)")->required();
    disc->add_option("--method", method, "icp, ias, mmse_icp or fast_icp");
    disc->add_option("--alpha", req.invariance.alpha, "test level");
    disc->add_option("--model", model, "ols or gbt");
    disc->add_option("--max-depth,--max_depth", req.options.max_depth, "fast_icp removal depth");
    disc->add_option("--max-set-size,--max_set_size", req.options.max_set_size, "largest set IAS tests");
    auto* alpha0_opt = disc->add_option("--ias-alpha0,--ias_alpha0", ias_alpha0, "IAS empty-set level");
    disc->add_option("--scope-k,--scope_k,--preselect-k", req.preselect_k, "pre-selection size above the scope cap");
    disc->add_option("--seed", req.invariance.gbt.seed, "fold shuffle seed for gbt");
    disc->add_flag("--no-bonferroni", no_bonferroni, "do not scale by the number of environments");
    disc->add_option("--out", disc_out, "JSON output file (default stdout)");

    SweepFlags bench_flags;
    BenchOptions bench_opts;
    bench_opts.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    CLI::App* bench = app.add_subcommand("bench", "run a seeded benchmark sweep");
    add_sweep_flags(bench, bench_flags);
    bench->add_option("--out", bench_opts.out_csv, "results CSV")->required();
    bench->add_option("--jobs", bench_opts.jobs, "worker threads");
    bench->add_flag("--resume", bench_opts.resume, "continue an interrupted sweep");

    std::vector<std::string> predicted;
    std::string truth_path;
    std::string score_out;
    CLI::App* sc = app.add_subcommand("score", "score a predicted parent set against a sidecar");
    sc->add_option("--truth", truth_path, "ground-truth sidecar")->required();
    sc->add_option("--predicted", predicted, "ids or names, e.g. X1,X3")->delimiter(',');
    sc->add_option("--out", score_out, "JSON output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (sim->parsed()) {
            const nlohmann::json manifest = cmd_simulate(sweep_from_flags(sim_flags), sim_out);
            std::cerr << "wrote " << manifest["files"].size() << " datasets to " << sim_out << "\n";
        } else if (disc->parsed()) {
            req.method = parse_method(method);
            req.invariance.model = parse_model_kind(model);
            req.invariance.bonferroni_envs = !no_bonferroni;
            if (alpha0_opt->count() > 0) req.options.ias_alpha0 = ias_alpha0;
            if (!(req.invariance.alpha > 0.0 && req.invariance.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
            emit(cmd_discover(req), disc_out);
        } else if (bench->parsed()) {
            const BenchReport r = cmd_bench(sweep_from_flags(bench_flags), bench_opts);
            std::cerr << "rows: " << r.rows_written << " written, " << r.rows_skipped << " resumed, " << r.rows_failed
                      << " failed; summary in " << r.summary_path.string() << "\n";
        } else if (sc->parsed()) {
            emit(cmd_score(predicted, truth_path), score_out);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const ArgumentError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const GenerationError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
    return exit_ok;
}
