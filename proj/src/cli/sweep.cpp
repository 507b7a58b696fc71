// Benchmark sweep over (graph, draw, n, method). Work is split by task
// (graph, draw, n); all methods of a task share one dataset and provider.
// Finished tasks are buffered and flushed strictly in row order, so the CSV
// is the same for any worker count and a crash leaves a clean prefix.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "fasticp/cli.hpp"

namespace fasticp::cli {

namespace {

std::string join_ids(const NodeSet& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? ";" : "") + std::to_string(ids[i]);
    return out;
}

std::filesystem::path sibling(const std::filesystem::path& csv, const std::string& suffix) {
    std::filesystem::path p = csv;
    p.replace_extension(suffix);
    return p;
}

struct TaskKey {
    int graph;
    int draw;
    int n;
};

class TaskRunner {
public:
    explicit TaskRunner(const SweepConfig& config) : config_(config) {}

    std::vector<std::string> run(long task, long first_row) const {
        const long s = static_cast<long>(config_.sample_sizes.size());
        const TaskKey key{static_cast<int>(task / s / config_.draws), static_cast<int>(task / s % config_.draws),
                          config_.sample_sizes[static_cast<std::size_t>(task % s)]};
        std::vector<std::string> rows;
        std::optional<Scm> scm;
        std::optional<Dataset> data;
        std::unique_ptr<InvarianceProvider> provider;
        std::string setup_error;
        try {
            scm = task_scm(config_, key.graph, key.draw);
            data = task_dataset(config_, *scm, key.graph, key.draw, key.n);
            if (config_.oracle) {
                provider = with_oracle(OracleContext::from_scm(*scm, true));
            } else {
                provider = std::make_unique<StatisticalProvider>(*data, config_.invariance());
            }
        } catch (const std::exception& e) {
            setup_error = e.what();
        }
        for (std::size_t m = 0; m < config_.methods.size(); ++m) {
            const Method method = config_.methods[m];
            const long row_id = first_row + static_cast<long>(m);
            std::vector<std::string> f(bench_columns().size());
            f[0] = std::to_string(row_id);
            f[1] = std::to_string(key.graph);
            f[2] = std::to_string(key.draw);
            f[3] = std::to_string(key.n);
            f[4] = to_string(method);
            if (scm) {
                f[7] = join_ids(reference_set(scm->dag, ReferenceKind::PA));
                f[8] = join_ids(reference_set(scm->dag, ReferenceKind::S_star));
            }
            std::string error = setup_error;
            if (error.empty()) {
                try {
                    const DiscoveryOptions options =
                        scoped_options(method, *data, config_.discovery(), config_.preselect_k);
                    const DiscoveryResult r = discover(method, *provider, options);
                    const ScoreReport pa = score(r.parents_hat, scm->dag, ReferenceKind::PA);
                    const ScoreReport ss = score(r.parents_hat, scm->dag, ReferenceKind::S_star);
                    f[5] = "ok";
                    f[6] = join_ids(r.parents_hat);
                    f[9] = format_double(pa.jaccard);
                    f[10] = format_double(pa.f1);
                    f[11] = format_double(pa.recall);
                    f[12] = format_double(ss.jaccard);
                    f[13] = format_double(ss.f1);
                    f[14] = format_double(ss.recall);
                    f[15] = std::to_string(r.invariance_tests_run);
                    f[16] = r.no_invariant_set ? "1" : "0";
                    f[18] = format_double(r.wall_time.count());
                } catch (const std::exception& e) {
                    error = e.what();
                }
            }
            if (!error.empty()) {
                f[5] = "error";
                std::replace(error.begin(), error.end(), '\n', ' ');
                f[17] = error;
            }
            std::string line;
            for (std::size_t k = 0; k < f.size(); ++k) line += (k ? "," : "") + quote_csv_field(f[k]);
            rows.push_back(line + "\n");
        }
        return rows;
    }

private:
    const SweepConfig& config_;
};

/// Keeps the valid row prefix of an existing results file and returns its length.
long recover_prefix(const std::filesystem::path& csv, const std::string& header) {
    std::ifstream in(csv, std::ios::binary);
    if (!in) return -1;
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::size_t pos = 0;
    std::size_t keep = 0;
    long rows = -1;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) break;  // unterminated tail from an interrupted write
        const std::string line = text.substr(pos, nl - pos);
        if (rows < 0) {
            if (line + "\n" != header) throw UsageError(csv.string() + ": header does not match this build");
            rows = 0;
        } else {
            const auto fields = split_csv_line(line);
            if (fields.size() != bench_columns().size() || fields[0] != std::to_string(rows)) break;
            ++rows;
        }
        pos = nl + 1;
        keep = pos;
    }
    in.close();
    std::filesystem::resize_file(csv, keep);
    return rows;
}

struct Stat {
    double sum = 0.0;
    double sum_sq = 0.0;
    long count = 0;
    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++count;
    }
    nlohmann::json json() const {
        if (count == 0) return {{"mean", nullptr}, {"se", nullptr}, {"count", 0}};
        const double mean = sum / static_cast<double>(count);
        double se = 0.0;
        if (count > 1) {
            const double var = std::max(0.0, (sum_sq - static_cast<double>(count) * mean * mean) / (count - 1.0));
            se = std::sqrt(var / static_cast<double>(count));
        }
        return {{"mean", mean}, {"se", se}, {"count", count}};
    }
};

}  // namespace

const std::vector<std::string>& bench_columns() {
    static const std::vector<std::string> columns{
        "row_id",         "graph",       "draw",        "n",         "method",     "status",    "parents_hat",
        "pa_y",           "s_star",      "jaccard_pa",  "f1_pa",     "recall_pa",  "jaccard_s_star",
        "f1_s_star",      "recall_s_star", "tests_run", "no_invariant_set", "error", "wall_time_s"};
    return columns;
}

BenchReport cmd_bench(const SweepConfig& config, const BenchOptions& options) {
    config.validate();
    if (options.jobs < 1) throw UsageError("--jobs must be at least 1");
    BenchReport report;
    report.manifest_path = sibling(options.out_csv, ".manifest.json");
    report.summary_path = sibling(options.out_csv, ".summary.json");

    const long tasks = static_cast<long>(config.graphs) * config.draws * static_cast<long>(config.sample_sizes.size());
    const long per_task = static_cast<long>(config.methods.size());
    report.rows_total = tasks * per_task;

    std::string header;
    for (std::size_t k = 0; k < bench_columns().size(); ++k) header += (k ? "," : "") + bench_columns()[k];
    header += "\n";

    nlohmann::json manifest;
    manifest["command"] = "bench";
    manifest["config"] = config.to_map();
    manifest["results"] = options.out_csv.filename().string();
    manifest["rows_total"] = report.rows_total;

    long done = 0;
    if (options.resume && std::filesystem::exists(options.out_csv)) {
        std::ifstream min(report.manifest_path);
        if (!min) throw UsageError("--resume needs " + report.manifest_path.string());
        nlohmann::json previous;
        try {
            previous = nlohmann::json::parse(min);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(report.manifest_path.string() + ": " + e.what());
        }
        if (previous.value("config", nlohmann::json()) != manifest["config"]) {
            throw UsageError("--resume: configuration differs from " + report.manifest_path.string());
        }
        done = std::max(0L, recover_prefix(options.out_csv, header));
    }
    if (!options.out_csv.parent_path().empty()) std::filesystem::create_directories(options.out_csv.parent_path());
    {
        std::ofstream mout(report.manifest_path, std::ios::binary);
        if (!mout) throw DataError("cannot write " + report.manifest_path.string());
        mout << manifest.dump(2) << "\n";
    }
    const bool fresh = !(options.resume && std::filesystem::exists(options.out_csv)) ||
                       std::filesystem::file_size(options.out_csv) == 0;
    std::ofstream out(options.out_csv, fresh ? std::ios::binary | std::ios::trunc : std::ios::binary | std::ios::app);
    if (!out) throw DataError("cannot write " + options.out_csv.string());
    if (fresh) {
        out << header;
        out.flush();
        done = 0;
    }
    report.rows_skipped = done;

    TaskRunner runner(config);
    std::atomic<long> next_task{done / std::max(1L, per_task)};
    std::mutex mu;
    std::map<long, std::vector<std::string>> pending;
    long next_flush = next_task.load();
    std::exception_ptr failure;

    auto worker = [&] {
        while (true) {
            const long t = next_task.fetch_add(1);
            if (t >= tasks) return;
            std::vector<std::string> rows;
            try {
                rows = runner.run(t, t * per_task);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) failure = std::current_exception();
                return;
            }
            std::lock_guard<std::mutex> lock(mu);
            pending.emplace(t, std::move(rows));
            for (auto it = pending.find(next_flush); it != pending.end(); it = pending.find(next_flush)) {
                for (std::size_t m = 0; m < it->second.size(); ++m) {
                    const long row_id = it->first * per_task + static_cast<long>(m);
                    if (row_id < done) continue;  // already on disk from the interrupted run
                    out << it->second[m];
                    ++report.rows_written;
                    if (it->second[m].find(",error,") != std::string::npos) ++report.rows_failed;
                }
                out.flush();
                pending.erase(it);
                ++next_flush;
            }
        }
    };
    const int jobs = static_cast<int>(std::min<long>(options.jobs, std::max(1L, tasks)));
    std::vector<std::thread> threads;
    for (int j = 1; j < jobs; ++j) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
    out.close();
    if (!out) throw DataError("write failed for " + options.out_csv.string());

    const nlohmann::json summary = summarize_results(options.out_csv);
    std::ofstream sout(report.summary_path, std::ios::binary);
    if (!sout) throw DataError("cannot write " + report.summary_path.string());
    sout << summary.dump(2) << "\n";
    return report;
}

nlohmann::json summarize_results(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw DataError("cannot open " + csv_path.string());
    static const std::vector<std::string> metrics{"jaccard_pa",     "f1_pa",         "recall_pa", "jaccard_s_star",
                                                  "f1_s_star",      "recall_s_star", "tests_run", "wall_time_s"};
    std::map<std::string, int> index;
    for (std::size_t k = 0; k < bench_columns().size(); ++k) index[bench_columns()[k]] = static_cast<int>(k);

    struct Group {
        long rows = 0;
        long errors = 0;
        std::map<std::string, Stat> stats;
    };
    std::map<std::pair<std::string, int>, Group> groups;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        if (++line_no == 1) continue;
        const auto f = split_csv_line(line);
        if (f.size() != bench_columns().size()) {
            throw DataError(csv_path.string() + " line " + std::to_string(line_no) + ": wrong field count");
        }
        Group& g = groups[{f[index["method"]], std::stoi(f[index["n"]])}];
        ++g.rows;
        if (f[index["status"]] != "ok") {
            ++g.errors;
            continue;
        }
        for (const auto& m : metrics) g.stats[m].add(parse_double(f[index[m]], csv_path.string()));
    }
    nlohmann::json out;
    out["groups"] = nlohmann::json::array();
    for (const auto& [key, g] : groups) {
        nlohmann::json entry{{"method", key.first}, {"n", key.second}, {"rows", g.rows}, {"errors", g.errors}};
        for (const auto& m : metrics) {
            auto it = g.stats.find(m);
            entry["metrics"][m] = it == g.stats.end() ? Stat().json() : it->second.json();
        }
        out["groups"].push_back(entry);
    }
    return out;
}

}  // namespace fasticp::cli
