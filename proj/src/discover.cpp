#include "fasticp/discover.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

namespace fasticp {

StatisticalProvider::StatisticalProvider(const Dataset& data, InvarianceConfig config)
    : data_(data), config_(std::move(config)) {
    data_.validate();
    std::map<int, int> counts;
    for (int e : data_.env) ++counts[e];
    if (counts.size() < 2) throw ArgumentError("invariance testing needs at least 2 environments");
    for (const auto& [label, count] : counts) {
        if (count < 2) {
            throw ArgumentError("environment " + std::to_string(label) + " has fewer than 2 samples");
        }
    }
    if (config_.model == ModelKind::ols) ols_.emplace(data_.x, data_.y);
}

InvarianceVerdict StatisticalProvider::verdict(const NodeSet& subset) const {
    if (ols_) {
        for (NodeId v : subset) {
            if (v < 0 || v >= data_.covariate_count()) {
                throw ArgumentError("subset references unknown covariate " + std::to_string(v));
            }
        }
        return residual_invariance(data_.env, ols_->residuals(subset), config_);
    }
    return is_invariant(data_, subset, config_);
}

SubsetEvaluation StatisticalProvider::evaluate(const NodeSet& subset) const {
    const InvarianceVerdict v = verdict(subset);
    return {v.p_value, v.invariant, v.mmse_hat};
}

OracleContext OracleContext::from_scm(const Scm& scm, bool use_population_mmse) {
    OracleContext ctx;
    ctx.dag_ = scm.dag;
    ctx.scm_ = scm;
    ctx.use_population_mmse_ = use_population_mmse;
    return ctx;
}

OracleContext OracleContext::from_ground_truth(const GroundTruth& truth) {
    OracleContext ctx;
    ctx.dag_ = truth.dag;
    return ctx;
}

namespace {

class OracleProvider final : public InvarianceProvider {
public:
    explicit OracleProvider(const OracleContext& ctx) : dag_(ctx.dag()) {
        if (ctx.use_population_mmse()) {
            if (!ctx.scm()) throw UnsupportedError("population MMSE needs the generating SCM");
            if (ctx.scm()->mechanism != Mechanism::linear) {
                throw UnsupportedError("population MMSE is only defined for linear SCMs");
            }
            moments_ = population_moments(*ctx.scm());
        }
    }

    SubsetEvaluation evaluate(const NodeSet& subset) const override {
        for (NodeId v : subset) {
            if (v < 0 || v >= dag_.covariate_count()) {
                throw ArgumentError("subset references unknown covariate " + std::to_string(v));
            }
        }
        const bool inv = d_separated(dag_, dag_.environment(), dag_.target(), subset);
        const double mmse =
            moments_ ? population_mmse(*moments_, subset).value : std::numeric_limits<double>::quiet_NaN();
        if (inv) return {1.0, true, mmse};
        // Graded stand-in for a p-value: more open E-Y paths, stronger dependence.
        const long open = std::max(1L, count_open_paths(dag_, dag_.environment(), dag_.target(), subset));
        return {0.5 / (1.0 + static_cast<double>(open)), false, mmse};
    }

    int covariate_count() const override { return dag_.covariate_count(); }

private:
    Dag dag_;
    std::optional<PopulationMoments> moments_;
};

/// Memoizing front for one discovery run; counts distinct subsets tested.
class TestLedger {
public:
    explicit TestLedger(const InvarianceProvider& provider) : provider_(provider) {}

    const SubsetEvaluation& operator()(const NodeSet& subset) {
        auto it = cache_.find(subset);
        if (it != cache_.end()) return it->second;
        ++tests_;
        SubsetEvaluation eval = provider_.evaluate(subset);
        if (eval.invariant) invariant_.push_back({subset, eval.mmse, eval.p_value});
        return cache_.emplace(subset, eval).first->second;
    }

    long tests() const { return tests_; }
    const std::vector<Candidate>& invariant_sets() const { return invariant_; }

private:
    const InvarianceProvider& provider_;
    std::map<NodeSet, SubsetEvaluation> cache_;
    std::vector<Candidate> invariant_;
    long tests_ = 0;
};

NodeSet resolve_scope(const InvarianceProvider& provider, const DiscoveryOptions& options, int cap) {
    NodeSet scope;
    if (options.scope) {
        scope = make_set(*options.scope);
        for (NodeId v : scope) {
            if (v < 0 || v >= provider.covariate_count()) {
                throw ArgumentError("scope references unknown covariate " + std::to_string(v));
            }
        }
    } else {
        for (NodeId v = 0; v < provider.covariate_count(); ++v) scope.push_back(v);
    }
    if (static_cast<int>(scope.size()) > cap) {
        throw ArgumentError("search scope has " + std::to_string(scope.size()) + " covariates, above the cap of " +
                            std::to_string(cap) + "; pre-select candidates first (e.g. l2_boost_select)");
    }
    return scope;
}

bool mmse_less(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) throw UnsupportedError("this method needs an MMSE functional");
    return a < b - 1e-12 * std::max(1.0, std::abs(b));
}

/// Lexicographic r-combinations of 0..s-1; returns false when exhausted.
bool next_combination(std::vector<int>& pos, int s) {
    const int r = static_cast<int>(pos.size());
    int i = r - 1;
    while (i >= 0 && pos[i] == s - r + i) --i;
    if (i < 0) return false;
    ++pos[i];
    for (int j = i + 1; j < r; ++j) pos[j] = pos[j - 1] + 1;
    return true;
}

template <typename Visit>
void for_each_subset_by_size(int s, int max_size, Visit&& visit) {
    for (int r = 0; r <= std::min(s, max_size); ++r) {
        std::vector<int> pos(r);
        for (int j = 0; j < r; ++j) pos[j] = j;
        do {
            if (!visit(pos)) return;
        } while (next_combination(pos, s));
    }
}

NodeSet gather(const NodeSet& scope, const std::vector<int>& pos) {
    NodeSet out;
    out.reserve(pos.size());
    for (int p : pos) out.push_back(scope[p]);
    return out;
}

std::uint32_t mask_of(const std::vector<int>& pos) {
    std::uint32_t m = 0;
    for (int p : pos) m |= 1u << p;
    return m;
}

/// Enumeration budget for the exhaustive methods.
void check_enumeration_size(int s, int max_size) {
    double total = 0.0;
    double choose = 1.0;
    for (int r = 0; r <= std::min(s, max_size); ++r) {
        total += choose;
        choose = choose * (s - r) / (r + 1);
    }
    if (total > static_cast<double>(1u << 25)) {
        throw ArgumentError("subset enumeration of " + std::to_string(static_cast<long long>(total)) +
                            " sets exceeds the 2^25 budget; narrow the scope");
    }
}

class RunTimer {
public:
    explicit RunTimer(DiscoveryResult& result) : result_(result), start_(std::chrono::steady_clock::now()) {}
    ~RunTimer() { result_.wall_time = std::chrono::steady_clock::now() - start_; }

private:
    DiscoveryResult& result_;
    std::chrono::steady_clock::time_point start_;
};

void finish(DiscoveryResult& result, TestLedger& ledger) {
    result.candidates = ledger.invariant_sets();
    result.invariance_tests_run = ledger.tests();
}

}  // namespace

std::unique_ptr<InvarianceProvider> with_oracle(const OracleContext& ctx) {
    return std::make_unique<OracleProvider>(ctx);
}

std::string to_string(Method m) {
    switch (m) {
        case Method::icp: return "icp";
        case Method::ias: return "ias";
        case Method::mmse_icp: return "mmse_icp";
        case Method::fast_icp: return "fast_icp";
    }
    return "?";
}

Method parse_method(const std::string& text) {
    for (Method m : {Method::icp, Method::ias, Method::mmse_icp, Method::fast_icp}) {
        if (to_string(m) == text) return m;
    }
    throw ArgumentError("unknown method '" + text + "' (expected icp, ias, mmse_icp or fast_icp)");
}

DiscoveryResult icp(const InvarianceProvider& provider, const DiscoveryOptions& options) {
    DiscoveryResult result;
    result.method = Method::icp;
    result.options = options;
    RunTimer timer(result);
    result.scope = resolve_scope(provider, options, options.exhaustive_scope_cap);
    const int s = static_cast<int>(result.scope.size());
    TestLedger ledger(provider);

    std::optional<NodeSet> intersection;
    for_each_subset_by_size(s, s, [&](const std::vector<int>& pos) {
        NodeSet subset = gather(result.scope, pos);
        if (ledger(subset).invariant) {
            intersection = intersection ? set_intersection(*intersection, subset) : subset;
        }
        return true;
    });
    result.no_invariant_set = !intersection;
    result.parents_hat = intersection.value_or(NodeSet{});
    finish(result, ledger);
    return result;
}

DiscoveryResult ias(const InvarianceProvider& provider, const DiscoveryOptions& options) {
    if (options.max_set_size < 0) throw ArgumentError("ias: max_set_size must be non-negative");
    DiscoveryResult result;
    result.method = Method::ias;
    result.options = options;
    RunTimer timer(result);
    const int cap = options.max_set_size <= 1 ? options.fast_scope_cap : options.exhaustive_scope_cap;
    result.scope = resolve_scope(provider, options, cap);
    const int s = static_cast<int>(result.scope.size());
    check_enumeration_size(s, options.max_set_size);
    TestLedger ledger(provider);

    const SubsetEvaluation& empty = ledger({});
    const bool empty_invariant = options.ias_alpha0 ? empty.p_value >= *options.ias_alpha0 : empty.invariant;
    if (empty_invariant) {
        result.final_p_value = empty.p_value;
        finish(result, ledger);
        return result;
    }

    std::vector<NodeSet> minimal;
    for_each_subset_by_size(s, options.max_set_size, [&](const std::vector<int>& pos) {
        if (pos.empty()) return true;
        NodeSet subset = gather(result.scope, pos);
        for (const NodeSet& m : minimal) {
            if (is_subset(m, subset)) return true;  // a proper subset is already invariant
        }
        if (ledger(subset).invariant) minimal.push_back(std::move(subset));
        return true;
    });
    result.no_invariant_set = minimal.empty();
    for (const NodeSet& m : minimal) result.parents_hat = set_union(result.parents_hat, m);
    finish(result, ledger);
    result.candidates.clear();
    for (const NodeSet& m : minimal) {
        const SubsetEvaluation& e = ledger(m);
        result.candidates.push_back({m, e.mmse, e.p_value});
    }
    return result;
}

DiscoveryResult mmse_icp(const InvarianceProvider& provider, const DiscoveryOptions& options) {
    DiscoveryResult result;
    result.method = Method::mmse_icp;
    result.options = options;
    RunTimer timer(result);
    result.scope = resolve_scope(provider, options, options.exhaustive_scope_cap);
    const int s = static_cast<int>(result.scope.size());
    TestLedger ledger(provider);

    const SubsetEvaluation& empty = ledger({});
    if (empty.invariant) {
        result.final_p_value = empty.p_value;
        finish(result, ledger);
        return result;
    }

    std::vector<std::uint32_t> accepted;
    std::optional<Candidate> best;
    for_each_subset_by_size(s, s, [&](const std::vector<int>& pos) {
        if (pos.empty()) return true;
        const std::uint32_t mask = mask_of(pos);
        for (std::uint32_t m : accepted) {
            if ((m & mask) == m) return true;
        }
        NodeSet subset = gather(result.scope, pos);
        const SubsetEvaluation& e = ledger(subset);
        if (e.invariant) {
            accepted.push_back(mask);
            // Enumeration is by cardinality then lexicographic, so ties keep the earlier set.
            if (!best || mmse_less(e.mmse, best->mmse_hat)) best = Candidate{subset, e.mmse, e.p_value};
        }
        return true;
    });
    if (best) {
        result.parents_hat = best->subset;
        result.final_p_value = best->p_value;
    } else {
        result.no_invariant_set = true;
    }
    finish(result, ledger);
    return result;
}

DiscoveryResult fast_icp(const InvarianceProvider& provider, const DiscoveryOptions& options) {
    if (options.max_depth < 1) throw ArgumentError("fast_icp: max_depth must be at least 1");
    DiscoveryResult result;
    result.method = Method::fast_icp;
    result.options = options;
    RunTimer timer(result);
    result.scope = resolve_scope(provider, options, options.fast_scope_cap);
    TestLedger ledger(provider);

    if (ledger({}).invariant) {
        result.final_p_value = ledger({}).p_value;
        finish(result, ledger);
        return result;
    }

    // Stage 1: shrink the full scope until it is invariant, removing up to
    // max_depth covariates per step and following the lowest dependency.
    NodeSet current = result.scope;
    while (!ledger(current).invariant) {
        const int s = static_cast<int>(current.size());
        if (s == 0) {
            result.no_invariant_set = true;
            finish(result, ledger);
            return result;
        }
        std::optional<NodeSet> next;
        double next_dependency = std::numeric_limits<double>::infinity();
        bool found_invariant = false;
        for (int r = 1; r <= std::min(options.max_depth, s) && !found_invariant; ++r) {
            std::vector<int> removed(r);
            for (int j = 0; j < r; ++j) removed[j] = j;
            do {
                NodeSet candidate;
                candidate.reserve(s - r);
                for (int p = 0, q = 0; p < s; ++p) {
                    if (q < r && removed[q] == p) {
                        ++q;
                    } else {
                        candidate.push_back(current[p]);
                    }
                }
                const SubsetEvaluation& e = ledger(candidate);
                const double dependency = 1.0 - e.p_value;
                if (e.invariant) {
                    next = std::move(candidate);
                    found_invariant = true;
                    break;
                }
                if (dependency < next_dependency) {
                    next_dependency = dependency;
                    next = std::move(candidate);
                }
            } while (next_combination(removed, s));
        }
        current = std::move(*next);
    }

    // Stage 2: drop one covariate at a time while some deletion stays invariant.
    while (true) {
        std::optional<NodeSet> best;
        double best_mmse = 0.0;
        for (std::size_t z = 0; z < current.size(); ++z) {
            NodeSet candidate = current;
            candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(z));
            const SubsetEvaluation& e = ledger(candidate);
            if (e.invariant && (!best || mmse_less(e.mmse, best_mmse))) {
                best_mmse = e.mmse;
                best = std::move(candidate);
            }
        }
        if (!best) break;
        current = std::move(*best);
    }
    result.parents_hat = current;
    result.final_p_value = ledger(current).p_value;
    finish(result, ledger);
    return result;
}

DiscoveryResult discover(Method method, const InvarianceProvider& provider, const DiscoveryOptions& options) {
    switch (method) {
        case Method::icp: return icp(provider, options);
        case Method::ias: return ias(provider, options);
        case Method::mmse_icp: return mmse_icp(provider, options);
        case Method::fast_icp: return fast_icp(provider, options);
    }
    throw ArgumentError("unknown method");
}

DiscoveryResult discover(Method method, const Dataset& data, const InvarianceConfig& config, DiscoveryOptions options) {
    StatisticalProvider provider(data, config);
    return discover(method, provider, options);
}

double stat_dependency(const InvarianceProvider& provider, const NodeSet& subset) {
    return 1.0 - provider.evaluate(subset).p_value;
}

double stat_dependency(const Dataset& data, const NodeSet& subset, const InvarianceConfig& config) {
    return 1.0 - is_invariant(data, subset, config).p_value;
}

}  // namespace fasticp
