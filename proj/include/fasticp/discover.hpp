#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fasticp/dataset.hpp"
#include "fasticp/graphs.hpp"
#include "fasticp/invariance.hpp"
#include "fasticp/regress.hpp"
#include "fasticp/scm.hpp"

namespace fasticp {

struct SubsetEvaluation {
    double p_value = 1.0;
    bool invariant = true;
    double mmse = 0.0;  // NaN when the provider has no MMSE functional
};

/// Invariance predicate plus MMSE functional over covariate subsets.
/// Implementations must tolerate concurrent `evaluate` calls.
class InvarianceProvider {
public:
    virtual ~InvarianceProvider() = default;
    virtual SubsetEvaluation evaluate(const NodeSet& subset) const = 0;
    virtual int covariate_count() const = 0;
};

/// Residual-based test on a dataset (OLS or GBT residuals).
class StatisticalProvider final : public InvarianceProvider {
public:
    StatisticalProvider(const Dataset& data, InvarianceConfig config);

    SubsetEvaluation evaluate(const NodeSet& subset) const override;
    int covariate_count() const override { return data_.covariate_count(); }

    InvarianceVerdict verdict(const NodeSet& subset) const;
    const InvarianceConfig& config() const { return config_; }

private:
    const Dataset& data_;
    InvarianceConfig config_;
    std::optional<OlsSubsetSolver> ols_;
};

/// Ground truth for exact runs: d-separation in place of the test and,
/// optionally, the population MMSE of a linear SCM. Invariant sets get p = 1;
/// the others get 0.5 / (1 + number of open E-Y paths), which gives the
/// fast_icp search a dependency ordering.
class OracleContext {
public:
    static OracleContext from_scm(const Scm& scm, bool use_population_mmse = true);
    static OracleContext from_ground_truth(const GroundTruth& truth);

    const Dag& dag() const { return dag_; }
    const std::optional<Scm>& scm() const { return scm_; }
    bool use_population_mmse() const { return use_population_mmse_; }

private:
    OracleContext() = default;
    Dag dag_;
    std::optional<Scm> scm_;
    bool use_population_mmse_ = false;
};

/// Throws UnsupportedError when population MMSE is requested for a nonlinear SCM.
std::unique_ptr<InvarianceProvider> with_oracle(const OracleContext& ctx);

enum class Method { icp, ias, mmse_icp, fast_icp };

std::string to_string(Method m);
Method parse_method(const std::string& text);

struct DiscoveryOptions {
    std::optional<NodeSet> scope;  // defaults to every covariate
    int max_depth = 2;             // fast_icp
    int max_set_size = 1;          // ias
    /// Level for the IAS empty-set test; unset means the provider's own verdict.
    std::optional<double> ias_alpha0;
    int exhaustive_scope_cap = 25;
    int fast_scope_cap = 100;
};

struct Candidate {
    NodeSet subset;
    double mmse_hat = 0.0;
    double p_value = 1.0;
};

struct DiscoveryResult {
    Method method = Method::icp;
    NodeSet parents_hat;
    NodeSet scope;
    std::vector<Candidate> candidates;  // every subset judged invariant, in test order
    long invariance_tests_run = 0;
    std::chrono::duration<double> wall_time{0};
    bool no_invariant_set = false;
    std::optional<double> final_p_value;
    DiscoveryOptions options;
};

DiscoveryResult icp(const InvarianceProvider& provider, const DiscoveryOptions& options = {});
DiscoveryResult ias(const InvarianceProvider& provider, const DiscoveryOptions& options = {});
DiscoveryResult mmse_icp(const InvarianceProvider& provider, const DiscoveryOptions& options = {});
DiscoveryResult fast_icp(const InvarianceProvider& provider, const DiscoveryOptions& options = {});
DiscoveryResult discover(Method method, const InvarianceProvider& provider, const DiscoveryOptions& options = {});

/// Dataset entry point; builds a StatisticalProvider from `config`.
DiscoveryResult discover(Method method, const Dataset& data, const InvarianceConfig& config,
                         DiscoveryOptions options = {});

/// 1 - corrected p-value; lower means more plausibly invariant.
double stat_dependency(const InvarianceProvider& provider, const NodeSet& subset);
double stat_dependency(const Dataset& data, const NodeSet& subset, const InvarianceConfig& config);

}  // namespace fasticp
