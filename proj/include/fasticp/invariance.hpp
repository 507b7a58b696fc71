#pragma once

#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fasticp/dataset.hpp"
#include "fasticp/graphs.hpp"
#include "fasticp/regress.hpp"

namespace fasticp {

/// Two-sided Welch t-test p-value. Both groups constant: 1 if the means agree, else 0.
double welch_t_test(std::span<const double> a, std::span<const double> b);

enum class LeveneCenter { mean, median };

/// Levene test for equal variances: one-way ANOVA F-test on |x - center|.
double levene_test(std::span<const double> a, std::span<const double> b, LeveneCenter center = LeveneCenter::mean);

struct InvarianceConfig {
    double alpha = 0.05;
    ModelKind model = ModelKind::ols;
    GbtConfig gbt;
    /// Multiply the smallest per-environment p-value by the number of environments.
    bool bonferroni_envs = true;
    LeveneCenter levene_center = LeveneCenter::mean;
};

struct InvarianceVerdict {
    double p_value = 1.0;  // corrected, in [0, 1]
    bool invariant = true;
    double mmse_hat = 0.0;
    std::map<int, double> per_env_p;
};

/// Environment-vs-rest residual tests on already computed residuals.
InvarianceVerdict residual_invariance(const std::vector<int>& env, const Eigen::VectorXd& residuals,
                                      const InvarianceConfig& config);

/// Fits Y on the subset over pooled data and tests whether the residual
/// mean and variance differ across environments.
InvarianceVerdict is_invariant(const Dataset& data, const NodeSet& subset, const InvarianceConfig& config);

/// Column gather helper shared by the callers of the regression engines.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const NodeSet& columns);

}  // namespace fasticp
