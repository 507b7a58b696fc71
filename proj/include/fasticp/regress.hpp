#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace fasticp {

enum class ModelKind { ols, gbt };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gradient-boosted regression trees with squared loss.
struct GbtConfig {
    int n_trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int max_bins = 64;
    int min_samples_leaf = 5;
    /// 0 means "derive from n": 10 folds below 500 samples, 2 otherwise.
    int cv_folds = 0;
    std::uint64_t seed = 0;  // fold shuffle
};

/// Number of out-of-fold splits used for n samples.
int cv_folds_for(Eigen::Index n);

struct OlsFit {
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
};

struct RegressionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    std::vector<Node> nodes;

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

struct GbtEnsemble {
    double base = 0.0;
    double learning_rate = 0.1;
    std::vector<RegressionTree> trees;
};

class RegressionModel {
public:
    explicit RegressionModel(OlsFit fit) : state_(std::move(fit)) {}
    explicit RegressionModel(GbtEnsemble fit) : state_(std::move(fit)) {}

    ModelKind kind() const { return std::holds_alternative<OlsFit>(state_) ? ModelKind::ols : ModelKind::gbt; }
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

    const OlsFit& ols() const { return std::get<OlsFit>(state_); }
    const GbtEnsemble& gbt() const { return std::get<GbtEnsemble>(state_); }

private:
    std::variant<OlsFit, GbtEnsemble> state_;
};

/// Least squares with intercept; rank-deficient designs get the minimum-norm
/// solution over (coefficients, intercept). Needs n >= k + 1.
RegressionModel fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

RegressionModel fit_gbt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtConfig& config);

/// OLS: in-sample residuals. GBT: out-of-fold residuals over contiguous blocks
/// of a seeded shuffle. Output is aligned with the input rows.
Eigen::VectorXd residuals_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, ModelKind kind,
                             const GbtConfig& config);

/**
 * Cached cross-products for repeated OLS fits on column subsets of one design.
 *
 * Centered Gram matrix and X'y are formed once; each subset then costs a
 * k x k solve plus one pass over the rows for residuals. Residuals equal
 * those of fit_ols on the same columns up to rounding.
 */
class OlsSubsetSolver {
public:
    OlsSubsetSolver(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

    /// In-sample residuals of the regression of y on the given columns.
    Eigen::VectorXd residuals(const std::vector<int>& columns) const;

private:
    Eigen::MatrixXd centered_x_;
    Eigen::VectorXd centered_y_;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd xty_;
};

struct L2BoostConfig {
    int max_iterations = 500;
    double nu = 0.1;
};

/// Componentwise L2-boosting; returns up to k covariate ids in first-selection order.
std::vector<int> l2_boost_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k,
                                 const L2BoostConfig& config = {});

}  // namespace fasticp
