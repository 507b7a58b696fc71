#include <catch_amalgamated.hpp>

#include <algorithm>

#include "fasticp/regress.hpp"
#include "fasticp/rng.hpp"

using namespace fasticp;
using Catch::Approx;

namespace {

Eigen::MatrixXd normal_matrix(Eigen::Index n, Eigen::Index k, Rng& rng) {
    Eigen::MatrixXd x(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) x(i, j) = rng.normal();
    }
    return x;
}

Eigen::VectorXd normal_vector(Eigen::Index n, Rng& rng) { return normal_matrix(n, 1, rng).col(0); }

}  // namespace

TEST_CASE("ols recovers an exact line", "[regress]") {
    Eigen::MatrixXd x(5, 1);
    x << 0, 1, 2, 3, 4;
    const Eigen::VectorXd y = (2.0 * x.col(0)).array() + 3.0;
    const RegressionModel m = fit_ols(x, y);
    CHECK(m.ols().coefficients(0) == Approx(2.0).margin(1e-10));
    CHECK(m.ols().intercept == Approx(3.0).margin(1e-10));
}

TEST_CASE("ols with no columns predicts the mean", "[regress]") {
    const Eigen::MatrixXd x(4, 0);
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 6;
    const Eigen::VectorXd pred = fit_ols(x, y).predict(x);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(pred(i) == Approx(3.0).margin(1e-12));
}

TEST_CASE("ols matches a normal-equation solve", "[regress]") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd x = normal_matrix(5, 3, rng);
        const Eigen::VectorXd y = normal_vector(5, rng);
        Eigen::MatrixXd a(5, 4);
        a << x, Eigen::VectorXd::Ones(5);
        const Eigen::VectorXd beta = (a.transpose() * a).inverse() * (a.transpose() * y);
        const RegressionModel m = fit_ols(x, y);
        for (int j = 0; j < 3; ++j) CHECK(m.ols().coefficients(j) == Approx(beta(j)).margin(1e-8));
        CHECK(m.ols().intercept == Approx(beta(3)).margin(1e-8));
    }
}

TEST_CASE("ols residuals satisfy the normal equations", "[regress]") {
    Rng rng(32);
    const Eigen::MatrixXd x = normal_matrix(300, 4, rng);
    const Eigen::VectorXd y = x * Eigen::Vector4d(1, -2, 0.5, 0) + normal_vector(300, rng);
    const Eigen::VectorXd r = residuals_cv(x, y, ModelKind::ols, GbtConfig{});
    CHECK(std::abs(r.sum()) < 1e-8);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(x.col(j).dot(r)) < 1e-8);
}

TEST_CASE("adding a column never raises the in-sample residual", "[regress]") {
    Rng rng(33);
    const Eigen::MatrixXd x = normal_matrix(200, 5, rng);
    const Eigen::VectorXd y = x.col(0) + 0.3 * x.col(2) + normal_vector(200, rng);
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 5; ++k) {
        const Eigen::MatrixXd sub = x.leftCols(k);
        const Eigen::VectorXd r = y - fit_ols(sub, y).predict(sub);
        const double mse = r.squaredNorm() / 200.0;
        CHECK(mse <= previous + 1e-12);
        previous = mse;
    }
}

TEST_CASE("rank-deficient designs get a finite fit", "[regress]") {
    Rng rng(34);
    Eigen::MatrixXd x = normal_matrix(50, 2, rng);
    x.col(1) = x.col(0);
    const Eigen::VectorXd y = 2.0 * x.col(0) + 0.1 * normal_vector(50, rng);
    const RegressionModel m = fit_ols(x, y);
    CHECK(m.ols().coefficients.allFinite());
    CHECK(m.ols().coefficients(0) == Approx(m.ols().coefficients(1)).margin(1e-8));
}

TEST_CASE("ols needs k + 1 samples", "[regress]") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(fit_ols(x, Eigen::VectorXd::Zero(2)), FitError);
}

TEST_CASE("subset solver agrees with fit_ols", "[regress]") {
    Rng rng(35);
    const Eigen::MatrixXd x = normal_matrix(120, 5, rng);
    const Eigen::VectorXd y = x.col(1) - x.col(3) + normal_vector(120, rng);
    const OlsSubsetSolver solver(x, y);
    for (unsigned mask = 0; mask < 32; ++mask) {
        std::vector<int> cols;
        for (int j = 0; j < 5; ++j) {
            if (mask >> j & 1u) cols.push_back(j);
        }
        Eigen::MatrixXd sub(120, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
        const Eigen::VectorXd expected = y - fit_ols(sub, y).predict(sub);
        CHECK((solver.residuals(cols) - expected).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("constant target leaves zero residuals", "[regress]") {
    Rng rng(36);
    const Eigen::MatrixXd x = normal_matrix(40, 2, rng);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(40, 7.0);
    CHECK(residuals_cv(x, y, ModelKind::ols, GbtConfig{}).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fold count follows the sample size", "[regress]") {
    CHECK(cv_folds_for(400) == 10);
    CHECK(cv_folds_for(600) == 2);
}

TEST_CASE("boosted trees fit a step function out of fold", "[regress]") {
    Rng rng(37);
    const Eigen::MatrixXd x = normal_matrix(600, 2, rng);
    Eigen::VectorXd y(600);
    for (Eigen::Index i = 0; i < 600; ++i) y(i) = (x(i, 0) > 0.0 ? 2.0 : -2.0) + 0.1 * rng.normal();
    const Eigen::VectorXd gbt = residuals_cv(x, y, ModelKind::gbt, GbtConfig{});
    const Eigen::VectorXd ols = residuals_cv(x, y, ModelKind::ols, GbtConfig{});
    CHECK(gbt.squaredNorm() < 0.25 * ols.squaredNorm());

    GbtConfig config;
    const RegressionModel m = fit_gbt(x, y, config);
    CHECK(m.kind() == ModelKind::gbt);
    CHECK(m.gbt().trees.size() == 100);
    // Same seed, same folds, same residuals.
    CHECK(residuals_cv(x, y, ModelKind::gbt, config) == gbt);
}

TEST_CASE("too few samples per fold is a fit error", "[regress]") {
    GbtConfig config;
    config.cv_folds = 10;
    const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(12, 1);
    CHECK_THROWS_AS(residuals_cv(x, Eigen::VectorXd::Zero(12), ModelKind::gbt, config), FitError);
}

TEST_CASE("l2 boosting picks the dominant covariate first", "[regress]") {
    Rng rng(38);
    const Eigen::MatrixXd x = normal_matrix(500, 8, rng);
    const Eigen::VectorXd y = 5.0 * x.col(3) + normal_vector(500, rng);
    const std::vector<int> picked = l2_boost_select(x, y, 4);
    REQUIRE_FALSE(picked.empty());
    CHECK(picked.front() == 3);
    CHECK(picked.size() <= 4);

    const std::vector<int> all = l2_boost_select(x.leftCols(3), y, 5);
    CHECK(std::is_permutation(all.begin(), all.end(), std::vector<int>{0, 1, 2}.begin()));
}

TEST_CASE("model kind names round trip", "[regress]") {
    CHECK(parse_model_kind("ols") == ModelKind::ols);
    CHECK(parse_model_kind(to_string(ModelKind::gbt)) == ModelKind::gbt);
    CHECK_THROWS(parse_model_kind("svm"));
}
