#include "fasticp/regress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fasticp/rng.hpp"

namespace fasticp {

std::string to_string(ModelKind kind) { return kind == ModelKind::ols ? "ols" : "gbt"; }

ModelKind parse_model_kind(const std::string& text) {
    if (text == "ols") return ModelKind::ols;
    if (text == "gbt") return ModelKind::gbt;
    throw std::invalid_argument("unknown model kind '" + text + "' (expected ols or gbt)");
}

int cv_folds_for(Eigen::Index n) { return n < 500 ? 10 : 2; }

Eigen::VectorXd RegressionModel::predict(const Eigen::MatrixXd& x) const {
    if (const auto* ols = std::get_if<OlsFit>(&state_)) {
        if (x.cols() != ols->coefficients.size()) throw FitError("predict: column count mismatch");
        Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), ols->intercept);
        if (x.cols() > 0) out.noalias() += x * ols->coefficients;
        return out;
    }
    const auto& gbt = std::get<GbtEnsemble>(state_);
    Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), gbt.base);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double acc = 0.0;
        for (const auto& tree : gbt.trees) acc += tree.predict(x.row(i));
        out(i) += gbt.learning_rate * acc;
    }
    return out;
}

RegressionModel fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();
    if (y.size() != n) throw FitError("fit_ols: x and y row counts differ");
    if (n < k + 1) {
        throw FitError("fit_ols: need at least k+1 = " + std::to_string(k + 1) + " samples, got " + std::to_string(n));
    }
    OlsFit fit;
    if (k == 0) {
        fit.coefficients.resize(0);
        fit.intercept = y.mean();
        return RegressionModel(std::move(fit));
    }
    Eigen::MatrixXd design(n, k + 1);
    design.leftCols(k) = x;
    design.col(k).setOnes();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    Eigen::VectorXd beta = cod.solve(y);
    fit.coefficients = beta.head(k);
    fit.intercept = beta(k);
    return RegressionModel(std::move(fit));
}

namespace {

std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int folds, std::uint64_t seed) {
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Rng rng(seed, 0x666f6c6473ULL);
    for (Eigen::Index i = n - 1; i > 0; --i) {
        std::swap(perm[i], perm[rng.uniform_int(0, static_cast<int>(i))]);
    }
    std::vector<std::vector<Eigen::Index>> out(folds);
    for (int f = 0; f < folds; ++f) {
        const Eigen::Index lo = n * f / folds;
        const Eigen::Index hi = n * (f + 1) / folds;
        out[f].assign(perm.begin() + lo, perm.begin() + hi);
        std::sort(out[f].begin(), out[f].end());
    }
    return out;
}

}  // namespace

Eigen::VectorXd residuals_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, ModelKind kind,
                             const GbtConfig& config) {
    const Eigen::Index n = x.rows();
    if (y.size() != n) throw FitError("residuals_cv: x and y row counts differ");
    if (kind == ModelKind::ols) {
        return y - fit_ols(x, y).predict(x);
    }
    const int folds = config.cv_folds > 0 ? config.cv_folds : cv_folds_for(n);
    if (folds < 2) throw FitError("residuals_cv: need at least 2 folds");
    if (n < 2 * folds) {
        throw FitError("residuals_cv: " + std::to_string(n) + " samples is too few for " + std::to_string(folds) +
                       " folds");
    }
    Eigen::VectorXd residuals(n);
    const auto blocks = make_folds(n, folds, config.seed);
    std::vector<char> held(n);
    for (const auto& block : blocks) {
        std::fill(held.begin(), held.end(), 0);
        for (Eigen::Index i : block) held[i] = 1;
        const Eigen::Index n_train = n - static_cast<Eigen::Index>(block.size());
        Eigen::MatrixXd xt(n_train, x.cols());
        Eigen::VectorXd yt(n_train);
        Eigen::MatrixXd xv(static_cast<Eigen::Index>(block.size()), x.cols());
        for (Eigen::Index i = 0, t = 0; i < n; ++i) {
            if (held[i]) continue;
            xt.row(t) = x.row(i);
            yt(t++) = y(i);
        }
        for (std::size_t v = 0; v < block.size(); ++v) xv.row(static_cast<Eigen::Index>(v)) = x.row(block[v]);
        const Eigen::VectorXd pred = fit_gbt(xt, yt, config).predict(xv);
        for (std::size_t v = 0; v < block.size(); ++v) {
            residuals(block[v]) = y(block[v]) - pred(static_cast<Eigen::Index>(v));
        }
    }
    return residuals;
}

OlsSubsetSolver::OlsSubsetSolver(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (y.size() != x.rows()) throw FitError("OlsSubsetSolver: x and y row counts differ");
    centered_x_ = x.rowwise() - x.colwise().mean();
    centered_y_ = y.array() - y.mean();
    gram_ = centered_x_.transpose() * centered_x_;
    xty_ = centered_x_.transpose() * centered_y_;
}

Eigen::VectorXd OlsSubsetSolver::residuals(const std::vector<int>& columns) const {
    const auto k = static_cast<Eigen::Index>(columns.size());
    if (centered_x_.rows() < k + 1) {
        throw FitError("ols: need at least k+1 = " + std::to_string(k + 1) + " samples");
    }
    Eigen::VectorXd r = centered_y_;
    if (k == 0) return r;
    Eigen::MatrixXd g(k, k);
    Eigen::VectorXd b(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        b(a) = xty_(columns[a]);
        for (Eigen::Index c = 0; c < k; ++c) g(a, c) = gram_(columns[a], columns[c]);
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(g);
    const Eigen::VectorXd beta = cod.solve(b);
    for (Eigen::Index a = 0; a < k; ++a) r.noalias() -= beta(a) * centered_x_.col(columns[a]);
    return r;
}

std::vector<int> l2_boost_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k,
                                 const L2BoostConfig& config) {
    if (k < 1) throw std::invalid_argument("l2_boost_select: k must be at least 1");
    const Eigen::Index n = x.rows();
    const int d = static_cast<int>(x.cols());
    if (y.size() != n) throw FitError("l2_boost_select: x and y row counts differ");
    std::vector<int> selected;
    if (d <= k) {
        selected.resize(d);
        std::iota(selected.begin(), selected.end(), 0);
        return selected;
    }
    Eigen::MatrixXd z = x.rowwise() - x.colwise().mean();
    std::vector<char> usable(d, 0);
    for (int j = 0; j < d; ++j) {
        const double sd = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n));
        if (sd > 0.0) {
            z.col(j) /= sd;
            usable[j] = 1;
        }
    }
    Eigen::VectorXd r = y.array() - y.mean();
    std::vector<char> chosen(d, 0);
    for (int it = 0; it < config.max_iterations && static_cast<int>(selected.size()) < k; ++it) {
        const Eigen::VectorXd corr = z.transpose() * r / static_cast<double>(n);
        int best = -1;
        for (int j = 0; j < d; ++j) {
            if (usable[j] && (best < 0 || std::abs(corr(j)) > std::abs(corr(best)))) best = j;
        }
        if (best < 0 || corr(best) == 0.0) break;
        r.noalias() -= config.nu * corr(best) * z.col(best);
        if (!chosen[best]) {
            chosen[best] = 1;
            selected.push_back(best);
        }
    }
    return selected;
}

}  // namespace fasticp
