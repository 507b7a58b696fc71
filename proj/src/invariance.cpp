#include "fasticp/invariance.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>

namespace fasticp {

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // unbiased
    double n = 0.0;
};

Moments moments(std::span<const double> v) {
    Moments m;
    m.n = static_cast<double>(v.size());
    for (double x : v) m.mean += x;
    m.mean /= m.n;
    for (double x : v) m.var += (x - m.mean) * (x - m.mean);
    m.var /= (m.n - 1.0);
    return m;
}

void require_two(std::span<const double> a, std::span<const double> b, const char* who) {
    if (a.size() < 2 || b.size() < 2) {
        throw ArgumentError(std::string(who) + ": each group needs at least 2 samples");
    }
}

double median_of(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const std::size_t h = s.size() / 2;
    return s.size() % 2 ? s[h] : 0.5 * (s[h - 1] + s[h]);
}

}  // namespace

double welch_t_test(std::span<const double> a, std::span<const double> b) {
    require_two(a, b, "welch_t_test");
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    const double va = ma.var / ma.n;
    const double vb = mb.var / mb.n;
    const double se2 = va + vb;
    if (!(se2 > 0.0)) return ma.mean == mb.mean ? 1.0 : 0.0;
    const double t = (ma.mean - mb.mean) / std::sqrt(se2);
    const double df = se2 * se2 / (va * va / (ma.n - 1.0) + vb * vb / (mb.n - 1.0));
    // Two-sided tail of Student t: I_{df/(df+t^2)}(df/2, 1/2).
    const double p = boost::math::ibeta(0.5 * df, 0.5, df / (df + t * t));
    return std::clamp(p, 0.0, 1.0);
}

double levene_test(std::span<const double> a, std::span<const double> b, LeveneCenter center) {
    require_two(a, b, "levene_test");
    auto deviations = [center](std::span<const double> v) {
        const double c = center == LeveneCenter::mean ? moments(v).mean : median_of(v);
        std::vector<double> z(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) z[i] = std::abs(v[i] - c);
        return z;
    };
    const std::vector<double> za = deviations(a);
    const std::vector<double> zb = deviations(b);
    const Moments ma = moments(za);
    const Moments mb = moments(zb);
    const double n = ma.n + mb.n;
    const double grand = (ma.n * ma.mean + mb.n * mb.mean) / n;
    const double between = ma.n * (ma.mean - grand) * (ma.mean - grand) + mb.n * (mb.mean - grand) * (mb.mean - grand);
    const double within = (ma.n - 1.0) * ma.var + (mb.n - 1.0) * mb.var;
    if (!(within > 0.0)) return between > 0.0 ? 0.0 : 1.0;
    const double d1 = 1.0;
    const double d2 = n - 2.0;
    const double f = (between / d1) / (within / d2);
    // Upper tail of F(d1, d2): I_{d2/(d2+d1 f)}(d2/2, d1/2).
    const double p = boost::math::ibeta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
    return std::clamp(p, 0.0, 1.0);
}

InvarianceVerdict residual_invariance(const std::vector<int>& env, const Eigen::VectorXd& residuals,
                                      const InvarianceConfig& config) {
    if (static_cast<Eigen::Index>(env.size()) != residuals.size()) {
        throw ArgumentError("invariance test: env and residual lengths differ");
    }
    std::vector<int> labels = env;
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (labels.size() < 2) throw ArgumentError("invariance test needs at least 2 environments");

    InvarianceVerdict verdict;
    verdict.mmse_hat = residuals.squaredNorm() / static_cast<double>(residuals.size());
    double smallest = 1.0;
    std::vector<double> in_group;
    std::vector<double> out_group;
    for (int label : labels) {
        in_group.clear();
        out_group.clear();
        for (std::size_t i = 0; i < env.size(); ++i) {
            (env[i] == label ? in_group : out_group).push_back(residuals(static_cast<Eigen::Index>(i)));
        }
        if (in_group.size() < 2) {
            throw ArgumentError("invariance test: environment " + std::to_string(label) + " has fewer than 2 samples");
        }
        const double p_mean = welch_t_test(in_group, out_group);
        const double p_var = levene_test(in_group, out_group, config.levene_center);
        const double p = std::min(1.0, 2.0 * std::min(p_mean, p_var));
        verdict.per_env_p[label] = p;
        smallest = std::min(smallest, p);
    }
    const double factor = config.bonferroni_envs ? static_cast<double>(labels.size()) : 1.0;
    verdict.p_value = std::min(1.0, smallest * factor);
    verdict.invariant = verdict.p_value >= config.alpha;
    return verdict;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const NodeSet& columns) {
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] < 0 || columns[j] >= x.cols()) {
            throw ArgumentError("subset references unknown covariate " + std::to_string(columns[j]));
        }
        out.col(static_cast<Eigen::Index>(j)) = x.col(columns[j]);
    }
    return out;
}

InvarianceVerdict is_invariant(const Dataset& data, const NodeSet& subset, const InvarianceConfig& config) {
    data.validate();
    const Eigen::VectorXd residuals = residuals_cv(select_columns(data.x, subset), data.y, config.model, config.gbt);
    return residual_invariance(data.env, residuals, config);
}

}  // namespace fasticp
