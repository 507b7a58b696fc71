// Histogram-based gradient boosting for squared loss. Features are bucketed
// once per fit into at most max_bins quantile bins; split search scans the
// per-node histograms.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fasticp/regress.hpp"

namespace fasticp {

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int at = 0;
    while (nodes[at].feature >= 0) {
        const Node& node = nodes[at];
        at = row(node.feature) <= node.threshold ? node.left : node.right;
    }
    return nodes[at].value;
}

namespace {

struct BinnedFeature {
    std::vector<double> thresholds;  // bin b holds values <= thresholds[b]
    std::vector<std::uint8_t> bins;  // per sample
};

BinnedFeature bin_feature(const Eigen::Ref<const Eigen::VectorXd>& col, int max_bins) {
    const Eigen::Index n = col.size();
    std::vector<double> sorted(col.data(), col.data() + n);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> uniq = sorted;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

    BinnedFeature out;
    if (static_cast<int>(uniq.size()) <= max_bins) {
        for (std::size_t i = 0; i + 1 < uniq.size(); ++i) out.thresholds.push_back(0.5 * (uniq[i] + uniq[i + 1]));
    } else {
        for (int b = 1; b < max_bins; ++b) {
            const double q = sorted[static_cast<std::size_t>(static_cast<double>(b) * n / max_bins)];
            if (q < sorted.back() && (out.thresholds.empty() || q > out.thresholds.back())) out.thresholds.push_back(q);
        }
    }
    out.bins.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.bins[i] = static_cast<std::uint8_t>(
            std::lower_bound(out.thresholds.begin(), out.thresholds.end(), col(i)) - out.thresholds.begin());
    }
    return out;
}

class TreeBuilder {
public:
    TreeBuilder(const std::vector<BinnedFeature>& features, const GbtConfig& config)
        : features_(features), config_(config) {
        for (const auto& f : features_) max_bins_ = std::max(max_bins_, static_cast<int>(f.thresholds.size()) + 1);
        sum_.resize(max_bins_);
        count_.resize(max_bins_);
    }

    // Fits one tree to `residual` and adds learning_rate * leaf value to `pred`.
    RegressionTree build(const std::vector<double>& residual, std::vector<double>& pred) {
        RegressionTree tree;
        std::vector<int> idx(residual.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        grow(tree, idx, 0, residual, pred);
        return tree;
    }

private:
    int grow(RegressionTree& tree, std::vector<int>& idx, int depth, const std::vector<double>& residual,
             std::vector<double>& pred) {
        const int at = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        double total = 0.0;
        for (int i : idx) total += residual[i];
        const double n = static_cast<double>(idx.size());

        int best_feature = -1;
        int best_bin = -1;
        double best_gain = 1e-12 * (1.0 + total * total / n);
        const int min_leaf = std::max(1, config_.min_samples_leaf);
        if (depth < config_.max_depth && static_cast<int>(idx.size()) >= 2 * min_leaf) {
            for (std::size_t f = 0; f < features_.size(); ++f) {
                const auto& bins = features_[f].bins;
                const int nb = static_cast<int>(features_[f].thresholds.size()) + 1;
                if (nb < 2) continue;
                std::fill(sum_.begin(), sum_.begin() + nb, 0.0);
                std::fill(count_.begin(), count_.begin() + nb, 0);
                for (int i : idx) {
                    sum_[bins[i]] += residual[i];
                    ++count_[bins[i]];
                }
                double left_sum = 0.0;
                int left_n = 0;
                const double parent_score = total * total / n;
                for (int b = 0; b + 1 < nb; ++b) {
                    left_sum += sum_[b];
                    left_n += count_[b];
                    const int right_n = static_cast<int>(idx.size()) - left_n;
                    if (left_n < min_leaf) continue;
                    if (right_n < min_leaf) break;
                    const double right_sum = total - left_sum;
                    const double gain = left_sum * left_sum / left_n + right_sum * right_sum / right_n - parent_score;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = static_cast<int>(f);
                        best_bin = b;
                    }
                }
            }
        }

        if (best_feature < 0) {
            const double value = total / n;
            tree.nodes[at].value = value;
            for (int i : idx) pred[i] += config_.learning_rate * value;
            return at;
        }

        const auto& bins = features_[best_feature].bins;
        std::vector<int> left;
        std::vector<int> right;
        for (int i : idx) (bins[i] <= best_bin ? left : right).push_back(i);
        idx.clear();
        idx.shrink_to_fit();
        tree.nodes[at].feature = best_feature;
        tree.nodes[at].threshold = features_[best_feature].thresholds[best_bin];
        const int l = grow(tree, left, depth + 1, residual, pred);
        const int r = grow(tree, right, depth + 1, residual, pred);
        tree.nodes[at].left = l;
        tree.nodes[at].right = r;
        return at;
    }

    const std::vector<BinnedFeature>& features_;
    const GbtConfig& config_;
    int max_bins_ = 1;
    std::vector<double> sum_;
    std::vector<int> count_;
};

}  // namespace

RegressionModel fit_gbt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtConfig& config) {
    const Eigen::Index n = x.rows();
    if (y.size() != n) throw FitError("fit_gbt: x and y row counts differ");
    if (n < 1) throw FitError("fit_gbt: no samples");
    if (config.n_trees < 1 || config.max_depth < 1) throw FitError("fit_gbt: n_trees and max_depth must be positive");
    if (!(config.learning_rate > 0.0 && config.learning_rate <= 1.0)) {
        throw FitError("fit_gbt: learning rate must lie in (0, 1]");
    }
    if (config.max_bins < 2 || config.max_bins > 256) throw FitError("fit_gbt: max_bins must lie in [2, 256]");

    GbtEnsemble model;
    model.base = y.mean();
    model.learning_rate = config.learning_rate;
    if (x.cols() == 0) return RegressionModel(std::move(model));

    std::vector<BinnedFeature> features;
    features.reserve(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) features.push_back(bin_feature(x.col(j), config.max_bins));

    std::vector<double> pred(static_cast<std::size_t>(n), model.base);
    std::vector<double> residual(static_cast<std::size_t>(n));
    TreeBuilder builder(features, config);
    for (int t = 0; t < config.n_trees; ++t) {
        for (Eigen::Index i = 0; i < n; ++i) residual[i] = y(i) - pred[i];
        model.trees.push_back(builder.build(residual, pred));
    }
    return RegressionModel(std::move(model));
}

}  // namespace fasticp
