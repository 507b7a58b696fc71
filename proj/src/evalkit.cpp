#include "fasticp/evalkit.hpp"

#include <algorithm>
#include <cmath>

namespace fasticp {

std::string to_string(ReferenceKind kind) { return kind == ReferenceKind::PA ? "PA" : "S_star"; }

NodeSet reference_set(const Dag& dag, ReferenceKind kind) {
    const NodeSet pa = dag.parents(dag.target());
    if (kind == ReferenceKind::PA) return pa;
    return set_intersection(relatives(dag, dag.environment(), Relation::DE), pa);
}

ScoreReport score_sets(const NodeSet& predicted, const NodeSet& reference) {
    ScoreReport r;
    r.predicted = make_set(predicted);
    r.reference = make_set(reference);
    const double hit = static_cast<double>(set_intersection(r.predicted, r.reference).size());
    const double p = static_cast<double>(r.predicted.size());
    const double q = static_cast<double>(r.reference.size());
    const double uni = p + q - hit;
    r.jaccard = uni == 0.0 ? 1.0 : hit / uni;
    r.f1 = p + q == 0.0 ? 1.0 : 2.0 * hit / (p + q);
    r.recall = q == 0.0 ? 1.0 : hit / q;
    return r;
}

ScoreReport score(const NodeSet& predicted, const Dag& dag, ReferenceKind kind) {
    ScoreReport r = score_sets(predicted, reference_set(dag, kind));
    r.reference_kind = kind;
    return r;
}

CvPlan build_cv_plan(const std::map<int, NodeId>& intervened_on, NodeId candidate,
                     const std::set<int>& target_interventions, Rng rng) {
    CvPlan plan;
    plan.held_out_target = candidate;
    std::vector<int> retained;
    for (const auto& [index, node] : intervened_on) {
        if (node == candidate || target_interventions.count(index)) {
            plan.excluded_samples.push_back(index);
        } else {
            retained.push_back(index);
        }
    }
    for (int index : target_interventions) {
        if (!intervened_on.count(index)) plan.excluded_samples.push_back(index);
    }
    std::sort(plan.excluded_samples.begin(), plan.excluded_samples.end());
    if (retained.size() < 3) {
        throw PlanError("cv plan: " + std::to_string(retained.size()) + " retained samples, need at least 3");
    }
    for (int i = static_cast<int>(retained.size()) - 1; i > 0; --i) {
        std::swap(retained[i], retained[rng.uniform_int(0, i)]);
    }
    plan.folds.resize(3);
    const std::size_t n = retained.size();
    for (std::size_t f = 0; f < 3; ++f) {
        plan.folds[f].assign(retained.begin() + static_cast<std::ptrdiff_t>(f * n / 3),
                             retained.begin() + static_cast<std::ptrdiff_t>((f + 1) * n / 3));
    }
    for (std::size_t f = 0; f < 3; ++f) {
        CvFold split;
        split.validation = plan.folds[f];
        for (std::size_t g = 0; g < 3; ++g) {
            if (g != f) split.inference.insert(split.inference.end(), plan.folds[g].begin(), plan.folds[g].end());
        }
        plan.splits.push_back(std::move(split));
    }
    return plan;
}

std::vector<Prediction> rank_predictions(std::vector<Prediction> results) {
    for (const Prediction& p : results) {
        if (!std::isfinite(p.confidence)) throw ArgumentError("rank_predictions: confidence must be finite");
    }
    std::sort(results.begin(), results.end(), [](const Prediction& a, const Prediction& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.target != b.target) return a.target < b.target;
        return a.candidate < b.candidate;
    });
    return results;
}

std::vector<double> precision_at_k(const std::vector<Prediction>& ranked,
                                   const std::set<std::pair<NodeId, NodeId>>& truths) {
    std::vector<double> out;
    out.reserve(ranked.size());
    int hits = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        hits += truths.count({ranked[k].target, ranked[k].candidate}) ? 1 : 0;
        out.push_back(static_cast<double>(hits) / static_cast<double>(k + 1));
    }
    return out;
}

std::vector<std::vector<bool>> label_tail_effects(const Eigen::MatrixXd& observational,
                                                  const Eigen::MatrixXd& interventional, double tail) {
    if (observational.cols() != interventional.cols()) {
        throw ArgumentError("label_tail_effects: column counts differ");
    }
    if (observational.rows() < 1) throw ArgumentError("label_tail_effects: no observational samples");
    if (!(tail > 0.0 && tail < 0.5)) throw ArgumentError("label_tail_effects: tail must lie in (0, 0.5)");
    const Eigen::Index p = observational.cols();
    std::vector<double> lo(p), hi(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        std::vector<double> v(observational.col(j).data(), observational.col(j).data() + observational.rows());
        std::sort(v.begin(), v.end());
        // Nearest-rank empirical quantiles.
        const auto rank = [&](double q) {
            const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
            return v[std::min(v.size() - 1, k == 0 ? 0 : k - 1)];
        };
        lo[j] = rank(tail);
        hi[j] = rank(1.0 - tail);
    }
    std::vector<std::vector<bool>> out(static_cast<std::size_t>(interventional.rows()), std::vector<bool>(p));
    for (Eigen::Index i = 0; i < interventional.rows(); ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            const double x = interventional(i, j);
            out[i][j] = x < lo[j] || x > hi[j];
        }
    }
    return out;
}

}  // namespace fasticp
