#pragma once

#include <map>
#include <string>
#include <set>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fasticp/graphs.hpp"
#include "fasticp/rng.hpp"

namespace fasticp {

enum class ReferenceKind { PA, S_star };

std::string to_string(ReferenceKind kind);

struct ScoreReport {
    double jaccard = 1.0;
    double f1 = 1.0;
    double recall = 1.0;
    ReferenceKind reference_kind = ReferenceKind::PA;
    NodeSet predicted;
    NodeSet reference;
};

/// PA(Y) or DE(E) ∩ PA(Y).
NodeSet reference_set(const Dag& dag, ReferenceKind kind);

/// Set-overlap metrics; both-empty scores 1 and an empty reference gives recall 1.
ScoreReport score_sets(const NodeSet& predicted, const NodeSet& reference);
ScoreReport score(const NodeSet& predicted, const Dag& dag, ReferenceKind kind);

class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CvFold {
    std::vector<int> inference;   // the other two folds
    std::vector<int> validation;  // this fold
};

struct CvPlan {
    std::vector<std::vector<int>> folds;  // 3 partitions of the retained samples
    std::vector<CvFold> splits;
    NodeId held_out_target = -1;
    std::vector<int> excluded_samples;
};

/// Leave-intervention-out plan for one candidate parent.
CvPlan build_cv_plan(const std::map<int, NodeId>& intervened_on, NodeId candidate,
                     const std::set<int>& target_interventions, Rng rng);

struct Prediction {
    NodeId target = 0;
    NodeId candidate = 0;
    double confidence = 0.0;
};

/// Descending confidence; ties by (target, candidate).
std::vector<Prediction> rank_predictions(std::vector<Prediction> results);

/// Fraction of true predictions among the first k for k = 1..ranked.size().
std::vector<double> precision_at_k(const std::vector<Prediction>& ranked,
                                   const std::set<std::pair<NodeId, NodeId>>& truths);

/// Marks cell (i, j) when interventional sample i puts variable j in the
/// lower or upper `tail` quantile of its observational distribution.
std::vector<std::vector<bool>> label_tail_effects(const Eigen::MatrixXd& observational,
                                                  const Eigen::MatrixXd& interventional, double tail = 0.01);

}  // namespace fasticp
