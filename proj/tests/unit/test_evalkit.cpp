#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "fasticp/evalkit.hpp"

using namespace fasticp;
using Catch::Approx;

TEST_CASE("identical sets score 1", "[evalkit]") {
    const ScoreReport r = score_sets({1, 2}, {1, 2});
    CHECK(r.jaccard == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK(r.recall == 1.0);
}

TEST_CASE("partial overlap", "[evalkit]") {
    const ScoreReport r = score_sets({0}, {0, 1});
    CHECK(r.jaccard == Approx(0.5));
    CHECK(r.recall == Approx(0.5));
    CHECK(r.f1 == Approx(2.0 / 3.0));
    CHECK(score_sets({0, 1}, {0}).recall == 1.0);
}

TEST_CASE("empty conventions", "[evalkit]") {
    CHECK(score_sets({}, {}).jaccard == 1.0);
    CHECK(score_sets({}, {}).f1 == 1.0);
    CHECK(score_sets({3}, {}).recall == 1.0);
    CHECK(score_sets({3}, {}).jaccard == 0.0);
    CHECK(score_sets({}, {3}).recall == 0.0);
}

TEST_CASE("jaccard never exceeds f1", "[evalkit]") {
    for (unsigned p = 1; p < 32; ++p) {
        for (unsigned r = 1; r < 32; ++r) {
            NodeSet ps, rs;
            for (int i = 0; i < 5; ++i) {
                if (p >> i & 1u) ps.push_back(i);
                if (r >> i & 1u) rs.push_back(i);
            }
            const ScoreReport s = score_sets(ps, rs);
            CHECK(s.jaccard <= s.f1 + 1e-15);
            CHECK(s.f1 <= 1.0);
        }
    }
}

TEST_CASE("reference sets on the chain", "[evalkit]") {
    // E -> X2 -> X1 -> Y, plus an unperturbed parent X3 -> Y.
    const Dag g(3, {{4, 1}, {1, 0}, {0, 3}, {2, 3}});
    CHECK(reference_set(g, ReferenceKind::PA) == NodeSet{0, 2});
    CHECK(reference_set(g, ReferenceKind::S_star) == NodeSet{0});
    CHECK(score({0}, g, ReferenceKind::S_star).jaccard == 1.0);
    CHECK(score({0}, g, ReferenceKind::PA).recall == Approx(0.5));
    CHECK(to_string(ReferenceKind::S_star) == "S_star");
}

TEST_CASE("cv plan on 9 clean samples", "[evalkit]") {
    std::map<int, NodeId> on;
    for (int i = 0; i < 9; ++i) on[i] = 5;
    const CvPlan plan = build_cv_plan(on, 2, {}, Rng(1));
    REQUIRE(plan.folds.size() == 3);
    for (const auto& f : plan.folds) CHECK(f.size() == 3);
    CHECK(plan.excluded_samples.empty());
    REQUIRE(plan.splits.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(plan.splits[k].validation.size() == 3);
        CHECK(plan.splits[k].inference.size() == 6);
    }
}

TEST_CASE("cv plan drops samples on the candidate and on Y", "[evalkit]") {
    std::map<int, NodeId> on;
    for (int i = 0; i < 10; ++i) on[i] = i == 4 ? 2 : 7;
    on[10] = 7;
    const CvPlan plan = build_cv_plan(on, 2, {10}, Rng(2));
    CHECK(plan.held_out_target == 2);
    CHECK(plan.excluded_samples == std::vector<int>{4, 10});
    std::vector<int> all;
    for (const auto& f : plan.folds) {
        CHECK(f.size() == 3);
        all.insert(all.end(), f.begin(), f.end());
    }
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<int>{0, 1, 2, 3, 5, 6, 7, 8, 9});
}

TEST_CASE("cv plan is deterministic and needs 3 samples", "[evalkit]") {
    std::map<int, NodeId> on;
    for (int i = 0; i < 20; ++i) on[i] = i % 4;
    const CvPlan first = build_cv_plan(on, 9, {}, Rng(3));
    for (int rep = 0; rep < 100; ++rep) CHECK(build_cv_plan(on, 9, {}, Rng(3)).folds == first.folds);
    CHECK_THROWS_AS(build_cv_plan({{0, 1}, {1, 1}, {2, 0}}, 1, {}, Rng(4)), PlanError);
}

TEST_CASE("ranking orders by confidence", "[evalkit]") {
    CHECK(rank_predictions({{1, 2, 0.4}}).size() == 1);
    const auto r = rank_predictions({{0, 1, 0.2}, {0, 2, 0.9}, {1, 0, 0.9}});
    CHECK(r[0].candidate == 2);
    CHECK(r[1].target == 1);
    CHECK(r[2].confidence == 0.2);
    CHECK_THROWS(rank_predictions({{0, 1, std::nan("")}}));
}

TEST_CASE("precision at k matches a brute-force sort", "[evalkit]") {
    Rng rng(5);
    std::vector<Prediction> pool;
    std::set<std::pair<NodeId, NodeId>> truths;
    for (int t = 0; t < 10; ++t) {
        for (int c = 0; c < 10; ++c) {
            if (t == c) continue;
            pool.push_back({t, c, std::floor(rng.uniform() * 20.0) / 20.0});
            if (rng.uniform() < 0.2) truths.insert({t, c});
        }
    }
    // Reference: selection sort on (confidence desc, target asc, candidate asc).
    std::vector<Prediction> ref = pool;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        std::size_t best = i;
        for (std::size_t j = i + 1; j < ref.size(); ++j) {
            const auto key = [](const Prediction& p) { return std::make_tuple(-p.confidence, p.target, p.candidate); };
            if (key(ref[j]) < key(ref[best])) best = j;
        }
        std::swap(ref[i], ref[best]);
    }
    const auto ranked = rank_predictions(pool);
    const auto curve = precision_at_k(ranked, truths);
    REQUIRE(curve.size() == ranked.size());
    int hits = 0;
    for (std::size_t k = 0; k < 30; ++k) {
        CHECK(ranked[k].target == ref[k].target);
        CHECK(ranked[k].candidate == ref[k].candidate);
        hits += truths.count({ref[k].target, ref[k].candidate}) > 0;
        CHECK(curve[k] == Approx(static_cast<double>(hits) / (k + 1)));
    }
}

TEST_CASE("tail labels", "[evalkit]") {
    Eigen::MatrixXd obs(100, 2);
    for (int i = 0; i < 100; ++i) {
        obs(i, 0) = i;
        obs(i, 1) = -i;
    }
    Eigen::MatrixXd intv(3, 2);
    intv << -5, -50, 50, 10, 200, -99.5;
    const auto labels = label_tail_effects(obs, intv, 0.01);
    REQUIRE(labels.size() == 3);
    CHECK(labels[0][0]);
    CHECK_FALSE(labels[0][1]);
    CHECK_FALSE(labels[1][0]);
    CHECK(labels[1][1]);
    CHECK(labels[2][0]);
}
