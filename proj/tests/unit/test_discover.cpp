#include <catch_amalgamated.hpp>

#include "fasticp/discover.hpp"
#include "fasticp/evalkit.hpp"
#include "support/fixtures.hpp"

using namespace fasticp;
using testing::chain_scm;
using testing::linear_scm;

namespace {

// E -> A -> B -> Y, A -> C -> Y. Ids: A = 0, B = 1, C = 2, Y = 3, E = 4.
Scm diamond() { return linear_scm(3, {{4, 0}, {0, 1}, {0, 2}, {1, 3}, {2, 3}}, 0.8); }

std::unique_ptr<InvarianceProvider> oracle(const Scm& scm) { return with_oracle(OracleContext::from_scm(scm, true)); }

// Provider that reports the empty set as invariant: no distribution shift.
class NoShift final : public InvarianceProvider {
public:
    explicit NoShift(int d) : d_(d) {}
    SubsetEvaluation evaluate(const NodeSet& s) const override { return {1.0, true, 1.0 / (1.0 + s.size())}; }
    int covariate_count() const override { return d_; }

private:
    int d_;
};

}  // namespace

TEST_CASE("oracle runs on the chain", "[discover]") {
    const auto p = oracle(chain_scm());
    CHECK(icp(*p).parents_hat == NodeSet{});
    CHECK(ias(*p).parents_hat == NodeSet{0, 1});
    CHECK(mmse_icp(*p).parents_hat == NodeSet{0});
    CHECK(fast_icp(*p).parents_hat == NodeSet{0});
}

TEST_CASE("single parent graph", "[discover]") {
    // E -> X1 -> Y: every invariant set contains X1.
    const auto p = oracle(linear_scm(1, {{2, 0}, {0, 1}}));
    CHECK(icp(*p).parents_hat == NodeSet{0});
    CHECK(mmse_icp(*p).parents_hat == NodeSet{0});
    CHECK(fast_icp(*p).parents_hat == NodeSet{0});
}

TEST_CASE("longer chains end at the direct parent", "[discover]") {
    // E -> X4 -> X3 -> X2 -> X1 -> Y.
    const auto p = oracle(linear_scm(4, {{5, 3}, {3, 2}, {2, 1}, {1, 0}, {0, 4}}));
    CHECK(mmse_icp(*p).parents_hat == NodeSet{0});
    CHECK(fast_icp(*p).parents_hat == NodeSet{0});
}

TEST_CASE("ias on the diamond", "[discover]") {
    const auto p = oracle(diamond());
    DiscoveryOptions two;
    two.max_set_size = 2;
    CHECK(ias(*p, two).parents_hat == NodeSet{0, 1, 2});
    DiscoveryOptions one;
    one.max_set_size = 1;
    CHECK(ias(*p, one).parents_hat == NodeSet{0});
}

TEST_CASE("no shift gives the empty set everywhere", "[discover]") {
    const NoShift p(4);
    for (Method m : {Method::icp, Method::ias, Method::mmse_icp, Method::fast_icp}) {
        const DiscoveryResult r = discover(m, p);
        CHECK(r.parents_hat.empty());
        CHECK(r.invariance_tests_run >= 1);
    }
}

TEST_CASE("no invariant set is flagged", "[discover]") {
    // A provider that rejects every subset, including the empty one.
    class Never final : public InvarianceProvider {
    public:
        SubsetEvaluation evaluate(const NodeSet&) const override { return {0.0, false, 1.0}; }
        int covariate_count() const override { return 3; }
    } p;
    const DiscoveryResult m = mmse_icp(p);
    CHECK(m.parents_hat.empty());
    CHECK(m.no_invariant_set);
    const DiscoveryResult f = fast_icp(p);
    CHECK(f.parents_hat.empty());
    CHECK(f.no_invariant_set);
}

TEST_CASE("icp counts every subset", "[discover]") {
    const auto p = oracle(diamond());
    CHECK(icp(*p).invariance_tests_run == 8);
}

TEST_CASE("mmse_icp candidates stay inside DE(E) and ND(Y)", "[discover]") {
    for (const Scm& scm : testing::identifiable_scms(100, 7)) {
        const auto p = oracle(scm);
        const NodeSet de_e = relatives(scm.dag, scm.dag.environment(), Relation::DE);
        const NodeSet nd_y = relatives(scm.dag, scm.dag.target(), Relation::ND);
        const DiscoveryResult r = mmse_icp(*p);
        REQUIRE_FALSE(r.candidates.empty());
        // The winning candidate is the output.
        CHECK(is_subset(r.parents_hat, set_intersection(de_e, nd_y)));
    }
}

TEST_CASE("icp output lies inside every invariant set it found", "[discover]") {
    for (const Scm& scm : testing::identifiable_scms(60, 8)) {
        const auto p = oracle(scm);
        const DiscoveryResult r = icp(*p);
        for (const Candidate& c : r.candidates) CHECK(is_subset(r.parents_hat, c.subset));
    }
}

TEST_CASE("fast_icp respects the test-count bound", "[discover]") {
    ScmParams params;
    params.d = 21;
    params.p_edge = 0.145;
    params.n_int = 2;
    Rng rng(51);
    for (int g = 0; g < 3; ++g) {
        const Scm scm = sample_random_scm(params, rng);
        const Dataset data = simulate(scm, 1000, rng);
        const StatisticalProvider p(data, InvarianceConfig{});
        for (int depth : {1, 2, 3}) {
            DiscoveryOptions o;
            o.max_depth = depth;
            const long bound = 21L * (1L << depth) + 21L * 21L + 1;
            CHECK(fast_icp(p, o).invariance_tests_run <= bound);
        }
    }
}

TEST_CASE("statistical runs on the chain", "[discover]") {
    const Scm scm = chain_scm();
    Rng rng(52);
    const Dataset data = simulate(scm, 10000, rng);
    const StatisticalProvider p(data, InvarianceConfig{});
    CHECK(icp(p).parents_hat == NodeSet{});
    CHECK(mmse_icp(p).parents_hat == NodeSet{0});
    CHECK(fast_icp(p).parents_hat == NodeSet{0});
    CHECK(stat_dependency(p, {0}) < stat_dependency(p, {}));
    CHECK(stat_dependency(data, {0}, InvarianceConfig{}) == stat_dependency(p, {0}));
}

TEST_CASE("dependency ordering matches the oracle partition", "[discover]") {
    const Scm scm = chain_scm();
    const OracleContext ctx = OracleContext::from_scm(scm, true);
    int agree = 0;
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(600 + seed);
        const Dataset data = simulate(scm, 20000, rng);
        const StatisticalProvider p(data, InvarianceConfig{});
        double worst_invariant = 0.0;
        double best_other = 1.0;
        for (const NodeSet& s : {NodeSet{}, NodeSet{0}, NodeSet{1}, NodeSet{0, 1}}) {
            const double dep = stat_dependency(p, s);
            if (d_separated(ctx.dag(), ctx.dag().environment(), ctx.dag().target(), s)) {
                worst_invariant = std::max(worst_invariant, dep);
            } else {
                best_other = std::min(best_other, dep);
            }
        }
        agree += worst_invariant < best_other;
    }
    CHECK(agree >= 19);
}

TEST_CASE("scope restricts the search", "[discover]") {
    const auto p = oracle(diamond());
    DiscoveryOptions o;
    o.scope = NodeSet{1, 2};
    const DiscoveryResult r = mmse_icp(*p, o);
    CHECK(r.scope == NodeSet{1, 2});
    CHECK(r.parents_hat == NodeSet{1, 2});
}

TEST_CASE("exhaustive methods refuse oversized scopes", "[discover]") {
    const NoShift p(30);
    CHECK_THROWS_AS(icp(p), ArgumentError);
    CHECK_THROWS_AS(mmse_icp(p), ArgumentError);
    CHECK_NOTHROW(fast_icp(p));
}

TEST_CASE("oracle refuses population mmse for nonlinear models", "[discover]") {
    ScmParams params;
    params.mechanism = Mechanism::nonlinear2;
    Rng rng(53);
    const Scm scm = sample_random_scm(params, rng);
    CHECK_THROWS_AS(with_oracle(OracleContext::from_scm(scm, true)), UnsupportedError);
    CHECK_NOTHROW(with_oracle(OracleContext::from_scm(scm, false)));
}

TEST_CASE("method names round trip", "[discover]") {
    for (Method m : {Method::icp, Method::ias, Method::mmse_icp, Method::fast_icp}) {
        CHECK(parse_method(to_string(m)) == m);
    }
    CHECK_THROWS_AS(parse_method("lingam"), ArgumentError);
}
