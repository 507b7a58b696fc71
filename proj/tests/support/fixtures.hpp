#pragma once

#include <vector>

#include "fasticp/discover.hpp"
#include "fasticp/scm.hpp"

namespace fasticp::testing {

// E -> X2 -> X1 -> Y with unit coefficients. Ids: X1 = 0, X2 = 1, Y = 2, E = 3.
inline Scm chain_scm(InterventionKind kind = InterventionKind::perfect) {
    Scm scm;
    scm.dag = Dag(2, {{3, 1}, {1, 0}, {0, 2}});
    scm.mechanism = Mechanism::linear;
    scm.coefficients = {{{1, 0}, 1.0}, {{0, 2}, 1.0}};
    scm.noise_variance.assign(4, 1.0);
    scm.copy_source.assign(4, -1);
    scm.intervention.targets = {1};
    scm.intervention.kind = kind;
    if (kind == InterventionKind::imperfect) scm.intervention.gamma = {};
    scm.validate();
    return scm;
}

// Builds a linear SCM with the given covariate count and edges; every
// non-E edge gets coefficient `beta`.
inline Scm linear_scm(int d, const std::vector<Edge>& edges, double beta = 1.0) {
    Scm scm;
    scm.dag = Dag(d, edges);
    scm.mechanism = Mechanism::linear;
    for (const Edge& e : scm.dag.edges()) {
        if (e.from != scm.dag.environment()) scm.coefficients[e] = beta;
    }
    scm.noise_variance.assign(scm.dag.node_count(), 1.0);
    scm.copy_source.assign(scm.dag.node_count(), -1);
    scm.intervention.targets = scm.dag.children(scm.dag.environment());
    scm.validate();
    return scm;
}

// Random linear SCMs with 1 <= d <= 7 whose parents of Y all descend from E.
// Coverage cycles d and the edge probability so small and dense graphs both appear.
inline std::vector<Scm> identifiable_scms(int count, std::uint64_t seed) {
    std::vector<Scm> out;
    Rng rng(seed);
    const double p_edges[] = {0.145, 0.24, 0.4};
    for (long attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
        ScmParams params;
        params.d = 1 + static_cast<int>(attempt % 7);
        params.p_edge = p_edges[attempt % 3];
        params.n_int = rng.uniform_int(1, params.d);
        Scm scm;
        try {
            scm = sample_random_scm(params, rng);
        } catch (const GenerationError&) {
            continue;
        }
        const NodeSet pa = scm.dag.parents(scm.dag.target());
        if (is_subset(pa, relatives(scm.dag, scm.dag.environment(), Relation::DE))) out.push_back(std::move(scm));
    }
    return out;
}

// True when some proper subset of PA(Y) already d-separates E from Y.
inline bool parent_shadowed(const Dag& dag) {
    const NodeSet pa = dag.parents(dag.target());
    const int k = static_cast<int>(pa.size());
    for (unsigned mask = 0; mask + 1 < (1u << k); ++mask) {
        NodeSet sub;
        for (int i = 0; i < k; ++i) {
            if (mask >> i & 1u) sub.push_back(pa[i]);
        }
        if (d_separated(dag, dag.environment(), dag.target(), sub)) return true;
    }
    return false;
}

}  // namespace fasticp::testing
