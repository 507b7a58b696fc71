#include "fasticp/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace fasticp {

std::vector<std::string> Scm::covariate_names() const {
    std::vector<std::string> names;
    for (NodeId v = 0; v < dag.covariate_count(); ++v) {
        NodeId src = copy_source.at(v);
        names.push_back(src >= 0 ? dag.node_name(src) + "'" : dag.node_name(v));
    }
    return names;
}

void Scm::validate() const {
    const int k = dag.node_count();
    if (static_cast<int>(noise_variance.size()) != k || static_cast<int>(copy_source.size()) != k) {
        throw ArgumentError("scm: per-node vectors must have one entry per node");
    }
    for (const Edge& e : dag.edges()) {
        bool from_env = e.from == dag.environment();
        if (from_env == static_cast<bool>(coefficients.count(e))) {
            throw ArgumentError("scm: coefficients must cover exactly the edges not incident to E");
        }
    }
    if (coefficients.size() + dag.children(dag.environment()).size() != dag.edges().size()) {
        throw ArgumentError("scm: coefficient for an edge that is not in the graph");
    }
    for (NodeId v = 0; v < k; ++v) {
        if (v != dag.environment() && !(noise_variance[v] > 0.0)) {
            throw ArgumentError("scm: noise variance must be positive for " + dag.node_name(v));
        }
    }
    if (intervention.targets != dag.children(dag.environment())) {
        throw ArgumentError("scm: intervention targets must equal the children of E");
    }
    for (const auto& [edge, g] : intervention.gamma) {
        if (g < 0.0 || g > 0.2) throw ArgumentError("scm: gamma entries must lie in [0, 0.2]");
        if (!contains(intervention.targets, edge.to)) {
            throw ArgumentError("scm: gamma given for an edge into a non-target node");
        }
    }
    if (!(intervention.noise_variance_shift > 0.0)) {
        throw ArgumentError("scm: noise variance shift must be positive");
    }
}

double p_edge_two_over_nint(int n_int) {
    if (n_int < 1) throw ArgumentError("n_int must be at least 1");
    return std::min(1.0, 2.0 / n_int);
}

double draw_coefficient(bool symmetric, Rng& rng) {
    if (symmetric) {
        double u = rng.uniform() * 3.0;
        return u < 1.5 ? -2.0 + u : 0.5 + (u - 1.5);
    }
    double u = rng.uniform() * 4.0;
    return u < 2.5 ? -2.0 + u : 0.5 + (u - 2.5);
}

namespace {

void check_params(const ScmParams& p) {
    if (p.d < 1) throw ArgumentError("d must be at least 1");
    if (!(p.p_edge > 0.0 && p.p_edge <= 1.0)) throw ArgumentError("p_edge must lie in (0, 1]");
    if (p.n_int < 1 || p.n_int > p.d) throw ArgumentError("n_int must lie in [1, d]");
    if (!(p.noise_variance_shift > 0.0)) throw ArgumentError("noise variance shift must be positive");
}

}  // namespace

Dag sample_random_dag(const ScmParams& params, Rng& rng) {
    check_params(params);
    const int m = params.d + 1;  // X1..Xd and Y before role assignment
    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        for (int i = m - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(0, i)]);

        std::vector<Edge> raw;
        std::vector<int> indegree(m, 0);
        for (int a = 0; a < m; ++a) {
            for (int b = a + 1; b < m; ++b) {
                if (rng.uniform() < params.p_edge) {
                    raw.push_back({order[a], order[b]});
                    ++indegree[order[b]];
                }
            }
        }
        std::vector<int> with_parent;
        for (int v = 0; v < m; ++v) {
            if (indegree[v] > 0) with_parent.push_back(v);
        }
        if (with_parent.empty()) continue;
        const int y_raw = with_parent[rng.uniform_int(0, static_cast<int>(with_parent.size()) - 1)];

        // Relabel: remaining nodes keep their relative order as X1..Xd.
        std::vector<int> id(m);
        for (int v = 0, next = 0; v < m; ++v) id[v] = v == y_raw ? params.d : next++;
        std::vector<Edge> edges;
        for (const Edge& e : raw) edges.push_back({id[e.from], id[e.to]});

        std::vector<int> pool(params.d);
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < params.n_int; ++i) {
            std::swap(pool[i], pool[rng.uniform_int(i, params.d - 1)]);
            edges.push_back({params.d + 1, pool[i]});
        }
        Dag dag(params.d, std::move(edges));
        if (contains(relatives(dag, dag.environment(), Relation::DE), dag.target())) {
            return dag;
        }
    }
    throw GenerationError("no graph with Y in DE(E) after " + std::to_string(params.max_attempts) +
                          " attempts (d=" + std::to_string(params.d) + ", p_edge=" + std::to_string(params.p_edge) +
                          ", n_int=" + std::to_string(params.n_int) + ")");
}

Scm draw_mechanism(const Dag& dag, const ScmParams& params, Rng& rng) {
    Scm scm;
    scm.dag = dag;
    scm.mechanism = params.mechanism;
    scm.seed = rng.key();
    scm.noise_variance.assign(dag.node_count(), 1.0);
    scm.noise_variance[dag.environment()] = 0.0;
    scm.copy_source.assign(dag.node_count(), -1);
    const bool uses_basis = params.mechanism == Mechanism::nonlinear1 || params.mechanism == Mechanism::nonlinear2;
    for (const Edge& e : dag.edges()) {
        if (e.from == dag.environment()) continue;
        scm.coefficients[e] = draw_coefficient(params.symmetric_coefficients, rng);
        if (uses_basis) scm.basis[e] = static_cast<Basis>(rng.uniform_int(0, 3));
    }
    scm.intervention.targets = dag.children(dag.environment());
    scm.intervention.kind = params.intervention;
    scm.intervention.noise_variance_shift = params.noise_variance_shift;
    if (params.intervention == InterventionKind::imperfect) {
        for (NodeId t : scm.intervention.targets) {
            for (NodeId p : dag.parents(t)) {
                if (p != dag.environment()) scm.intervention.gamma[{p, t}] = 0.2 * rng.uniform();
            }
        }
    }
    scm.validate();
    return scm;
}

Scm sample_random_scm(const ScmParams& params, Rng& rng) {
    Dag dag = sample_random_dag(params, rng);
    return draw_mechanism(dag, params, rng);
}

namespace {

double apply_basis(Basis b, double x) {
    switch (b) {
        case Basis::identity:
            return x;
        case Basis::relu:
            return std::max(0.0, x);
        case Basis::signed_sqrt:
            return std::copysign(std::sqrt(std::abs(x)), x);
        case Basis::sine:
            return std::sin(2.0 * std::numbers::pi * x);
    }
    return x;
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

Dataset simulate(const Scm& scm, int n, Rng& rng) {
    if (n < 2) throw ArgumentError("simulate needs n >= 2");
    scm.validate();
    const Dag& dag = scm.dag;
    const NodeId env_node = dag.environment();
    const auto& iv = scm.intervention;

    Dataset data;
    data.seed = rng.key();
    data.env.resize(n);
    for (int i = 0; i < n; ++i) data.env[i] = rng.uniform() < 0.5 ? 1 : 0;

    Eigen::MatrixXd values(n, dag.node_count() - 1);
    for (NodeId j : dag.topological_order()) {
        if (j == env_node) continue;
        std::vector<NodeId> parents;
        for (NodeId p : dag.parents(j)) {
            if (p != env_node) parents.push_back(p);
        }
        const bool is_target = contains(iv.targets, j);
        const double sd = std::sqrt(scm.noise_variance[j]);
        auto col = values.col(j);

        if (scm.is_copy(j)) {
            const NodeId src = scm.copy_source[j];
            for (int i = 0; i < n; ++i) col(i) = values(i, src) + sd * rng.normal();
            continue;
        }

        for (int i = 0; i < n; ++i) {
            const bool intervened = is_target && data.env[i] == 1;
            if (intervened && iv.kind == InterventionKind::perfect) {
                col(i) = 1.0;
                continue;
            }
            double f = scm.mechanism == Mechanism::nonlinear1 && !parents.empty() ? 1.0 : 0.0;
            for (NodeId p : parents) {
                const Edge e{p, j};
                double beta = scm.coefficients.at(e);
                double factor = 1.0;
                if (intervened && iv.kind == InterventionKind::imperfect) factor = iv.gamma.at(e);
                const double xp = values(i, p);
                switch (scm.mechanism) {
                    case Mechanism::linear:
                        f += factor * beta * xp;
                        break;
                    case Mechanism::nonlinear1:
                        f *= factor * sign(beta) * apply_basis(scm.basis.at(e), xp);
                        break;
                    case Mechanism::nonlinear2:
                        f += factor * beta * apply_basis(scm.basis.at(e), xp);
                        break;
                    case Mechanism::nonlinear3:
                        f += factor * beta * xp * xp;
                        break;
                }
            }
            const double noise_sd = intervened && iv.kind == InterventionKind::noise
                                        ? std::sqrt(iv.noise_variance_shift)
                                        : sd;
            col(i) = f + noise_sd * rng.normal();
        }

        const double mean = col.mean();
        const double var = (col.array() - mean).square().mean();
        if (!(var > 0.0)) {
            throw SimulationError("column " + dag.node_name(j) + " has zero pooled standard deviation");
        }
        col = (col.array() - mean) / std::sqrt(var);
    }

    const int d = dag.covariate_count();
    data.x = values.leftCols(d);
    data.y = values.col(dag.target());
    data.column_names = scm.covariate_names();
    return data;
}

std::pair<Dataset, Scm> add_noisy_copies(const Dataset& data, const Scm& scm, double epsilon, Rng& rng) {
    if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
    data.validate();
    const int d = scm.dag.covariate_count();
    if (data.covariate_count() != d) throw ArgumentError("dataset and scm disagree on the covariate count");

    auto remap = [d](NodeId v) { return v < d ? v : v + d; };
    std::vector<Edge> edges;
    Scm out;
    for (const Edge& e : scm.dag.edges()) edges.push_back({remap(e.from), remap(e.to)});
    for (NodeId i = 0; i < d; ++i) edges.push_back({i, d + i});
    out.dag = Dag(2 * d, edges);
    out.mechanism = scm.mechanism;
    for (const auto& [e, b] : scm.coefficients) out.coefficients[{remap(e.from), remap(e.to)}] = b;
    for (const auto& [e, b] : scm.basis) out.basis[{remap(e.from), remap(e.to)}] = b;
    for (NodeId i = 0; i < d; ++i) out.coefficients[{i, d + i}] = 1.0;
    out.noise_variance.assign(out.dag.node_count(), 0.0);
    out.copy_source.assign(out.dag.node_count(), -1);
    for (NodeId v = 0; v < scm.dag.node_count(); ++v) {
        out.noise_variance[remap(v)] = scm.noise_variance[v];
        out.copy_source[remap(v)] = scm.copy_source[v] >= 0 ? remap(scm.copy_source[v]) : -1;
    }
    for (NodeId i = 0; i < d; ++i) {
        out.noise_variance[d + i] = epsilon * epsilon;
        out.copy_source[d + i] = i;
    }
    out.intervention = scm.intervention;
    out.intervention.targets.clear();
    for (NodeId t : scm.intervention.targets) out.intervention.targets.push_back(remap(t));
    out.intervention.gamma.clear();
    for (const auto& [e, g] : scm.intervention.gamma) out.intervention.gamma[{remap(e.from), remap(e.to)}] = g;
    out.seed = scm.seed;
    out.validate();

    Dataset result = data;
    result.x.conservativeResize(Eigen::NoChange, 2 * d);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (int j = 0; j < d; ++j) result.x(i, d + j) = data.x(i, j) + epsilon * rng.normal();
    }
    result.column_names = out.covariate_names();
    return {std::move(result), std::move(out)};
}

PopulationMoments population_moments(const Scm& scm) {
    if (scm.mechanism != Mechanism::linear) {
        throw UnsupportedError("population moments are only available for linear SCMs");
    }
    scm.validate();
    const Dag& dag = scm.dag;
    const NodeId env_node = dag.environment();
    const int k = dag.node_count() - 1;
    const auto& iv = scm.intervention;

    PopulationMoments pm;
    pm.target = dag.target();
    pm.scale = Eigen::VectorXd::Ones(k);
    for (int r = 0; r < 2; ++r) {
        pm.mean[r] = Eigen::VectorXd::Zero(k);
        pm.cov[r] = Eigen::MatrixXd::Zero(k, k);
    }
    std::vector<NodeId> done;
    for (NodeId j : dag.topological_order()) {
        if (j == env_node) continue;
        const bool is_target = contains(iv.targets, j);
        double raw_mean[2] = {0.0, 0.0};
        double raw_var[2] = {0.0, 0.0};
        Eigen::VectorXd raw_cov[2] = {Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k)};
        for (int r = 0; r < 2; ++r) {
            const bool intervened = r == 1 && is_target;
            if (intervened && iv.kind == InterventionKind::perfect) {
                raw_mean[r] = 1.0;
                continue;
            }
            // Raw node = b' * parents + noise in this regime.
            Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
            for (NodeId p : dag.parents(j)) {
                if (p == env_node) continue;
                double beta = scm.coefficients.at({p, j});
                if (intervened && iv.kind == InterventionKind::imperfect) beta *= iv.gamma.at({p, j});
                b(p) = beta;
            }
            double noise = scm.noise_variance[j];
            if (intervened && iv.kind == InterventionKind::noise) noise = iv.noise_variance_shift;
            raw_mean[r] = b.dot(pm.mean[r]);
            raw_cov[r] = pm.cov[r] * b;
            raw_var[r] = b.dot(raw_cov[r]) + noise;
        }
        double shift = 0.0;
        double s = 1.0;
        if (!scm.is_copy(j)) {
            shift = 0.5 * (raw_mean[0] + raw_mean[1]);
            const double gap = raw_mean[0] - raw_mean[1];
            const double pooled_var = 0.5 * (raw_var[0] + raw_var[1]) + 0.25 * gap * gap;
            if (!(pooled_var > 0.0)) {
                throw SimulationError("node " + dag.node_name(j) + " has zero population variance");
            }
            s = std::sqrt(pooled_var);
        }
        pm.scale(j) = s;
        for (int r = 0; r < 2; ++r) {
            pm.mean[r](j) = (raw_mean[r] - shift) / s;
            for (NodeId q : done) {
                pm.cov[r](j, q) = pm.cov[r](q, j) = raw_cov[r](q) / s;
            }
            pm.cov[r](j, j) = raw_var[r] / (s * s);
        }
        done.push_back(j);
    }
    return pm;
}

PopulationMmse population_mmse(const PopulationMoments& pm, const NodeSet& subset) {
    const NodeId y = pm.target;
    const Eigen::MatrixXd& c = pm.cov[0];
    const double var_y = c(y, y);
    if (subset.empty()) return {var_y, false};
    const auto s = static_cast<Eigen::Index>(subset.size());
    Eigen::MatrixXd css(s, s);
    Eigen::VectorXd csy(s);
    for (Eigen::Index a = 0; a < s; ++a) {
        if (subset[a] < 0 || subset[a] >= y) throw ArgumentError("population_mmse: subset must hold covariate ids");
        csy(a) = c(subset[a], y);
        for (Eigen::Index b = 0; b < s; ++b) css(a, b) = c(subset[a], subset[b]);
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(css);
    cod.setThreshold(1e-12);
    const double explained = csy.dot(cod.solve(csy));
    return {std::max(0.0, var_y - explained), cod.rank() < s};
}

PopulationMmse population_mmse(const Scm& scm, const NodeSet& subset) {
    return population_mmse(population_moments(scm), subset);
}

std::string to_string(Mechanism m) {
    switch (m) {
        case Mechanism::linear: return "linear";
        case Mechanism::nonlinear1: return "nonlinear1";
        case Mechanism::nonlinear2: return "nonlinear2";
        case Mechanism::nonlinear3: return "nonlinear3";
    }
    return "?";
}

std::string to_string(InterventionKind k) {
    switch (k) {
        case InterventionKind::perfect: return "perfect";
        case InterventionKind::imperfect: return "imperfect";
        case InterventionKind::noise: return "noise";
    }
    return "?";
}

Mechanism parse_mechanism(const std::string& text) {
    for (Mechanism m : {Mechanism::linear, Mechanism::nonlinear1, Mechanism::nonlinear2, Mechanism::nonlinear3}) {
        if (to_string(m) == text) return m;
    }
    throw ArgumentError("unknown mechanism '" + text + "'");
}

InterventionKind parse_intervention(const std::string& text) {
    for (InterventionKind k : {InterventionKind::perfect, InterventionKind::imperfect, InterventionKind::noise}) {
        if (to_string(k) == text) return k;
    }
    throw ArgumentError("unknown intervention kind '" + text + "'");
}

}  // namespace fasticp
