#include <catch_amalgamated.hpp>

#include <sstream>

#include "fasticp/graphs.hpp"
#include "fasticp/rng.hpp"

using namespace fasticp;

namespace {

// E -> X2 -> X1 -> Y. Ids: X1 = 0, X2 = 1, Y = 2, E = 3.
Dag chain() { return Dag(2, {{3, 1}, {1, 0}, {0, 2}}); }

// Reference d-separation: a and b are separated by z iff they are
// disconnected in the moral graph of the ancestral closure of {a, b} u z
// after deleting z.
bool moral_separated(const Dag& dag, NodeId a, NodeId b, const NodeSet& z) {
    const int n = dag.node_count();
    std::vector<char> keep(n, 0);
    std::vector<NodeId> stack{a, b};
    stack.insert(stack.end(), z.begin(), z.end());
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        if (keep[v]) continue;
        keep[v] = 1;
        for (NodeId p : dag.parents(v)) stack.push_back(p);
    }
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (NodeId v = 0; v < n; ++v) {
        if (!keep[v]) continue;
        const auto& pa = dag.parents(v);
        for (NodeId p : pa) adj[p][v] = adj[v][p] = 1;
        for (std::size_t i = 0; i < pa.size(); ++i) {
            for (std::size_t j = i + 1; j < pa.size(); ++j) adj[pa[i]][pa[j]] = adj[pa[j]][pa[i]] = 1;
        }
    }
    std::vector<char> blocked(n, 0), seen(n, 0);
    for (NodeId v : z) blocked[v] = 1;
    stack = {a};
    seen[a] = 1;
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        if (v == b) return false;
        for (NodeId u = 0; u < n; ++u) {
            if (keep[u] && adj[v][u] && !blocked[u] && !seen[u]) {
                seen[u] = 1;
                stack.push_back(u);
            }
        }
    }
    return true;
}

Dag random_dag(int d, double p, Rng& rng) {
    // Random order over all nodes except E; E may point anywhere.
    const int n = d + 2;
    std::vector<NodeId> order;
    for (NodeId v = 0; v < d + 1; ++v) order.push_back(v);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            if (rng.uniform() < p) edges.push_back({order[i], order[j]});
        }
    }
    for (NodeId v = 0; v < n - 1; ++v) {
        if (rng.uniform() < p) edges.push_back({n - 1, v});
    }
    return Dag(d, edges);
}

}  // namespace

TEST_CASE("chain relatives", "[graphs]") {
    const Dag g = chain();
    CHECK(relatives(g, g.target(), Relation::PA) == NodeSet{0});
    CHECK(relatives(g, g.target(), Relation::AN) == NodeSet{0, 1, 3});
    CHECK(relatives(g, g.environment(), Relation::DE) == NodeSet{0, 1, 2});
    CHECK(relatives(g, 1, Relation::CH) == NodeSet{0});
    CHECK(relatives(g, g.target(), Relation::ND) == NodeSet{0, 1, 3});
    CHECK(relatives(g, 0, Relation::MB) == NodeSet{1, 2});
}

TEST_CASE("isolated node has no ancestors", "[graphs]") {
    const Dag g(2, {{3, 0}, {0, 2}});
    CHECK(relatives(g, 1, Relation::AN).empty());
    CHECK(relatives(g, 1, Relation::DE).empty());
}

TEST_CASE("chain d-separation", "[graphs]") {
    const Dag g = chain();
    CHECK(d_separated(g, 3, 2, {0}));
    CHECK(d_separated(g, 3, 2, {1}));
    CHECK(d_separated(g, 3, 2, {0, 1}));
    CHECK_FALSE(d_separated(g, 3, 2, {}));
}

TEST_CASE("collider opens when conditioned on", "[graphs]") {
    // A = X1 (0), B = X2 (1), C = Y (2).
    const Dag g(2, {{0, 2}, {1, 2}});
    CHECK(d_separated(g, 0, 1, {}));
    CHECK_FALSE(d_separated(g, 0, 1, {2}));
}

TEST_CASE("constructor rejects malformed graphs", "[graphs]") {
    CHECK_THROWS_AS(Dag(2, {{0, 1}, {1, 0}}), ArgumentError);
    CHECK_THROWS_AS(Dag(2, {{0, 0}}), ArgumentError);
    CHECK_THROWS_AS(Dag(2, {{0, 1}, {0, 1}}), ArgumentError);
    CHECK_THROWS_AS(Dag(2, {{0, 3}}), ArgumentError);
    CHECK_THROWS_AS(Dag(2, {{0, 7}}), ArgumentError);
    CHECK_THROWS_AS(relatives(chain(), 9, Relation::PA), ArgumentError);
    CHECK_THROWS_AS(d_separated(chain(), 3, 2, {3}), ArgumentError);
}

TEST_CASE("d-separation agrees with the moralization criterion", "[graphs]") {
    Rng rng(17);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 1 + trial % 4;  // up to 6 nodes in total
        const Dag g = random_dag(d, 0.45, rng);
        const int n = g.node_count();
        for (NodeId a = 0; a < n; ++a) {
            for (NodeId b = a + 1; b < n; ++b) {
                for (unsigned mask = 0; mask < (1u << n); ++mask) {
                    if (mask >> a & 1u || mask >> b & 1u) continue;
                    NodeSet z;
                    for (NodeId v = 0; v < n; ++v) {
                        if (mask >> v & 1u) z.push_back(v);
                    }
                    const bool expected = moral_separated(g, a, b, z);
                    REQUIRE(d_separated(g, a, b, z) == expected);
                    REQUIRE((count_open_paths(g, a, b, z) == 0) == expected);
                    ++checked;
                }
            }
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("open path count on two parallel routes", "[graphs]") {
    // E -> X1 -> Y and E -> X2 -> Y.
    const Dag g(2, {{3, 0}, {3, 1}, {0, 2}, {1, 2}});
    CHECK(count_open_paths(g, 3, 2, {}) == 2);
    CHECK(count_open_paths(g, 3, 2, {0}) == 1);
    CHECK(count_open_paths(g, 3, 2, {0, 1}) == 0);
}

TEST_CASE("edge list round trip", "[graphs]") {
    const Dag g(3, {{4, 0}, {0, 1}, {1, 3}, {2, 3}, {0, 2}});
    std::stringstream buf;
    write_edge_list(buf, g);
    const Dag back = read_edge_list(buf);
    CHECK(back.covariate_count() == 3);
    CHECK(back.edges() == g.edges());
}

TEST_CASE("edge list parse errors", "[graphs]") {
    std::istringstream bad("nodes=x target=1 env=2\n");
    CHECK_THROWS_AS(read_edge_list(bad), ParseError);
}

TEST_CASE("set helpers", "[graphs]") {
    CHECK(make_set({3, 1, 3, 2}) == NodeSet{1, 2, 3});
    CHECK(set_union({1, 3}, {2, 3}) == NodeSet{1, 2, 3});
    CHECK(set_intersection({1, 3}, {2, 3}) == NodeSet{3});
    CHECK(set_difference({1, 2, 3}, {2}) == NodeSet{1, 3});
    CHECK(is_subset({}, {1}));
    CHECK_FALSE(is_subset({4}, {1}));
}
