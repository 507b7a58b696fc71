#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fasticp {

using NodeId = int;

/// Sorted, duplicate-free list of node ids. All set helpers below keep that form.
using NodeSet = std::vector<NodeId>;

struct Edge {
    NodeId from = 0;
    NodeId to = 0;
    auto operator<=>(const Edge&) const = default;
};

class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for malformed text input (CSV, edge lists, sidecars).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Role { covariate, target, environment };
enum class Relation { PA, CH, AN, DE, ND, MB };

/**
 * Directed acyclic graph over covariates X1..Xd, the target Y and the
 * environment indicator E.
 *
 * Ids are dense: covariates occupy 0..d-1, Y is d and E is d+1. The graph is
 * immutable once built; the constructor rejects cycles, self loops, duplicate
 * edges and edges into E.
 */
class Dag {
public:
    Dag() = default;
    Dag(int covariate_count, std::vector<Edge> edges);

    int node_count() const { return covariate_count_ + 2; }
    int covariate_count() const { return covariate_count_; }
    NodeId target() const { return covariate_count_; }
    NodeId environment() const { return covariate_count_ + 1; }

    Role role(NodeId node) const;
    bool contains(NodeId node) const { return node >= 0 && node < node_count(); }

    const std::vector<NodeId>& parents(NodeId node) const;
    const std::vector<NodeId>& children(NodeId node) const;
    bool has_edge(NodeId from, NodeId to) const;

    /// Edges sorted by (from, to).
    const std::vector<Edge>& edges() const { return edges_; }
    /// Deterministic topological order (Kahn, smallest id first).
    const std::vector<NodeId>& topological_order() const { return topo_; }

    /// "X<i+1>" for covariates, "Y" and "E" otherwise.
    std::string node_name(NodeId node) const;

private:
    void check(NodeId node) const;

    int covariate_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<NodeId>> parents_;
    std::vector<std::vector<NodeId>> children_;
    std::vector<NodeId> topo_;
};

NodeSet relatives(const Dag& dag, NodeId node, Relation kind);

/// Bayes-ball reachability: true iff `z` blocks every path between a and b.
bool d_separated(const Dag& dag, NodeId a, NodeId b, const NodeSet& z);

/// Number of simple paths between a and b left open by `z`, counted by
/// explicit enumeration and saturating at `limit`. Zero iff d-separated,
/// unless the search budget of 64 * limit expansions runs out first.
long count_open_paths(const Dag& dag, NodeId a, NodeId b, const NodeSet& z, long limit = 10000);

// Edge-list text format: header `nodes=<k> target=<id> env=<id>`, then one
// `src dst` pair per line.
void write_edge_list(std::ostream& out, const Dag& dag);
Dag read_edge_list(std::istream& in);

// Set helpers on sorted NodeSets.
NodeSet make_set(std::vector<NodeId> ids);
NodeSet set_union(const NodeSet& a, const NodeSet& b);
NodeSet set_intersection(const NodeSet& a, const NodeSet& b);
NodeSet set_difference(const NodeSet& a, const NodeSet& b);
bool is_subset(const NodeSet& sub, const NodeSet& super);
bool contains(const NodeSet& set, NodeId id);
std::string format_set(const NodeSet& set);

}  // namespace fasticp
