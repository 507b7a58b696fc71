#include "fasticp/graphs.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

namespace fasticp {

Dag::Dag(int covariate_count, std::vector<Edge> edges) : covariate_count_(covariate_count) {
    if (covariate_count < 0) {
        throw ArgumentError("covariate count must be non-negative");
    }
    const int k = node_count();
    parents_.assign(k, {});
    children_.assign(k, {});
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const Edge& e = edges[i];
        if (!contains(e.from) || !contains(e.to)) {
            throw ArgumentError("edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                                " references an unknown node");
        }
        if (e.from == e.to) {
            throw ArgumentError("self loop on node " + std::to_string(e.from));
        }
        if (i > 0 && edges[i - 1] == e) {
            throw ArgumentError("duplicate edge " + std::to_string(e.from) + "->" + std::to_string(e.to));
        }
        if (e.to == environment()) {
            throw ArgumentError("the environment node must have no parents");
        }
        parents_[e.to].push_back(e.from);
        children_[e.from].push_back(e.to);
    }
    edges_ = std::move(edges);

    std::vector<int> indegree(k);
    for (int v = 0; v < k; ++v) {
        indegree[v] = static_cast<int>(parents_[v].size());
    }
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (int v = 0; v < k; ++v) {
        if (indegree[v] == 0) ready.push(v);
    }
    while (!ready.empty()) {
        NodeId v = ready.top();
        ready.pop();
        topo_.push_back(v);
        for (NodeId c : children_[v]) {
            if (--indegree[c] == 0) ready.push(c);
        }
    }
    if (static_cast<int>(topo_.size()) != k) {
        throw ArgumentError("graph contains a directed cycle");
    }
}

void Dag::check(NodeId node) const {
    if (!contains(node)) {
        throw ArgumentError("unknown node id " + std::to_string(node));
    }
}

Role Dag::role(NodeId node) const {
    check(node);
    if (node == target()) return Role::target;
    if (node == environment()) return Role::environment;
    return Role::covariate;
}

const std::vector<NodeId>& Dag::parents(NodeId node) const {
    check(node);
    return parents_[node];
}

const std::vector<NodeId>& Dag::children(NodeId node) const {
    check(node);
    return children_[node];
}

bool Dag::has_edge(NodeId from, NodeId to) const {
    check(from);
    check(to);
    const auto& ch = children_[from];
    return std::binary_search(ch.begin(), ch.end(), to);
}

std::string Dag::node_name(NodeId node) const {
    check(node);
    if (node == target()) return "Y";
    if (node == environment()) return "E";
    return "X" + std::to_string(node + 1);
}

namespace {

NodeSet reach(const Dag& dag, NodeId start, bool downward) {
    std::vector<char> seen(dag.node_count(), 0);
    std::deque<NodeId> frontier{start};
    while (!frontier.empty()) {
        NodeId v = frontier.front();
        frontier.pop_front();
        const auto& next = downward ? dag.children(v) : dag.parents(v);
        for (NodeId w : next) {
            if (!seen[w]) {
                seen[w] = 1;
                frontier.push_back(w);
            }
        }
    }
    NodeSet out;
    for (int v = 0; v < dag.node_count(); ++v) {
        if (seen[v] && v != start) out.push_back(v);
    }
    return out;
}

}  // namespace

NodeSet relatives(const Dag& dag, NodeId node, Relation kind) {
    if (!dag.contains(node)) {
        throw ArgumentError("unknown node id " + std::to_string(node));
    }
    switch (kind) {
        case Relation::PA:
            return dag.parents(node);
        case Relation::CH:
            return dag.children(node);
        case Relation::AN:
            return reach(dag, node, false);
        case Relation::DE:
            return reach(dag, node, true);
        case Relation::ND: {
            NodeSet de = reach(dag, node, true);
            NodeSet out;
            for (int v = 0; v < dag.node_count(); ++v) {
                if (v != node && !contains(de, v)) out.push_back(v);
            }
            return out;
        }
        case Relation::MB: {
            NodeSet out = set_union(dag.parents(node), dag.children(node));
            for (NodeId c : dag.children(node)) {
                out = set_union(out, dag.parents(c));
            }
            return set_difference(out, {node});
        }
    }
    throw ArgumentError("unknown relation kind");
}

bool d_separated(const Dag& dag, NodeId a, NodeId b, const NodeSet& z) {
    if (!dag.contains(a) || !dag.contains(b)) {
        throw ArgumentError("unknown node id in d-separation query");
    }
    if (a == b) {
        throw ArgumentError("d-separation query needs two distinct nodes");
    }
    const int k = dag.node_count();
    std::vector<char> in_z(k, 0);
    for (NodeId v : z) {
        if (!dag.contains(v)) throw ArgumentError("unknown node id in conditioning set");
        in_z[v] = 1;
    }
    if (in_z[a] || in_z[b]) {
        throw ArgumentError("d-separation endpoints must not be in the conditioning set");
    }

    // Nodes that are in z or have a descendant in z; colliders there are open.
    std::vector<char> opens_collider(k, 0);
    std::deque<NodeId> work(z.begin(), z.end());
    for (NodeId v : z) opens_collider[v] = 1;
    while (!work.empty()) {
        NodeId v = work.front();
        work.pop_front();
        for (NodeId p : dag.parents(v)) {
            if (!opens_collider[p]) {
                opens_collider[p] = 1;
                work.push_back(p);
            }
        }
    }

    // Traversal state: (node, arrived from a child = "up", from a parent = "down").
    enum : int { up = 0, down = 1 };
    std::vector<char> visited(static_cast<std::size_t>(k) * 2, 0);
    std::deque<std::pair<NodeId, int>> frontier{{a, up}};
    while (!frontier.empty()) {
        auto [v, dir] = frontier.front();
        frontier.pop_front();
        char& mark = visited[static_cast<std::size_t>(v) * 2 + dir];
        if (mark) continue;
        mark = 1;
        if (v == b) return false;
        if (dir == up && !in_z[v]) {
            for (NodeId p : dag.parents(v)) frontier.emplace_back(p, up);
            for (NodeId c : dag.children(v)) frontier.emplace_back(c, down);
        } else if (dir == down) {
            if (!in_z[v]) {
                for (NodeId c : dag.children(v)) frontier.emplace_back(c, down);
            }
            if (opens_collider[v]) {
                for (NodeId p : dag.parents(v)) frontier.emplace_back(p, up);
            }
        }
    }
    return true;
}

long count_open_paths(const Dag& dag, NodeId a, NodeId b, const NodeSet& z, long limit) {
    if (!dag.contains(a) || !dag.contains(b) || a == b) {
        throw ArgumentError("open-path count needs two distinct known nodes");
    }
    const int k = dag.node_count();
    std::vector<char> in_z(k, 0);
    std::vector<char> opens_collider(k, 0);
    for (NodeId v : z) {
        if (!dag.contains(v)) throw ArgumentError("unknown node id in conditioning set");
        in_z[v] = 1;
        opens_collider[v] = 1;
        for (NodeId u : relatives(dag, v, Relation::AN)) opens_collider[u] = 1;
    }
    if (in_z[a] || in_z[b]) throw ArgumentError("path endpoints must not be in the conditioning set");

    long count = 0;
    long budget = 64 * limit;  // expansions; keeps dense graphs bounded
    std::vector<char> on_path(k, 0);
    std::vector<NodeId> path{a};
    on_path[a] = 1;
    auto walk = [&](auto&& self, NodeId u) -> void {
        if (u == b) {
            ++count;
            return;
        }
        if (count >= limit || --budget < 0) return;
        auto step = [&](NodeId w, bool w_into_u) {
            if (on_path[w] || count >= limit) return;
            if (path.size() >= 2) {
                const NodeId prev = path[path.size() - 2];
                const bool collider = dag.has_edge(prev, u) && w_into_u;
                if (collider ? !opens_collider[u] : in_z[u]) return;
            }
            on_path[w] = 1;
            path.push_back(w);
            self(self, w);
            path.pop_back();
            on_path[w] = 0;
        };
        for (NodeId c : dag.children(u)) step(c, false);
        for (NodeId p : dag.parents(u)) step(p, true);
    };
    walk(walk, a);
    return std::min(count, limit);
}

void write_edge_list(std::ostream& out, const Dag& dag) {
    out << "nodes=" << dag.node_count() << " target=" << dag.target() << " env=" << dag.environment() << '\n';
    for (const Edge& e : dag.edges()) {
        out << e.from << ' ' << e.to << '\n';
    }
}

namespace {

int parse_key_int(const std::string& token, const std::string& key) {
    const std::string prefix = key + "=";
    if (token.rfind(prefix, 0) != 0) {
        throw ParseError("edge list header: expected '" + prefix + "<int>', got '" + token + "'");
    }
    try {
        std::size_t used = 0;
        int v = std::stoi(token.substr(prefix.size()), &used);
        if (used != token.size() - prefix.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError("edge list header: bad integer in '" + token + "'");
    }
}

}  // namespace

Dag read_edge_list(std::istream& in) {
    std::string line;
    int line_no = 0;
    int nodes = -1;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (nodes < 0) {
            std::string a, b, c;
            ls >> a >> b >> c;
            nodes = parse_key_int(a, "nodes");
            int target = parse_key_int(b, "target");
            int env = parse_key_int(c, "env");
            if (nodes < 2 || target != nodes - 2 || env != nodes - 1) {
                throw ParseError("edge list header: target and env must be the last two node ids");
            }
            continue;
        }
        Edge e;
        std::string extra;
        if (!(ls >> e.from >> e.to) || (ls >> extra)) {
            // Lines with another key are sidecar metadata, not edges.
            if (line.find('=') != std::string::npos) break;
            throw ParseError("edge list line " + std::to_string(line_no) + ": expected 'src dst'");
        }
        edges.push_back(e);
    }
    if (nodes < 0) {
        throw ParseError("edge list: missing header line");
    }
    try {
        return Dag(nodes - 2, std::move(edges));
    } catch (const ArgumentError& err) {
        throw ParseError(std::string("edge list: ") + err.what());
    }
}

NodeSet make_set(std::vector<NodeId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

NodeSet set_intersection(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool is_subset(const NodeSet& sub, const NodeSet& super) {
    return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

bool contains(const NodeSet& set, NodeId id) {
    return std::binary_search(set.begin(), set.end(), id);
}

std::string format_set(const NodeSet& set) {
    std::string out = "{";
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(set[i]);
    }
    return out + "}";
}

}  // namespace fasticp
