#include "itv/graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <sstream>

#include "itv/error.hpp"

namespace itv {

namespace {

constexpr std::size_t kPathSearchLimit = 2'000'000;

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

const char* role_name(NodeRole role) {
    switch (role) {
        case NodeRole::Chance: return "chance";
        case NodeRole::Sensitive: return "sensitive";
        case NodeRole::Target: return "target";
        case NodeRole::Prediction: return "prediction";
        case NodeRole::Utility: return "utility";
    }
    return "chance";
}

std::optional<NodeRole> parse_role(const std::string& name) {
    for (auto r : {NodeRole::Chance, NodeRole::Sensitive, NodeRole::Target, NodeRole::Prediction,
                   NodeRole::Utility})
        if (name == role_name(r)) return r;
    return std::nullopt;
}

SLGraph::SLGraph(std::vector<NodeSpec> nodes,
                 const std::vector<std::pair<std::string, std::string>>& edges)
    : nodes_(std::move(nodes)), parents_(nodes_.size()), children_(nodes_.size()) {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (nodes_[i].label == nodes_[j].label)
                throw PreconditionError("duplicate node label '" + nodes_[i].label + "'");
    for (const auto& [from, to] : edges) link(id(from), id(to));
}

void SLGraph::link(NodeId from, NodeId to) {
    if (!edges_.insert({from, to}).second) return;
    auto insert_sorted = [](std::vector<NodeId>& v, NodeId n) {
        v.insert(std::upper_bound(v.begin(), v.end(), n), n);
    };
    insert_sorted(parents_[to.index], from);
    insert_sorted(children_[from.index], to);
}

std::vector<NodeId> SLGraph::nodes() const {
    std::vector<NodeId> out(nodes_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = NodeId{i};
    return out;
}

std::optional<NodeId> SLGraph::find(const std::string& label) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].label == label) return NodeId{i};
    return std::nullopt;
}

NodeId SLGraph::id(const std::string& label) const {
    if (auto n = find(label)) return *n;
    throw PreconditionError("unknown node '" + label + "'");
}

std::optional<NodeId> SLGraph::with_role(NodeRole role) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].role == role) return NodeId{i};
    return std::nullopt;
}

NodeId SLGraph::require_role(NodeRole role) const {
    if (auto n = with_role(role)) return *n;
    throw PreconditionError(std::string("graph has no ") + role_name(role) + " node");
}

bool SLGraph::is_acyclic() const {
    std::vector<std::size_t> indegree(size());
    for (const auto& [from, to] : edges_) ++indegree[to.index];
    std::vector<NodeId> ready;
    for (auto n : nodes())
        if (indegree[n.index] == 0) ready.push_back(n);
    std::size_t seen = 0;
    while (!ready.empty()) {
        NodeId n = ready.back();
        ready.pop_back();
        ++seen;
        for (auto c : children(n))
            if (--indegree[c.index] == 0) ready.push_back(c);
    }
    return seen == size();
}

std::vector<NodeId> SLGraph::topological_order() const {
    std::vector<std::size_t> indegree(size());
    for (const auto& [from, to] : edges_) ++indegree[to.index];
    std::set<NodeId> ready;
    for (auto n : nodes())
        if (indegree[n.index] == 0) ready.insert(n);
    std::vector<NodeId> order;
    while (!ready.empty()) {
        NodeId n = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(n);
        for (auto c : children(n))
            if (--indegree[c.index] == 0) ready.insert(c);
    }
    if (order.size() != size()) throw PreconditionError("graph contains a directed cycle");
    return order;
}

NodeSet SLGraph::ancestors(const NodeSet& of) const {
    NodeSet out;
    std::vector<NodeId> stack(of.begin(), of.end());
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        if (!out.insert(n).second) continue;
        for (auto p : parents(n)) stack.push_back(p);
    }
    return out;
}

NodeSet SLGraph::descendants(NodeId of) const {
    NodeSet out;
    std::vector<NodeId> stack{of};
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        if (!out.insert(n).second) continue;
        for (auto c : children(n)) stack.push_back(c);
    }
    return out;
}

SLGraph SLGraph::with_edge(const std::string& from, const std::string& to) const {
    SLGraph g = *this;
    g.link(id(from), id(to));
    return g;
}

SLGraph SLGraph::without_edge(const std::string& from, const std::string& to) const {
    std::vector<std::pair<std::string, std::string>> kept;
    for (const auto& [a, b] : edges_)
        if (!(label(a) == from && label(b) == to)) kept.emplace_back(label(a), label(b));
    return SLGraph(nodes_, kept);
}

std::uint64_t SLGraph::fingerprint() const {
    std::ostringstream os;
    for (const auto& n : nodes_) os << n.label << ':' << role_name(n.role) << ';';
    for (const auto& [a, b] : edges_) os << a.index << '>' << b.index << ';';
    return fnv1a(os.str());
}

std::string SLGraph::format_path(const Path& path) const {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i > 0) out += has_edge(path[i - 1], path[i]) ? " -> " : " <- ";
        out += label(path[i]);
    }
    return out;
}

EdgeSubgraph::EdgeSubgraph(const SLGraph& graph, std::set<Edge> edges)
    : edges_(std::move(edges)), fingerprint_(graph.fingerprint()) {
    for (const auto& [a, b] : edges_)
        if (a.index >= graph.size() || b.index >= graph.size() || !graph.has_edge(a, b))
            throw PreconditionError("edge-subgraph contains an edge absent from the graph");
}

EdgeSubgraph::EdgeSubgraph(const SLGraph& graph,
                           const std::vector<std::pair<std::string, std::string>>& edges)
    : fingerprint_(graph.fingerprint()) {
    for (const auto& [a, b] : edges) {
        NodeId from = graph.id(a), to = graph.id(b);
        if (!graph.has_edge(from, to))
            throw PreconditionError("edge " + a + " -> " + b + " is not in the graph");
        edges_.insert({from, to});
    }
}

EdgeSubgraph EdgeSubgraph::all(const SLGraph& graph) { return EdgeSubgraph(graph, graph.edges()); }

EdgeSubgraph EdgeSubgraph::none(const SLGraph& graph) { return EdgeSubgraph(graph, std::set<Edge>{}); }

void EdgeSubgraph::check_belongs_to(const SLGraph& graph) const {
    if (graph.fingerprint() != fingerprint_)
        throw PreconditionError("edge-subgraph was built for a different graph");
}

ValidationReport validate_sl_graph(const SLGraph& graph) {
    ValidationReport report;
    auto& v = report.violations;
    if (!graph.is_acyclic()) v.push_back("graph contains a directed cycle");

    std::map<NodeRole, int> counts;
    for (auto n : graph.nodes()) ++counts[graph.role(n)];
    for (auto role : {NodeRole::Target, NodeRole::Prediction, NodeRole::Utility})
        if (counts[role] != 1)
            v.push_back(std::string("expected exactly one ") + role_name(role) + " node, found " +
                        std::to_string(counts[role]));
    if (counts[NodeRole::Sensitive] > 1)
        v.push_back("at most one sensitive node is allowed, found " +
                    std::to_string(counts[NodeRole::Sensitive]));

    auto target = graph.with_role(NodeRole::Target);
    auto prediction = graph.with_role(NodeRole::Prediction);
    auto utility = graph.with_role(NodeRole::Utility);
    if (utility) {
        std::vector<NodeId> expected;
        if (target) expected.push_back(*target);
        if (prediction) expected.push_back(*prediction);
        std::sort(expected.begin(), expected.end());
        if (graph.parents(*utility) != expected || expected.size() != 2)
            v.push_back("Utility parents must be exactly {Target, Prediction}");
        if (!graph.children(*utility).empty()) v.push_back("Utility node must not have children");
    }
    if (prediction) {
        for (auto c : graph.children(*prediction))
            if (graph.role(c) != NodeRole::Utility) {
                v.push_back("Prediction child other than Utility: " + graph.label(c));
            }
    }
    return report;
}

bool d_separated(const SLGraph& graph, const NodeSet& x, const NodeSet& y, const NodeSet& z) {
    auto overlap = [](const NodeSet& a, const NodeSet& b) {
        for (auto n : a)
            if (b.count(n)) return true;
        return false;
    };
    if (overlap(x, y) || overlap(x, z) || overlap(y, z))
        throw PreconditionError("d-separation sets must be pairwise disjoint");

    // Reachability over (node, direction) states: a trail may leave a node it
    // entered from a child in any direction unless the node is observed; a
    // node entered from a parent passes downward when unobserved and upward
    // when it is an observed collider (or has an observed descendant).
    const NodeSet z_ancestors = graph.ancestors(z);
    enum Dir { FromChild = 0, FromParent = 1 };
    std::vector<std::array<bool, 2>> visited(graph.size(), {false, false});
    std::deque<std::pair<NodeId, Dir>> queue;
    for (auto n : x) queue.emplace_back(n, FromChild);
    while (!queue.empty()) {
        auto [n, dir] = queue.front();
        queue.pop_front();
        if (visited[n.index][dir]) continue;
        visited[n.index][dir] = true;
        const bool observed = z.count(n) > 0;
        if (!observed && y.count(n)) return false;
        if (dir == FromChild) {
            if (observed) continue;
            for (auto p : graph.parents(n)) queue.emplace_back(p, FromChild);
            for (auto c : graph.children(n)) queue.emplace_back(c, FromParent);
        } else {
            if (!observed)
                for (auto c : graph.children(n)) queue.emplace_back(c, FromParent);
            if (z_ancestors.count(n))
                for (auto p : graph.parents(n)) queue.emplace_back(p, FromChild);
        }
    }
    return true;
}

std::optional<Path> shortest_active_path(const SLGraph& graph, NodeId from, NodeId to,
                                         const NodeSet& z) {
    if (from == to) return Path{from};
    const NodeSet z_ancestors = graph.ancestors(z);

    auto neighbours = [&](NodeId n) {
        std::vector<NodeId> out = graph.parents(n);
        out.insert(out.end(), graph.children(n).begin(), graph.children(n).end());
        std::sort(out.begin(), out.end());
        return out;
    };
    // Breadth-first over simple paths in lexicographic expansion order, so
    // the first complete path found is shortest and lexicographically least.
    std::deque<Path> queue{Path{from}};
    std::size_t expanded = 0;
    while (!queue.empty()) {
        Path path = std::move(queue.front());
        queue.pop_front();
        if (++expanded > kPathSearchLimit)
            throw CapacityError("active-path search exceeded its expansion limit");
        NodeId last = path.back();
        for (auto next : neighbours(last)) {
            if (std::find(path.begin(), path.end(), next) != path.end()) continue;
            if (path.size() >= 2) {
                NodeId prev = path[path.size() - 2];
                bool collider = graph.has_edge(prev, last) && graph.has_edge(next, last);
                if (collider ? !z_ancestors.count(last) : z.count(last) > 0) continue;
            }
            Path extended = path;
            extended.push_back(next);
            if (next == to) return extended;
            queue.push_back(std::move(extended));
        }
    }
    return std::nullopt;
}

std::vector<Path> active_paths(const SLGraph& graph, NodeId from, NodeId to, const NodeSet& z,
                               std::size_t limit) {
    if (from == to) return {Path{from}};
    const NodeSet z_ancestors = graph.ancestors(z);
    std::vector<Path> found;
    Path path{from};
    std::vector<bool> on_path(graph.size(), false);
    on_path[from.index] = true;

    auto extend = [&](auto&& self) -> void {
        const NodeId last = path.back();
        std::vector<NodeId> next = graph.parents(last);
        next.insert(next.end(), graph.children(last).begin(), graph.children(last).end());
        for (auto n : next) {
            if (on_path[n.index]) continue;
            if (path.size() >= 2) {
                const NodeId prev = path[path.size() - 2];
                const bool collider = graph.has_edge(prev, last) && graph.has_edge(n, last);
                if (collider ? !z_ancestors.count(last) : z.count(last) > 0) continue;
            }
            path.push_back(n);
            if (n == to) {
                found.push_back(path);
                if (found.size() > limit) throw CapacityError("too many active paths to enumerate");
            } else {
                on_path[n.index] = true;
                self(self);
                on_path[n.index] = false;
            }
            path.pop_back();
        }
    };
    extend(extend);
    std::sort(found.begin(), found.end(), [](const Path& a, const Path& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return found;
}

NodeSet requisite_features(const SLGraph& graph) {
    const NodeId prediction = graph.require_role(NodeRole::Prediction);
    const NodeId utility = graph.require_role(NodeRole::Utility);
    const auto& features = graph.parents(prediction);
    NodeSet out;
    for (auto w : features) {
        NodeSet z(features.begin(), features.end());
        z.erase(w);
        z.insert(prediction);
        if (!d_separated(graph, {w}, {utility}, z)) out.insert(w);
    }
    return out;
}

namespace {

bool shorter_or_lex(const Path& a, const Path& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

}  // namespace

CriterionWitness itv_criterion(const SLGraph& graph) {
    const NodeId sensitive = graph.require_role(NodeRole::Sensitive);
    CriterionWitness best;
    for (auto w : requisite_features(graph)) {
        auto path = shortest_active_path(graph, sensitive, w, {});
        if (!path) continue;
        if (!best.satisfied || shorter_or_lex(*path, best.path)) {
            best.satisfied = true;
            best.feature = w;
            best.path = *path;
        }
    }
    return best;
}

bool padmissible_extra_condition(const SLGraph& graph) {
    const NodeId sensitive = graph.require_role(NodeRole::Sensitive);
    const NodeId prediction = graph.require_role(NodeRole::Prediction);
    const NodeId utility = graph.require_role(NodeRole::Utility);
    const auto& features = graph.parents(prediction);
    if (std::find(features.begin(), features.end(), sensitive) != features.end()) return false;
    return !d_separated(graph, {sensitive}, {utility}, NodeSet(features.begin(), features.end()));
}

bool padmissible_itv_criterion(const SLGraph& graph) {
    return itv_criterion(graph).satisfied && padmissible_extra_condition(graph);
}

CriterionWitness psie_criterion(const SLGraph& graph, const EdgeSubgraph& active) {
    active.check_belongs_to(graph);
    const NodeId sensitive = graph.require_role(NodeRole::Sensitive);
    const NodeId prediction = graph.require_role(NodeRole::Prediction);

    // Shortest directed paths from A inside the subgraph, expanding children
    // in NodeId order so ties resolve lexicographically.
    std::vector<std::optional<Path>> reach(graph.size());
    reach[sensitive.index] = Path{sensitive};
    std::deque<NodeId> queue{sensitive};
    while (!queue.empty()) {
        NodeId n = queue.front();
        queue.pop_front();
        for (auto c : graph.children(n)) {
            if (!active.contains(n, c) || reach[c.index]) continue;
            Path p = *reach[n.index];
            p.push_back(c);
            reach[c.index] = std::move(p);
            queue.push_back(c);
        }
    }

    CriterionWitness best;
    for (auto w : requisite_features(graph)) {
        if (!active.contains(w, prediction) || !reach[w.index]) continue;
        Path path = *reach[w.index];
        path.push_back(prediction);
        if (!best.satisfied || shorter_or_lex(path, best.path)) {
            best.satisfied = true;
            best.feature = w;
            best.path = std::move(path);
        }
    }
    return best;
}

EdgeSubgraph directed_paths_via(const SLGraph& graph, NodeId mediator) {
    const NodeId sensitive = graph.require_role(NodeRole::Sensitive);
    const NodeId prediction = graph.require_role(NodeRole::Prediction);
    const NodeId target = graph.require_role(NodeRole::Target);
    if (mediator.index >= graph.size()) throw PreconditionError("mediator is not a node of the graph");
    if (mediator == sensitive || mediator == prediction || mediator == target ||
        graph.role(mediator) == NodeRole::Utility)
        throw PreconditionError("mediator must be an intermediate node, not " + graph.label(mediator));

    const NodeSet from_a = graph.descendants(sensitive);
    const NodeSet into_x = graph.ancestors({mediator});
    const NodeSet from_x = graph.descendants(mediator);

    std::set<Edge> edges;
    if (!from_a.count(mediator)) return EdgeSubgraph(graph, edges);
    for (NodeId end : {prediction, target}) {
        const NodeSet into_end = graph.ancestors({end});
        if (!into_end.count(mediator)) continue;
        for (const auto& [u, v] : graph.edges()) {
            if (from_a.count(u) && into_x.count(v)) edges.insert({u, v});
            if (from_x.count(u) && into_end.count(v)) edges.insert({u, v});
        }
    }
    return EdgeSubgraph(graph, edges);
}

}  // namespace itv
