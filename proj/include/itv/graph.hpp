#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace itv {

/// Stable handle for a node: its insertion index in the owning graph.
struct NodeId {
    std::size_t index = 0;
    auto operator<=>(const NodeId&) const = default;
};

enum class NodeRole { Chance, Sensitive, Target, Prediction, Utility };

const char* role_name(NodeRole role);
std::optional<NodeRole> parse_role(const std::string& name);

using NodeSet = std::set<NodeId>;
using Edge = std::pair<NodeId, NodeId>;
using Path = std::vector<NodeId>;

/// Directed graph over named nodes with supervised-learning roles.
///
/// Construction accepts any node/edge lists; structural rules (acyclicity, role
/// counts, the utility node's parents) are checked by validate_sl_graph rather
/// than at construction, so malformed inputs can be reported in full.
class SLGraph {
public:
    struct NodeSpec {
        std::string label;
        NodeRole role = NodeRole::Chance;
    };

    SLGraph() = default;
    SLGraph(std::vector<NodeSpec> nodes,
            const std::vector<std::pair<std::string, std::string>>& edges);

    std::size_t size() const { return nodes_.size(); }
    std::vector<NodeId> nodes() const;
    const std::string& label(NodeId id) const { return nodes_.at(id.index).label; }
    NodeRole role(NodeId id) const { return nodes_.at(id.index).role; }
    std::optional<NodeId> find(const std::string& label) const;
    /// Like find, but throws PreconditionError for unknown labels.
    NodeId id(const std::string& label) const;

    const std::set<Edge>& edges() const { return edges_; }
    bool has_edge(NodeId from, NodeId to) const { return edges_.count({from, to}) > 0; }
    const std::vector<NodeId>& parents(NodeId id) const { return parents_.at(id.index); }
    const std::vector<NodeId>& children(NodeId id) const { return children_.at(id.index); }

    /// First node carrying `role`, if any.
    std::optional<NodeId> with_role(NodeRole role) const;
    /// As with_role, but throws PreconditionError when absent.
    NodeId require_role(NodeRole role) const;

    bool is_acyclic() const;
    /// Kahn order with ties broken by NodeId. Throws PreconditionError on cycles.
    std::vector<NodeId> topological_order() const;

    /// Ancestors of every node in `of`, including the nodes themselves.
    NodeSet ancestors(const NodeSet& of) const;
    /// Descendants of `of`, including `of`.
    NodeSet descendants(NodeId of) const;

    SLGraph with_edge(const std::string& from, const std::string& to) const;
    SLGraph without_edge(const std::string& from, const std::string& to) const;

    /// Order-independent digest of labels, roles and edges.
    std::uint64_t fingerprint() const;

    std::string format_path(const Path& path) const;

private:
    void link(NodeId from, NodeId to);

    std::vector<NodeSpec> nodes_;
    std::set<Edge> edges_;
    std::vector<std::vector<NodeId>> parents_;
    std::vector<std::vector<NodeId>> children_;
};

/// A subset of a graph's edges selecting the paths along which a
/// path-specific intervention propagates.
class EdgeSubgraph {
public:
    EdgeSubgraph(const SLGraph& graph, std::set<Edge> edges);
    EdgeSubgraph(const SLGraph& graph,
                 const std::vector<std::pair<std::string, std::string>>& edges);

    static EdgeSubgraph all(const SLGraph& graph);
    static EdgeSubgraph none(const SLGraph& graph);

    bool contains(NodeId from, NodeId to) const { return edges_.count({from, to}) > 0; }
    const std::set<Edge>& edges() const { return edges_; }
    bool empty() const { return edges_.empty(); }
    std::uint64_t graph_fingerprint() const { return fingerprint_; }

    /// Throws PreconditionError unless this subgraph was taken from `graph`.
    void check_belongs_to(const SLGraph& graph) const;

private:
    std::set<Edge> edges_;
    std::uint64_t fingerprint_ = 0;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate_sl_graph(const SLGraph& graph);

/// True iff `z` d-separates `x` from `y`. The three sets must be pairwise
/// disjoint.
bool d_separated(const SLGraph& graph, const NodeSet& x, const NodeSet& y, const NodeSet& z);

/// Shortest simple path from `from` to `to` that is active given `z`;
/// among equally short paths the one with the lexicographically smallest
/// NodeId sequence.
std::optional<Path> shortest_active_path(const SLGraph& graph, NodeId from, NodeId to,
                                         const NodeSet& z);

/// Every simple path from `from` to `to` active given `z`, ordered by length
/// then NodeId sequence. Throws CapacityError beyond `limit` paths.
std::vector<Path> active_paths(const SLGraph& graph, NodeId from, NodeId to, const NodeSet& z,
                               std::size_t limit = 100'000);

/// Parents W of the prediction node that are d-connected to the utility node
/// given the other parents and the prediction itself.
NodeSet requisite_features(const SLGraph& graph);

struct CriterionWitness {
    bool satisfied = false;
    std::optional<NodeId> feature;
    Path path;
};

/// Whether some requisite feature is d-connected (unconditionally) to the
/// sensitive node. The witness carries one such feature and an active path
/// from A to it.
CriterionWitness itv_criterion(const SLGraph& graph);

/// A is not a feature and is d-connected to U given the features.
bool padmissible_extra_condition(const SLGraph& graph);

/// itv_criterion together with padmissible_extra_condition.
bool padmissible_itv_criterion(const SLGraph& graph);

/// Whether `active` contains a directed path A ⇢ W → Ŷ through a requisite
/// feature W; the witness path ends at the prediction node.
CriterionWitness psie_criterion(const SLGraph& graph, const EdgeSubgraph& active);

/// Union of the edges of all directed paths A ⇢ X ⇢ Ŷ and A ⇢ X ⇢ Y.
EdgeSubgraph directed_paths_via(const SLGraph& graph, NodeId mediator);

}  // namespace itv
