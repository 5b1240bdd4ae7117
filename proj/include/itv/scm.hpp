#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "itv/graph.hpp"
#include "itv/joint_table.hpp"
#include "itv/loss.hpp"
#include "itv/value.hpp"

namespace itv {

class Policy;

/// Baseline (a0) and marginalised (a1) values of the sensitive variable.
struct GroupSpec {
    Value a0;
    Value a1;
};

/// Finite exogenous noise for one endogenous node.
struct ExogenousSpec {
    FiniteDomain domain;
    std::vector<double> probs;
};

/// Conditional probability table: one row per parent assignment (parents in
/// NodeId order, last parent varying fastest), each a distribution over the
/// node's domain.
struct Cpt {
    std::vector<std::vector<double>> rows;
};

/// Structural function of one node: f(parents, noise) as a total lookup
/// table indexed by `row * noise_size + noise` yielding a domain index.
struct Mechanism {
    ExogenousSpec exogenous;
    std::vector<std::size_t> table;
    /// Present when the mechanism was canonicalised from a CPT.
    std::optional<Cpt> source_cpt;

    static Mechanism constant(std::size_t rows, std::size_t value);
};

struct InferenceOptions {
    /// Upper bound on enumerated states (joint cells or paired-world states).
    std::uint64_t capacity = 100'000'000;
};

/// Finite-domain structural causal model over an SL graph. The prediction
/// node's mechanism may be absent until a policy is bound; the utility node
/// never has one (its value is the loss of (Y, Ŷ)).
class StructuralModel {
public:
    StructuralModel(SLGraph graph, std::vector<FiniteDomain> domains,
                    std::vector<std::optional<Mechanism>> mechanisms, LossSpec loss);

    const SLGraph& graph() const { return graph_; }
    const FiniteDomain& domain(NodeId id) const { return domains_.at(id.index); }
    const std::optional<Mechanism>& mechanism(NodeId id) const { return mechanisms_.at(id.index); }
    const LossSpec& loss() const { return loss_; }

    NodeId sensitive() const { return graph_.require_role(NodeRole::Sensitive); }
    NodeId target() const { return graph_.require_role(NodeRole::Target); }
    NodeId prediction() const { return graph_.require_role(NodeRole::Prediction); }
    NodeId utility() const { return graph_.require_role(NodeRole::Utility); }

    /// Nodes carrying a value in the joint: all but the utility node, in
    /// topological order with NodeId tie-breaks.
    const std::vector<NodeId>& evaluation_order() const { return order_; }

    bool prediction_bound() const { return mechanism(prediction()).has_value(); }
    /// True if any mechanism was canonicalised from a CPT.
    bool has_cpt_coupling() const;

    std::size_t row_count(NodeId id) const;
    /// Row of `id`'s table given a value index for every node.
    std::size_t row_of(NodeId id, const std::vector<std::size_t>& values) const;
    /// Parent value indices for a row, in parent order.
    std::vector<std::size_t> decode_row(NodeId id, std::size_t row) const;

    /// P(node = · | parents) for every row, marginalising the node's noise.
    std::vector<std::vector<double>> conditional_table(NodeId id) const;

    StructuralModel with_loss(LossSpec loss) const;
    /// Copy whose prediction node only sees `features` (a subset of its
    /// current parents). Any bound prediction mechanism is dropped.
    StructuralModel with_prediction_features(const NodeSet& features) const;
    /// Copy with node `id` given a new domain and mechanism.
    StructuralModel with_mechanism(NodeId id, FiniteDomain domain, Mechanism mechanism) const;

private:
    SLGraph graph_;
    std::vector<FiniteDomain> domains_;
    std::vector<std::optional<Mechanism>> mechanisms_;
    LossSpec loss_;
    std::vector<NodeId> order_;
};

/// Substitutes `policy` for the prediction node's mechanism. The prediction
/// domain is widened by any policy outputs not already in it.
StructuralModel bind_policy(const StructuralModel& model, const Policy& policy);

/// Exact joint over every non-utility node. The prediction mechanism must be
/// bound.
JointTable joint_distribution(const StructuralModel& model, const InferenceOptions& options = {});
JointTable joint_distribution(const StructuralModel& model, const Policy& policy,
                              const InferenceOptions& options = {});

/// Exact joint over every node except prediction and utility.
JointTable feature_joint(const StructuralModel& model, const InferenceOptions& options = {});

/// Replaces each named node's mechanism by a constant.
StructuralModel intervene(const StructuralModel& model, const std::map<std::string, Value>& assignment);

struct PathSpecificResponse {
    /// Distribution of every node in the active (a1 along P) world.
    JointTable response;
    /// Distribution of every node under do(A = a0).
    JointTable baseline;
    /// Set when the model came from CPTs and some node feeds both worlds with
    /// differing values, so the result depends on the chosen noise coupling.
    bool coupling_dependent = false;
};

/// Evaluates the baseline world do(A=a0) and the active world do(A=a1) on
/// shared noise; in the active world each input along an edge outside
/// `active` takes its baseline value.
PathSpecificResponse path_specific_response(const StructuralModel& model, const Policy& policy,
                                            const EdgeSubgraph& active, const Value& a0,
                                            const Value& a1, const InferenceOptions& options = {});

struct PathSpecificEffect {
    double value = 0.0;
    bool coupling_dependent = false;
};

/// E[V along active paths] - E[V under do(A=a0)] for a numeric node V.
PathSpecificEffect pse(const StructuralModel& model, const Policy& policy, const EdgeSubgraph& active,
                       const std::string& node, const Value& a0, const Value& a1,
                       const InferenceOptions& options = {});

/// Partition of [0,1] at the union of a CPT's row-cumulative breakpoints,
/// returned as cell masses.
std::vector<double> cpt_breakpoint_masses(const Cpt& cpt);

/// Inverse-CDF mechanism for one node with `domain_size` values. Rows are
/// assumed validated.
Mechanism cpt_mechanism(const Cpt& cpt, std::size_t domain_size);

/// Builds structural form from CPTs with inverse-CDF lookups on a shared
/// uniform noise per node. `cpts` is indexed by NodeId; the prediction and
/// utility entries are ignored.
StructuralModel from_cpts(const SLGraph& graph, std::vector<FiniteDomain> domains,
                          const std::vector<std::optional<Cpt>>& cpts, LossSpec loss);

}  // namespace itv
