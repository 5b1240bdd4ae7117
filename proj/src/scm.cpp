#include "itv/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "itv/error.hpp"
#include "itv/policy.hpp"

namespace itv {

namespace {

constexpr double kExogenousSumTolerance = 1e-12;
constexpr double kCptRowTolerance = 1e-9;
constexpr double kBreakpointMerge = 1e-15;

std::uint64_t checked_product(const std::vector<std::size_t>& sizes, std::uint64_t cap,
                              const char* what) {
    std::uint64_t total = 1;
    for (auto s : sizes) {
        if (s != 0 && total > cap / s)
            throw CapacityError(std::string(what) + " exceeds the state-space cap of " +
                                std::to_string(cap));
        total *= s;
    }
    if (total > cap)
        throw CapacityError(std::string(what) + " exceeds the state-space cap of " + std::to_string(cap));
    return total;
}

std::vector<Variable> variables_for(const StructuralModel& model, const std::vector<NodeId>& nodes) {
    std::vector<Variable> vars;
    for (auto n : nodes)
        vars.push_back({model.graph().label(n), model.graph().role(n), model.domain(n)});
    return vars;
}

// Dense joint over `nodes` (a topologically closed prefix of the evaluation
// order) by the chain rule over per-node conditional tables.
JointTable dense_joint(const StructuralModel& model, const std::vector<NodeId>& nodes,
                       const InferenceOptions& options) {
    std::vector<std::size_t> sizes;
    for (auto n : nodes) {
        if (!model.mechanism(n))
            throw PreconditionError("node '" + model.graph().label(n) + "' has no mechanism bound");
        sizes.push_back(model.domain(n).size());
    }
    const std::uint64_t cells = checked_product(sizes, options.capacity, "joint table");

    std::vector<std::vector<std::vector<double>>> cond;
    for (auto n : nodes) cond.push_back(model.conditional_table(n));

    std::vector<double> probs(cells, 0.0);
    std::vector<std::size_t> values(model.graph().size(), 0);
    std::vector<std::size_t> digits(nodes.size(), 0);
    for (std::uint64_t c = 0; c < cells; ++c) {
        double p = 1.0;
        for (std::size_t k = 0; k < nodes.size() && p != 0.0; ++k) {
            values[nodes[k].index] = digits[k];
            p *= cond[k][model.row_of(nodes[k], values)][digits[k]];
        }
        probs[c] = p;
        for (std::size_t k = nodes.size(); k-- > 0;) {
            if (++digits[k] < sizes[k]) break;
            digits[k] = 0;
        }
    }
    return JointTable(variables_for(model, nodes), std::move(probs));
}

}  // namespace

Mechanism Mechanism::constant(std::size_t rows, std::size_t value) {
    Mechanism m;
    m.exogenous.domain = FiniteDomain{Value{std::int64_t{0}}};
    m.exogenous.probs = {1.0};
    m.table.assign(rows, value);
    return m;
}

StructuralModel::StructuralModel(SLGraph graph, std::vector<FiniteDomain> domains,
                                 std::vector<std::optional<Mechanism>> mechanisms, LossSpec loss)
    : graph_(std::move(graph)),
      domains_(std::move(domains)),
      mechanisms_(std::move(mechanisms)),
      loss_(std::move(loss)) {
    if (domains_.size() != graph_.size() || mechanisms_.size() != graph_.size())
        throw PreconditionError("model needs one domain and one mechanism slot per node");
    auto report = validate_sl_graph(graph_);
    if (!report.ok()) {
        std::string msg = "invalid SL graph:";
        for (const auto& v : report.violations) msg += " " + v + ";";
        throw PreconditionError(msg);
    }
    for (auto n : graph_.nodes()) {
        const auto& label = graph_.label(n);
        const NodeRole role = graph_.role(n);
        const auto& mech = mechanisms_[n.index];
        if (role == NodeRole::Utility) {
            if (mech) throw PreconditionError("utility node '" + label + "' cannot carry a mechanism");
            continue;
        }
        if (domains_[n.index].empty() && (role != NodeRole::Prediction || mech))
            throw PreconditionError("node '" + label + "' has an empty domain");
        if (!mech) {
            if (role != NodeRole::Prediction)
                throw PreconditionError("node '" + label + "' has no structural function");
            continue;
        }
        const auto& exo = mech->exogenous;
        if (exo.domain.size() != exo.probs.size() || exo.probs.empty())
            throw PreconditionError("exogenous noise of '" + label + "' is malformed");
        double sum = 0.0;
        for (double p : exo.probs) {
            if (!(p >= 0.0)) throw PreconditionError("negative exogenous probability at '" + label + "'");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kExogenousSumTolerance)
            throw PreconditionError("exogenous probabilities of '" + label + "' do not sum to 1");
        if (mech->table.size() != row_count(n) * exo.probs.size())
            throw PreconditionError("structural table of '" + label + "' is not total");
        for (auto v : mech->table)
            if (v >= domains_[n.index].size())
                throw PreconditionError("structural table of '" + label + "' leaves its domain");
    }
    for (auto n : graph_.topological_order())
        if (graph_.role(n) != NodeRole::Utility) order_.push_back(n);
}

bool StructuralModel::has_cpt_coupling() const {
    for (const auto& m : mechanisms_)
        if (m && m->source_cpt) return true;
    return false;
}

std::size_t StructuralModel::row_count(NodeId id) const {
    std::size_t rows = 1;
    for (auto p : graph_.parents(id)) rows *= domains_[p.index].size();
    return rows;
}

std::size_t StructuralModel::row_of(NodeId id, const std::vector<std::size_t>& values) const {
    std::size_t row = 0;
    for (auto p : graph_.parents(id)) row = row * domains_[p.index].size() + values[p.index];
    return row;
}

std::vector<std::size_t> StructuralModel::decode_row(NodeId id, std::size_t row) const {
    const auto& parents = graph_.parents(id);
    std::vector<std::size_t> out(parents.size());
    for (std::size_t k = parents.size(); k-- > 0;) {
        const std::size_t size = domains_[parents[k].index].size();
        out[k] = row % size;
        row /= size;
    }
    return out;
}

std::vector<std::vector<double>> StructuralModel::conditional_table(NodeId id) const {
    const auto& mech = mechanisms_.at(id.index);
    if (!mech) throw PreconditionError("node '" + graph_.label(id) + "' has no mechanism bound");
    const std::size_t rows = row_count(id);
    const std::size_t noise = mech->exogenous.probs.size();
    std::vector<std::vector<double>> out(rows, std::vector<double>(domains_[id.index].size(), 0.0));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t e = 0; e < noise; ++e)
            out[r][mech->table[r * noise + e]] += mech->exogenous.probs[e];
    return out;
}

StructuralModel StructuralModel::with_loss(LossSpec loss) const {
    StructuralModel copy = *this;
    copy.loss_ = std::move(loss);
    return copy;
}

StructuralModel StructuralModel::with_prediction_features(const NodeSet& features) const {
    const NodeId yhat = prediction();
    const auto& current = graph_.parents(yhat);
    for (auto f : features)
        if (std::find(current.begin(), current.end(), f) == current.end())
            throw PreconditionError("'" + graph_.label(f) + "' is not a feature of the prediction node");
    std::vector<SLGraph::NodeSpec> nodes;
    for (auto n : graph_.nodes()) nodes.push_back({graph_.label(n), graph_.role(n)});
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& [a, b] : graph_.edges())
        if (b != yhat || features.count(a)) edges.emplace_back(graph_.label(a), graph_.label(b));
    auto mechanisms = mechanisms_;
    mechanisms[yhat.index].reset();
    return StructuralModel(SLGraph(std::move(nodes), edges), domains_, std::move(mechanisms), loss_);
}

StructuralModel StructuralModel::with_mechanism(NodeId id, FiniteDomain domain, Mechanism mechanism) const {
    auto domains = domains_;
    auto mechanisms = mechanisms_;
    domains.at(id.index) = std::move(domain);
    mechanisms.at(id.index) = std::move(mechanism);
    return StructuralModel(graph_, std::move(domains), std::move(mechanisms), loss_);
}

StructuralModel bind_policy(const StructuralModel& model, const Policy& policy) {
    const NodeId yhat = model.prediction();
    const std::size_t rows = model.row_count(yhat);
    if (policy.row_count() != rows)
        throw PreconditionError("policy has " + std::to_string(policy.row_count()) + " rows, expected " +
                                std::to_string(rows));
    FiniteDomain domain = model.domain(yhat);
    Mechanism mech = Mechanism::constant(rows, 0);
    for (std::size_t r = 0; r < rows; ++r) mech.table[r] = domain.insert(policy.action(r));
    return model.with_mechanism(yhat, std::move(domain), std::move(mech));
}

JointTable joint_distribution(const StructuralModel& model, const InferenceOptions& options) {
    return dense_joint(model, model.evaluation_order(), options);
}

JointTable joint_distribution(const StructuralModel& model, const Policy& policy,
                              const InferenceOptions& options) {
    return joint_distribution(bind_policy(model, policy), options);
}

JointTable feature_joint(const StructuralModel& model, const InferenceOptions& options) {
    std::vector<NodeId> nodes;
    for (auto n : model.evaluation_order())
        if (n != model.prediction()) nodes.push_back(n);
    return dense_joint(model, nodes, options);
}

StructuralModel intervene(const StructuralModel& model, const std::map<std::string, Value>& assignment) {
    StructuralModel out = model;
    for (const auto& [label, value] : assignment) {
        const NodeId n = model.graph().id(label);
        if (model.graph().role(n) == NodeRole::Utility)
            throw PreconditionError("cannot intervene on the utility node");
        auto idx = out.domain(n).index_of(value);
        if (!idx)
            throw PreconditionError("value '" + to_string(value) + "' is outside the domain of '" + label + "'");
        out = out.with_mechanism(n, out.domain(n), Mechanism::constant(out.row_count(n), *idx));
    }
    return out;
}

PathSpecificResponse path_specific_response(const StructuralModel& model, const Policy& policy,
                                            const EdgeSubgraph& active, const Value& a0,
                                            const Value& a1, const InferenceOptions& options) {
    const StructuralModel bound = bind_policy(model, policy);
    const SLGraph& g = bound.graph();
    active.check_belongs_to(g);
    const NodeId a = bound.sensitive();
    const auto a0_idx = bound.domain(a).index_of(a0);
    const auto a1_idx = bound.domain(a).index_of(a1);
    if (!a0_idx || !a1_idx) throw PreconditionError("group values must lie in the sensitive domain");

    const auto& order = bound.evaluation_order();
    std::vector<std::size_t> position(g.size(), 0);
    for (std::size_t k = 0; k < order.size(); ++k) position[order[k].index] = k;

    // Key layout: (baseline, active) value index pairs in evaluation order.
    using Key = std::vector<std::uint32_t>;
    std::map<Key, double> states{{Key{}, 1.0}};
    std::vector<std::size_t> base_vals(g.size()), act_vals(g.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const NodeId n = order[k];
        std::map<Key, double> next;
        for (const auto& [key, mass] : states) {
            auto emit = [&](std::size_t b, std::size_t v, double p) {
                Key extended = key;
                extended.push_back(static_cast<std::uint32_t>(b));
                extended.push_back(static_cast<std::uint32_t>(v));
                next[std::move(extended)] += mass * p;
            };
            if (n == a) {
                emit(*a0_idx, *a1_idx, 1.0);
                continue;
            }
            for (auto p : g.parents(n)) {
                base_vals[p.index] = key[2 * position[p.index]];
                act_vals[p.index] = active.contains(p, n) ? key[2 * position[p.index] + 1]
                                                          : key[2 * position[p.index]];
            }
            const auto& mech = *bound.mechanism(n);
            const std::size_t noise = mech.exogenous.probs.size();
            const std::size_t base_row = bound.row_of(n, base_vals);
            const std::size_t act_row = bound.row_of(n, act_vals);
            for (std::size_t e = 0; e < noise; ++e) {
                const double p = mech.exogenous.probs[e];
                if (p == 0.0) continue;
                emit(mech.table[base_row * noise + e], mech.table[act_row * noise + e], p);
            }
        }
        if (next.size() > options.capacity)
            throw CapacityError("paired-world enumeration exceeds the state-space cap of " +
                                std::to_string(options.capacity));
        states = std::move(next);
    }

    std::vector<std::size_t> sizes;
    for (auto n : order) sizes.push_back(bound.domain(n).size());
    const std::uint64_t cells = checked_product(sizes, options.capacity, "joint table");
    auto vars = variables_for(bound, order);
    JointTable shape(vars, std::vector<double>(cells, 0.0));
    std::vector<double> response(cells, 0.0), baseline(cells, 0.0);
    std::vector<std::size_t> base_cell(order.size()), act_cell(order.size());
    for (const auto& [key, mass] : states) {
        for (std::size_t k = 0; k < order.size(); ++k) {
            base_cell[k] = key[2 * k];
            act_cell[k] = key[2 * k + 1];
        }
        response[shape.encode(act_cell)] += mass;
        baseline[shape.encode(base_cell)] += mass;
    }

    bool coupling_dependent = false;
    if (bound.has_cpt_coupling()) {
        for (auto n : order) {
            if (n == a) continue;
            bool in_p = false, out_p = false;
            for (auto c : g.children(n)) {
                if (g.role(c) == NodeRole::Utility) continue;
                (active.contains(n, c) ? in_p : out_p) = true;
            }
            if (!in_p || !out_p) continue;
            const std::size_t k = position[n.index];
            for (const auto& [key, mass] : states)
                if (mass > 0.0 && key[2 * k] != key[2 * k + 1]) {
                    coupling_dependent = true;
                    break;
                }
            if (coupling_dependent) break;
        }
    }
    return {JointTable(vars, std::move(response)), JointTable(std::move(vars), std::move(baseline)),
            coupling_dependent};
}

PathSpecificEffect pse(const StructuralModel& model, const Policy& policy, const EdgeSubgraph& active,
                       const std::string& node, const Value& a0, const Value& a1,
                       const InferenceOptions& options) {
    auto r = path_specific_response(model, policy, active, a0, a1, options);
    return {r.response.expectation(node) - r.baseline.expectation(node), r.coupling_dependent};
}

std::vector<double> cpt_breakpoint_masses(const Cpt& cpt) {
    std::vector<double> points{0.0, 1.0};
    for (const auto& row : cpt.rows) {
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < row.size(); ++i) {
            cum += row[i];
            if (cum > 0.0 && cum < 1.0) points.push_back(cum);
        }
    }
    std::sort(points.begin(), points.end());
    std::vector<double> merged{points.front()};
    for (double p : points)
        if (p - merged.back() > kBreakpointMerge) merged.push_back(p);
    merged.back() = 1.0;
    std::vector<double> masses;
    for (std::size_t i = 1; i < merged.size(); ++i) masses.push_back(merged[i] - merged[i - 1]);
    return masses;
}

Mechanism cpt_mechanism(const Cpt& cpt, std::size_t k) {
    const std::size_t rows = cpt.rows.size();
    const auto masses = cpt_breakpoint_masses(cpt);
    Mechanism mech;
    std::vector<Value> noise_values;
    for (std::size_t e = 0; e < masses.size(); ++e) noise_values.emplace_back(std::int64_t(e));
    mech.exogenous.domain = FiniteDomain(std::move(noise_values));
    mech.exogenous.probs = masses;
    mech.table.assign(rows * masses.size(), 0);
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> cum(k);
        std::partial_sum(cpt.rows[r].begin(), cpt.rows[r].end(), cum.begin());
        cum.back() = 1.0;
        double left = 0.0;
        for (std::size_t e = 0; e < masses.size(); ++e) {
            const double mid = left + masses[e] / 2.0;
            left += masses[e];
            std::size_t v = 0;
            while (v + 1 < k && !(cum[v] > mid)) ++v;
            mech.table[r * masses.size() + e] = v;
        }
    }
    mech.source_cpt = cpt;
    return mech;
}

StructuralModel from_cpts(const SLGraph& graph, std::vector<FiniteDomain> domains,
                          const std::vector<std::optional<Cpt>>& cpts, LossSpec loss) {
    if (cpts.size() != graph.size() || domains.size() != graph.size())
        throw PreconditionError("from_cpts needs one CPT slot and one domain per node");
    std::vector<std::optional<Mechanism>> mechanisms(graph.size());
    for (auto n : graph.nodes()) {
        const NodeRole role = graph.role(n);
        if (role == NodeRole::Utility || role == NodeRole::Prediction) continue;
        const auto& label = graph.label(n);
        if (!cpts[n.index]) throw InputError("node '" + label + "' has no CPT");
        const Cpt& cpt = *cpts[n.index];
        std::size_t rows = 1;
        for (auto p : graph.parents(n)) rows *= domains[p.index].size();
        if (cpt.rows.size() != rows)
            throw InputError("CPT of '" + label + "' has " + std::to_string(cpt.rows.size()) +
                             " rows, expected " + std::to_string(rows));
        const std::size_t k = domains[n.index].size();
        for (std::size_t r = 0; r < rows; ++r) {
            const auto& row = cpt.rows[r];
            if (row.size() != k)
                throw InputError("CPT row " + std::to_string(r) + " of '" + label + "' has " +
                                 std::to_string(row.size()) + " entries, expected " + std::to_string(k));
            double sum = 0.0;
            for (double p : row) {
                if (!(p >= 0.0)) throw InputError("negative probability in CPT of '" + label + "'");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kCptRowTolerance)
                throw InputError("CPT row " + std::to_string(r) + " of '" + label + "' sums to " +
                                 std::to_string(sum));
        }

        mechanisms[n.index] = cpt_mechanism(cpt, k);
    }
    return StructuralModel(graph, std::move(domains), std::move(mechanisms), std::move(loss));
}

}  // namespace itv
