#include "itv/policy.hpp"

#include <algorithm>

#include "itv/error.hpp"

namespace itv {

namespace {

Value filler_value(const StructuralModel& model) {
    const auto& domain = model.domain(model.prediction());
    if (domain.empty()) return Value{std::int64_t{0}};
    return domain[domain.smallest_index()];
}

std::vector<Value> parent_values(const StructuralModel& model, std::size_t row) {
    const NodeId yhat = model.prediction();
    const auto idx = model.decode_row(yhat, row);
    const auto& parents = model.graph().parents(yhat);
    std::vector<Value> out;
    for (std::size_t k = 0; k < parents.size(); ++k) out.push_back(model.domain(parents[k])[idx[k]]);
    return out;
}

}  // namespace

Policy::Policy(std::vector<Value> actions, std::vector<bool> reachable)
    : actions_(std::move(actions)), reachable_(std::move(reachable)) {
    if (actions_.size() != reachable_.size())
        throw PreconditionError("policy actions and reachability flags differ in length");
}

bool Policy::operator==(const Policy& other) const {
    if (actions_.size() != other.actions_.size()) return false;
    for (std::size_t r = 0; r < actions_.size(); ++r)
        if (!same_value(actions_[r], other.actions_[r])) return false;
    return true;
}

std::vector<std::vector<double>> feature_target_mass(const StructuralModel& model,
                                                     const InferenceOptions& options) {
    const JointTable joint = feature_joint(model, options);
    const NodeId yhat = model.prediction();
    const NodeId y = model.target();
    const std::size_t y_pos = joint.index_of(model.graph().label(y));
    std::vector<std::size_t> node_of_var;
    for (const auto& v : joint.variables()) node_of_var.push_back(model.graph().id(v.name).index);

    std::vector<std::vector<double>> mass(model.row_count(yhat),
                                          std::vector<double>(model.domain(y).size(), 0.0));
    std::vector<std::size_t> values(model.graph().size(), 0);
    for (std::size_t c = 0; c < joint.cell_count(); ++c) {
        const double p = joint.probabilities()[c];
        if (p == 0.0) continue;
        const auto cell = joint.decode(c);
        for (std::size_t k = 0; k < cell.size(); ++k) values[node_of_var[k]] = cell[k];
        mass[model.row_of(yhat, values)][cell[y_pos]] += p;
    }
    return mass;
}

std::vector<bool> reachable_rows(const StructuralModel& model, const InferenceOptions& options) {
    const auto mass = feature_target_mass(model, options);
    std::vector<bool> out(mass.size());
    for (std::size_t r = 0; r < mass.size(); ++r) {
        double total = 0.0;
        for (double p : mass[r]) total += p;
        out[r] = total > 0.0;
    }
    return out;
}

Policy tabulate_policy(const StructuralModel& model,
                       const std::function<Value(const std::vector<Value>&)>& rule,
                       const InferenceOptions& options) {
    auto reachable = reachable_rows(model, options);
    std::vector<Value> actions;
    for (std::size_t r = 0; r < reachable.size(); ++r) actions.push_back(rule(parent_values(model, r)));
    return Policy(std::move(actions), std::move(reachable));
}

double expected_utility(const StructuralModel& model, const Policy& policy, const LossSpec& loss,
                        const InferenceOptions& options) {
    const JointTable joint = joint_distribution(model, policy, options);
    const std::size_t y = joint.index_of(NodeRole::Target);
    const std::size_t yhat = joint.index_of(NodeRole::Prediction);
    const auto& y_dom = joint.variables()[y].domain;
    const auto& yhat_dom = joint.variables()[yhat].domain;
    double total = 0.0;
    for (std::size_t c = 0; c < joint.cell_count(); ++c) {
        const double p = joint.probabilities()[c];
        if (p == 0.0) continue;
        const auto cell = joint.decode(c);
        total += p * loss.utility(y_dom[cell[y]], yhat_dom[cell[yhat]]);
    }
    return total;
}

double expected_utility(const StructuralModel& model, const Policy& policy, const InferenceOptions& options) {
    return expected_utility(model, policy, model.loss(), options);
}

Policy p_admissible_policy(const StructuralModel& model, const InferenceOptions& options) {
    const auto& y_dom = model.domain(model.target());
    if (!y_dom.all_numeric())
        throw PreconditionError("conditional-expectation predictor needs a numeric target domain");
    const auto mass = feature_target_mass(model, options);
    std::vector<Value> actions;
    std::vector<bool> reachable;
    for (const auto& row : mass) {
        double total = 0.0, weighted = 0.0;
        for (std::size_t y = 0; y < row.size(); ++y) {
            total += row[y];
            weighted += row[y] * as_double(y_dom[y]);
        }
        reachable.push_back(total > 0.0);
        actions.push_back(total > 0.0 ? Value{weighted / total} : filler_value(model));
    }
    return Policy(std::move(actions), std::move(reachable));
}

PolicySet optimal_policies_zero_one(const StructuralModel& model, const SolverOptions& options) {
    const auto& y_dom = model.domain(model.target());
    const auto& yhat_dom = model.domain(model.prediction());
    LossSpec::zero_one().check_compatible(y_dom, yhat_dom);
    const auto mass = feature_target_mass(model, options.inference);

    // Per row: the labels whose conditional hit probability is maximal.
    std::vector<std::vector<Value>> choices;
    std::vector<bool> reachable;
    std::uint64_t combinations = 1;
    for (const auto& row : mass) {
        double total = 0.0;
        for (double p : row) total += p;
        reachable.push_back(total > 0.0);
        if (!(total > 0.0)) {
            choices.push_back({filler_value(model)});
            continue;
        }
        std::vector<double> score(yhat_dom.size(), 0.0);
        for (std::size_t l = 0; l < yhat_dom.size(); ++l)
            if (auto y = y_dom.index_of(yhat_dom[l])) score[l] = row[*y] / total;
        const double best = *std::max_element(score.begin(), score.end());
        std::vector<Value> tied;
        for (std::size_t l = 0; l < yhat_dom.size(); ++l)
            if (score[l] >= best - options.tolerance) tied.push_back(yhat_dom[l]);
        combinations *= tied.size();
        if (combinations > options.max_policies)
            throw CapacityError("zero-one optimum has more than " + std::to_string(options.max_policies) +
                                " tied policies");
        choices.push_back(std::move(tied));
    }

    PolicySet set;
    std::vector<std::size_t> digit(choices.size(), 0);
    while (true) {
        std::vector<Value> actions;
        for (std::size_t r = 0; r < choices.size(); ++r) actions.push_back(choices[r][digit[r]]);
        set.members.emplace_back(std::move(actions), reachable);
        std::size_t r = choices.size();
        while (r-- > 0) {
            if (++digit[r] < choices[r].size()) break;
            digit[r] = 0;
        }
        if (r == static_cast<std::size_t>(-1)) break;
    }
    return set;
}

PolicySet optimal_policies_bruteforce(const StructuralModel& model, const LossSpec& loss,
                                      const FiniteDomain& prediction_domain, const SolverOptions& options) {
    if (prediction_domain.empty()) throw PreconditionError("brute force needs a non-empty prediction domain");
    const auto& y_dom = model.domain(model.target());
    loss.check_compatible(y_dom, prediction_domain);
    const auto mass = feature_target_mass(model, options.inference);

    std::vector<std::size_t> live;
    std::vector<bool> reachable(mass.size(), false);
    for (std::size_t r = 0; r < mass.size(); ++r) {
        double total = 0.0;
        for (double p : mass[r]) total += p;
        if (total > 0.0) {
            reachable[r] = true;
            live.push_back(r);
        }
    }
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < live.size(); ++i) {
        count *= prediction_domain.size();
        if (count > options.max_policies)
            throw CapacityError("brute-force policy space exceeds " + std::to_string(options.max_policies));
    }

    // score[i][a]: contribution of reachable row i when it outputs label a.
    std::vector<std::vector<double>> score(live.size(), std::vector<double>(prediction_domain.size(), 0.0));
    for (std::size_t i = 0; i < live.size(); ++i)
        for (std::size_t a = 0; a < prediction_domain.size(); ++a)
            for (std::size_t y = 0; y < y_dom.size(); ++y)
                score[i][a] += mass[live[i]][y] * loss.utility(y_dom[y], prediction_domain[a]);

    std::vector<double> value(count, 0.0);
    const std::size_t base = prediction_domain.size();
    for (std::uint64_t code = 0; code < count; ++code) {
        std::uint64_t rest = code;
        double total = 0.0;
        for (std::size_t i = live.size(); i-- > 0;) {
            total += score[i][rest % base];
            rest /= base;
        }
        value[code] = total;
    }
    const double best = *std::max_element(value.begin(), value.end());

    const Value filler = prediction_domain[prediction_domain.smallest_index()];
    PolicySet set;
    for (std::uint64_t code = 0; code < count; ++code) {
        if (value[code] < best - options.tolerance) continue;
        std::vector<Value> actions(mass.size(), filler);
        std::uint64_t rest = code;
        for (std::size_t i = live.size(); i-- > 0;) {
            actions[live[i]] = prediction_domain[rest % base];
            rest /= base;
        }
        set.members.emplace_back(std::move(actions), reachable);
    }
    return set;
}

std::vector<PolicyRow> describe_policy(const StructuralModel& model, const Policy& policy) {
    std::vector<PolicyRow> rows;
    for (std::size_t r = 0; r < policy.row_count(); ++r)
        rows.push_back({parent_values(model, r), policy.action(r), policy.reachable(r)});
    return rows;
}

}  // namespace itv
