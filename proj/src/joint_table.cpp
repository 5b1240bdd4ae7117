#include "itv/joint_table.hpp"

#include <cmath>

#include "itv/error.hpp"

namespace itv {

JointTable::JointTable(std::vector<Variable> variables, std::vector<double> probabilities)
    : variables_(std::move(variables)), probs_(std::move(probabilities)) {
    std::size_t cells = 1;
    strides_.assign(variables_.size(), 1);
    for (std::size_t i = variables_.size(); i-- > 0;) {
        if (variables_[i].domain.empty())
            throw PreconditionError("variable '" + variables_[i].name + "' has an empty domain");
        strides_[i] = cells;
        cells *= variables_[i].domain.size();
    }
    if (cells != probs_.size())
        throw PreconditionError("joint table expects " + std::to_string(cells) + " cells, got " +
                                std::to_string(probs_.size()));
    for (double p : probs_)
        if (!(p >= 0.0)) throw PreconditionError("joint table entries must be non-negative");
}

std::optional<std::size_t> JointTable::find(const std::string& name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
        if (variables_[i].name == name) return i;
    return std::nullopt;
}

std::size_t JointTable::index_of(const std::string& name) const {
    if (auto i = find(name)) return *i;
    throw PreconditionError("joint table has no variable '" + name + "'");
}

std::size_t JointTable::index_of(NodeRole role) const {
    for (std::size_t i = 0; i < variables_.size(); ++i)
        if (variables_[i].role == role) return i;
    throw PreconditionError(std::string("joint table has no ") + role_name(role) + " variable");
}

std::vector<std::size_t> JointTable::decode(std::size_t cell) const {
    std::vector<std::size_t> out(variables_.size());
    for (std::size_t i = 0; i < variables_.size(); ++i)
        out[i] = (cell / strides_[i]) % variables_[i].domain.size();
    return out;
}

std::size_t JointTable::encode(const std::vector<std::size_t>& assignment) const {
    std::size_t cell = 0;
    for (std::size_t i = 0; i < variables_.size(); ++i) cell += assignment[i] * strides_[i];
    return cell;
}

double JointTable::total_mass() const {
    double total = 0.0;
    for (double p : probs_) total += p;
    return total;
}

JointTable JointTable::marginal(const std::vector<std::string>& names) const {
    std::vector<std::size_t> picked;
    std::vector<Variable> vars;
    for (const auto& n : names) {
        picked.push_back(index_of(n));
        vars.push_back(variables_[picked.back()]);
    }
    std::size_t cells = 1;
    for (const auto& v : vars) cells *= v.domain.size();
    std::vector<double> probs(cells, 0.0);
    JointTable shape(vars, probs);
    std::vector<std::size_t> sub(picked.size());
    for (std::size_t c = 0; c < probs_.size(); ++c) {
        if (probs_[c] == 0.0) continue;
        auto full = decode(c);
        for (std::size_t i = 0; i < picked.size(); ++i) sub[i] = full[picked[i]];
        probs[shape.encode(sub)] += probs_[c];
    }
    return JointTable(std::move(vars), std::move(probs));
}

std::vector<std::pair<std::size_t, std::size_t>> JointTable::resolve(const Assignment& event) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& [name, value] : event) {
        std::size_t var = index_of(name);
        auto idx = variables_[var].domain.index_of(value);
        if (!idx)
            throw PreconditionError("value '" + to_string(value) + "' is not in the domain of '" +
                                    name + "'");
        out.emplace_back(var, *idx);
    }
    return out;
}

bool JointTable::matches(const std::vector<std::size_t>& cell,
                         const std::vector<std::pair<std::size_t, std::size_t>>& event) const {
    for (const auto& [var, idx] : event)
        if (cell[var] != idx) return false;
    return true;
}

double JointTable::probability(const Assignment& event) const {
    auto resolved = resolve(event);
    double total = 0.0;
    for (std::size_t c = 0; c < probs_.size(); ++c)
        if (probs_[c] != 0.0 && matches(decode(c), resolved)) total += probs_[c];
    return total;
}

JointTable JointTable::conditional(const std::vector<std::string>& targets,
                                   const Assignment& event) const {
    auto resolved = resolve(event);
    std::vector<double> masked(probs_.size(), 0.0);
    double mass = 0.0;
    for (std::size_t c = 0; c < probs_.size(); ++c)
        if (probs_[c] != 0.0 && matches(decode(c), resolved)) {
            masked[c] = probs_[c];
            mass += probs_[c];
        }
    if (!(mass > 0.0)) throw UndefinedConditionalError("conditioning event has probability zero");
    JointTable restricted(variables_, std::move(masked));
    JointTable out = restricted.marginal(targets);
    for (auto& p : out.probs_) p /= mass;
    return out;
}

double JointTable::expectation(const std::string& name, const Assignment& event) const {
    auto resolved = resolve(event);
    const std::size_t var = index_of(name);
    const auto& domain = variables_[var].domain;
    if (!domain.all_numeric())
        throw PreconditionError("expectation of non-numeric variable '" + name + "'");
    double mass = 0.0, weighted = 0.0;
    for (std::size_t c = 0; c < probs_.size(); ++c) {
        if (probs_[c] == 0.0) continue;
        auto cell = decode(c);
        if (!matches(cell, resolved)) continue;
        mass += probs_[c];
        weighted += probs_[c] * as_double(domain[cell[var]]);
    }
    if (!(mass > 0.0)) throw UndefinedConditionalError("conditioning event has probability zero");
    return weighted / mass;
}

}  // namespace itv
