#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "itv/graph.hpp"
#include "itv/value.hpp"

namespace itv {

struct Variable {
    std::string name;
    NodeRole role = NodeRole::Chance;
    FiniteDomain domain;
};

/// Partial assignment by variable name.
using Assignment = std::vector<std::pair<std::string, Value>>;

/// Dense probability table over the product of finite domains. Cells are laid
/// out row-major with the last variable varying fastest.
class JointTable {
public:
    JointTable() = default;
    JointTable(std::vector<Variable> variables, std::vector<double> probabilities);

    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<double>& probabilities() const { return probs_; }
    std::size_t cell_count() const { return probs_.size(); }

    std::optional<std::size_t> find(const std::string& name) const;
    std::size_t index_of(const std::string& name) const;
    /// Index of the first variable with `role`; throws PreconditionError if none.
    std::size_t index_of(NodeRole role) const;

    std::vector<std::size_t> decode(std::size_t cell) const;
    std::size_t encode(const std::vector<std::size_t>& assignment) const;

    double total_mass() const;

    /// Marginal over `names`, in the given order.
    JointTable marginal(const std::vector<std::string>& names) const;

    /// Probability of a partial assignment.
    double probability(const Assignment& event) const;

    /// Normalised table over `targets` given `event`.
    /// Throws UndefinedConditionalError when the event has zero mass.
    JointTable conditional(const std::vector<std::string>& targets, const Assignment& event) const;

    /// E[name | event] for a numeric variable.
    double expectation(const std::string& name, const Assignment& event = {}) const;

private:
    std::vector<std::pair<std::size_t, std::size_t>> resolve(const Assignment& event) const;
    bool matches(const std::vector<std::size_t>& cell,
                 const std::vector<std::pair<std::size_t, std::size_t>>& event) const;

    std::vector<Variable> variables_;
    std::vector<double> probs_;
    std::vector<std::size_t> strides_;
};

}  // namespace itv
