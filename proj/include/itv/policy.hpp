#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "itv/loss.hpp"
#include "itv/scm.hpp"
#include "itv/value.hpp"

namespace itv {

/// Deterministic predictor: one output per assignment of the prediction
/// node's parents (rows ordered as in StructuralModel::row_of). Rows whose
/// feature assignment has zero probability are flagged unreachable and carry
/// the smallest prediction-domain value.
class Policy {
public:
    Policy() = default;
    Policy(std::vector<Value> actions, std::vector<bool> reachable);

    std::size_t row_count() const { return actions_.size(); }
    const Value& action(std::size_t row) const { return actions_.at(row); }
    bool reachable(std::size_t row) const { return reachable_.at(row); }
    const std::vector<Value>& actions() const { return actions_; }
    const std::vector<bool>& reachability() const { return reachable_; }

    /// Equal outputs on every row (numeric values compared exactly).
    bool operator==(const Policy& other) const;

private:
    std::vector<Value> actions_;
    std::vector<bool> reachable_;
};

struct PolicySet {
    std::vector<Policy> members;
};

struct SolverOptions {
    /// Tie band for row argmax and expected-utility comparisons.
    double tolerance = 1e-9;
    /// Bound on enumerated or returned policies.
    std::uint64_t max_policies = 1'000'000;
    InferenceOptions inference;
};

/// Rows of the prediction node's parent space with positive probability.
std::vector<bool> reachable_rows(const StructuralModel& model, const InferenceOptions& options = {});

/// Tabulates `rule` (called with the parent values of each row) into a policy.
Policy tabulate_policy(const StructuralModel& model,
                       const std::function<Value(const std::vector<Value>&)>& rule,
                       const InferenceOptions& options = {});

/// Joint mass P(features = row, Y = y) laid out as [row][y].
std::vector<std::vector<double>> feature_target_mass(const StructuralModel& model,
                                                     const InferenceOptions& options = {});

/// E[f_U(Y, Ŷ)] under the model with `policy` substituted for Ŷ.
double expected_utility(const StructuralModel& model, const Policy& policy,
                        const InferenceOptions& options = {});
/// Same, scored with `loss` instead of the model's own loss.
double expected_utility(const StructuralModel& model, const Policy& policy, const LossSpec& loss,
                        const InferenceOptions& options = {});

/// The conditional-expectation predictor E[Y | features].
Policy p_admissible_policy(const StructuralModel& model, const InferenceOptions& options = {});

/// All zero-one optimal policies: on each reachable row, every label
/// maximising P(Y = label | row) within the tolerance.
PolicySet optimal_policies_zero_one(const StructuralModel& model, const SolverOptions& options = {});

/// Scores every deterministic policy over `prediction_domain` on the
/// reachable rows and returns all within tolerance of the best.
PolicySet optimal_policies_bruteforce(const StructuralModel& model, const LossSpec& loss,
                                      const FiniteDomain& prediction_domain,
                                      const SolverOptions& options = {});

struct PolicyRow {
    std::vector<Value> features;
    Value action;
    bool reachable = true;
};

std::vector<PolicyRow> describe_policy(const StructuralModel& model, const Policy& policy);

}  // namespace itv
