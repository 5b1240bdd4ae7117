#pragma once

#include <vector>

#include "itv/value.hpp"

namespace itv {

enum class LossKind { ZeroOne, MeanSquaredError, CustomTable };

const char* loss_name(LossKind kind);

/// Utility attached to the utility node, as a function of (Y, Ŷ). Utilities are
/// negated losses: zero-one gives 0 on a hit and -1 on a miss, squared error
/// gives -(y - ŷ)^2.
struct LossSpec {
    struct Entry {
        Value target;
        Value prediction;
        double utility = 0.0;
    };

    LossKind kind = LossKind::ZeroOne;
    std::vector<Entry> table;

    static LossSpec zero_one() { return {LossKind::ZeroOne, {}}; }
    static LossSpec mean_squared_error() { return {LossKind::MeanSquaredError, {}}; }
    static LossSpec custom(std::vector<Entry> entries) { return {LossKind::CustomTable, std::move(entries)}; }

    double utility(const Value& target, const Value& prediction) const;

    /// Checks the loss against the target and prediction domains. Throws
    /// PreconditionError on mismatch.
    void check_compatible(const FiniteDomain& target, const FiniteDomain& prediction) const;
};

}  // namespace itv
