#include "itv/loss.hpp"

#include "itv/error.hpp"

namespace itv {

const char* loss_name(LossKind kind) {
    switch (kind) {
        case LossKind::ZeroOne: return "zero_one";
        case LossKind::MeanSquaredError: return "mse";
        case LossKind::CustomTable: return "table";
    }
    return "zero_one";
}

double LossSpec::utility(const Value& target, const Value& prediction) const {
    switch (kind) {
        case LossKind::ZeroOne:
            return same_value(target, prediction) ? 0.0 : -1.0;
        case LossKind::MeanSquaredError: {
            double d = as_double(target) - as_double(prediction);
            return -d * d;
        }
        case LossKind::CustomTable:
            for (const auto& e : table)
                if (same_value(e.target, target) && same_value(e.prediction, prediction)) return e.utility;
            throw PreconditionError("loss table has no entry for (" + to_string(target) + ", " +
                                    to_string(prediction) + ")");
    }
    return 0.0;
}

void LossSpec::check_compatible(const FiniteDomain& target, const FiniteDomain& prediction) const {
    switch (kind) {
        case LossKind::ZeroOne:
            for (const auto& y : target.values())
                if (!prediction.contains(y))
                    throw PreconditionError("zero-one loss needs every target value in the prediction "
                                            "domain; missing " + to_string(y));
            return;
        case LossKind::MeanSquaredError:
            if (!target.all_numeric() || !prediction.all_numeric())
                throw PreconditionError("squared-error loss needs numeric target and prediction domains");
            return;
        case LossKind::CustomTable:
            for (const auto& y : target.values())
                for (const auto& p : prediction.values()) utility(y, p);
            return;
    }
}

}  // namespace itv
