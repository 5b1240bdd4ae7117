#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "itv/experiments.hpp"
#include "itv/graph.hpp"
#include "itv/loss.hpp"
#include "itv/scm.hpp"

namespace itv {

inline constexpr const char* kToolName = "itv_audit";
inline constexpr const char* kToolVersion = "1.0.0";

struct CriteriaOptions {
    bool padmissible = false;
    std::vector<std::string> psie_via;
};

struct AuditOptions {
    /// Overrides the model's own loss when set.
    std::optional<LossKind> loss;
    std::vector<std::string> psie_via;
    bool all_optima = false;
    double tolerance = 1e-9;
    std::uint64_t capacity = 100'000'000;
    std::optional<std::uint64_t> seed;
};

/// Theorem 1 (always), Theorem 2 (when requested) and Theorem 3 for each
/// mediator, with witnesses.
nlohmann::json criteria_report(const SLGraph& graph, const CriteriaOptions& options);

/// Solves the optimal policy for the chosen loss and reports criteria,
/// policy rows, fairness measures, and PSIE per mediator.
nlohmann::json audit_report(const StructuralModel& model, const GroupSpec& groups, const AuditOptions& options);

struct ReferenceCheck {
    std::string quantity;
    double reference = 0.0;
    double computed = 0.0;
    /// Half a unit in the last printed digit of the reference value.
    double printed_precision = 0.0;
};

/// Published statistics for a worked example next to our exact values.
std::vector<ReferenceCheck> reference_checks(ExampleId id);

/// audit_report on the fixture (PSIE via its mediator, all optima) plus its
/// reference checks.
nlohmann::json example_report(ExampleId id, const AuditOptions& options);

nlohmann::json experiment_summary(const ExperimentResult& result);
nlohmann::json record_json(const SampleRecord& record);

nlohmann::json witness_json(const Witness& witness);

/// Human-readable rendering of any report produced above.
std::string render_text(const nlohmann::json& report);

/// Compact decimal for display: six significant digits, tiny values as 0.
std::string format_number(double x);

}  // namespace itv
