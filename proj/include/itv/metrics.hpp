#pragma once

#include <string>

#include "itv/graph.hpp"
#include "itv/joint_table.hpp"
#include "itv/policy.hpp"
#include "itv/scm.hpp"

namespace itv {

enum class Classification { Introduced, Reproduced, Reduced };

const char* classification_name(Classification c);

/// Introduced when itv > tolerance, reduced when itv < -tolerance.
Classification classify(double itv, double tolerance = 1e-9);

/// E[V | A = a1] - E[V | A = a0]; the sensitive variable is located by role.
double atv(const JointTable& joint, const std::string& variable, const GroupSpec& groups);

struct ItvResult {
    double atv_target = 0.0;
    double atv_prediction = 0.0;
    double value = 0.0;
    Classification classification = Classification::Reproduced;
};

/// |ATV(Ŷ)| - |ATV(Y)| on a joint holding sensitive, target and prediction
/// variables.
ItvResult itv(const JointTable& joint, const GroupSpec& groups, double tolerance = 1e-9);
ItvResult itv(const StructuralModel& model, const Policy& policy, const GroupSpec& groups,
              double tolerance = 1e-9, const InferenceOptions& options = {});

struct IndependenceCheck {
    bool holds = false;
    double gap = 0.0;
};

/// Ŷ ⊥ A | Y, measured by I(Ŷ; A | Y).
IndependenceCheck separation_holds(const JointTable& joint, double eps = 1e-9);
/// Y ⊥ A | Ŷ, measured by I(Y; A | Ŷ).
IndependenceCheck sufficiency_holds(const JointTable& joint, double eps = 1e-9);

/// Entropies and mutual informations of (A, Y, Ŷ), in bits.
struct InfoSuite {
    double h_a = 0.0;
    double h_y = 0.0;
    double h_yhat = 0.0;
    double h_a_y = 0.0;
    double h_a_yhat = 0.0;
    double h_y_yhat = 0.0;
    double h_a_y_yhat = 0.0;
    double independence_gap = 0.0;  // I(Ŷ; A)
    double legacy = 0.0;            // I(Y; A)
    double separation_gap = 0.0;    // I(Ŷ; A | Y)
    double sufficiency_gap = 0.0;   // I(Y; A | Ŷ)
    double imi = 0.0;               // I(Ŷ; A) - I(Y; A)
};

InfoSuite info_suite(const JointTable& joint);

/// Shannon entropy in bits of a table's full distribution, with 0 log 0 = 0.
double entropy_bits(const JointTable& joint);

struct PsieResult {
    double pse_prediction = 0.0;
    double pse_target = 0.0;
    double value = 0.0;
    bool coupling_dependent = false;
};

/// |PSE(Ŷ)| - |PSE(Y)| along `active`.
PsieResult psie(const StructuralModel& model, const Policy& policy, const EdgeSubgraph& active,
                const GroupSpec& groups, const InferenceOptions& options = {});

struct FairnessReport {
    double atv_y = 0.0;
    double atv_yhat = 0.0;
    double itv = 0.0;
    Classification classification = Classification::Reproduced;
    IndependenceCheck separation;
    IndependenceCheck sufficiency;
    double imi = 0.0;
    double independence_gap = 0.0;
    double legacy = 0.0;
    InfoSuite info;
};

FairnessReport fairness_report(const JointTable& joint, const GroupSpec& groups, double tolerance = 1e-9);

}  // namespace itv
