#include "itv/metrics.hpp"

#include <cmath>

#include "itv/error.hpp"

namespace itv {

namespace {

std::string name_of(const JointTable& joint, NodeRole role) {
    return joint.variables()[joint.index_of(role)].name;
}

double marginal_entropy(const JointTable& joint, const std::vector<std::string>& names) {
    return entropy_bits(joint.marginal(names));
}

}  // namespace

const char* classification_name(Classification c) {
    switch (c) {
        case Classification::Introduced: return "introduced";
        case Classification::Reproduced: return "reproduced";
        case Classification::Reduced: return "reduced";
    }
    return "reproduced";
}

Classification classify(double itv, double tolerance) {
    if (itv > tolerance) return Classification::Introduced;
    if (itv < -tolerance) return Classification::Reduced;
    return Classification::Reproduced;
}

double atv(const JointTable& joint, const std::string& variable, const GroupSpec& groups) {
    const std::string a = name_of(joint, NodeRole::Sensitive);
    if (same_value(groups.a0, groups.a1)) throw PreconditionError("group values a0 and a1 must differ");
    for (const auto& g : {groups.a0, groups.a1})
        if (!(joint.probability({{a, g}}) > 0.0))
            throw UndefinedConditionalError("group " + a + "=" + to_string(g) + " has zero probability");
    return joint.expectation(variable, {{a, groups.a1}}) - joint.expectation(variable, {{a, groups.a0}});
}

ItvResult itv(const JointTable& joint, const GroupSpec& groups, double tolerance) {
    ItvResult r;
    r.atv_target = atv(joint, name_of(joint, NodeRole::Target), groups);
    r.atv_prediction = atv(joint, name_of(joint, NodeRole::Prediction), groups);
    r.value = std::abs(r.atv_prediction) - std::abs(r.atv_target);
    r.classification = classify(r.value, tolerance);
    return r;
}

ItvResult itv(const StructuralModel& model, const Policy& policy, const GroupSpec& groups, double tolerance,
              const InferenceOptions& options) {
    return itv(joint_distribution(model, policy, options), groups, tolerance);
}

double entropy_bits(const JointTable& joint) {
    double h = 0.0;
    for (double p : joint.probabilities())
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

InfoSuite info_suite(const JointTable& joint) {
    const std::string a = name_of(joint, NodeRole::Sensitive);
    const std::string y = name_of(joint, NodeRole::Target);
    const std::string yhat = name_of(joint, NodeRole::Prediction);
    InfoSuite s;
    s.h_a = marginal_entropy(joint, {a});
    s.h_y = marginal_entropy(joint, {y});
    s.h_yhat = marginal_entropy(joint, {yhat});
    s.h_a_y = marginal_entropy(joint, {a, y});
    s.h_a_yhat = marginal_entropy(joint, {a, yhat});
    s.h_y_yhat = marginal_entropy(joint, {y, yhat});
    s.h_a_y_yhat = marginal_entropy(joint, {a, y, yhat});
    s.independence_gap = s.h_yhat + s.h_a - s.h_a_yhat;
    s.legacy = s.h_y + s.h_a - s.h_a_y;
    s.separation_gap = s.h_y_yhat + s.h_a_y - s.h_a_y_yhat - s.h_y;
    s.sufficiency_gap = s.h_y_yhat + s.h_a_yhat - s.h_a_y_yhat - s.h_yhat;
    s.imi = s.independence_gap - s.legacy;
    return s;
}

IndependenceCheck separation_holds(const JointTable& joint, double eps) {
    const double gap = info_suite(joint).separation_gap;
    return {gap <= eps, gap};
}

IndependenceCheck sufficiency_holds(const JointTable& joint, double eps) {
    const double gap = info_suite(joint).sufficiency_gap;
    return {gap <= eps, gap};
}

PsieResult psie(const StructuralModel& model, const Policy& policy, const EdgeSubgraph& active,
                const GroupSpec& groups, const InferenceOptions& options) {
    const auto r = path_specific_response(model, policy, active, groups.a0, groups.a1, options);
    const auto& g = model.graph();
    const std::string yhat = g.label(model.prediction());
    const std::string y = g.label(model.target());
    PsieResult out;
    out.pse_prediction = r.response.expectation(yhat) - r.baseline.expectation(yhat);
    out.pse_target = r.response.expectation(y) - r.baseline.expectation(y);
    out.value = std::abs(out.pse_prediction) - std::abs(out.pse_target);
    out.coupling_dependent = r.coupling_dependent;
    return out;
}

FairnessReport fairness_report(const JointTable& joint, const GroupSpec& groups, double tolerance) {
    FairnessReport r;
    const auto t = itv(joint, groups, tolerance);
    r.atv_y = t.atv_target;
    r.atv_yhat = t.atv_prediction;
    r.itv = t.value;
    r.classification = t.classification;
    r.info = info_suite(joint);
    r.separation = {r.info.separation_gap <= tolerance, r.info.separation_gap};
    r.sufficiency = {r.info.sufficiency_gap <= tolerance, r.info.sufficiency_gap};
    r.imi = r.info.imi;
    r.independence_gap = r.info.independence_gap;
    r.legacy = r.info.legacy;
    return r;
}

}  // namespace itv
