#include "itv/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "itv/error.hpp"
#include "itv/metrics.hpp"
#include "itv/policy.hpp"

namespace itv {

using json = nlohmann::json;

namespace {

json value_json(const Value& v) {
    if (auto i = std::get_if<std::int64_t>(&v)) return *i;
    if (auto d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json path_json(const SLGraph& g, const Path& p) {
    json out = json::array();
    for (NodeId n : p) out.push_back(g.label(n));
    return out;
}

json witness_entry(const SLGraph& g, const CriterionWitness& w) {
    json out = {{"satisfied", w.satisfied}};
    if (w.feature) {
        out["feature"] = g.label(*w.feature);
        out["path"] = path_json(g, w.path);
        out["path_text"] = g.format_path(w.path);
    }
    return out;
}

json theorem3_entry(const SLGraph& g, const std::string& mediator) {
    const NodeId x = g.id(mediator);
    const EdgeSubgraph sub = directed_paths_via(g, x);
    json edges = json::array();
    for (const auto& [u, v] : sub.edges()) edges.push_back({g.label(u), g.label(v)});
    json out = witness_entry(g, psie_criterion(g, sub));
    out["mediator"] = mediator;
    out["edges"] = edges;
    return out;
}

LossSpec loss_of_kind(const StructuralModel& model, LossKind kind) {
    switch (kind) {
        case LossKind::ZeroOne: return LossSpec::zero_one();
        case LossKind::MeanSquaredError: return LossSpec::mean_squared_error();
        case LossKind::CustomTable:
            if (model.loss().kind != LossKind::CustomTable)
                throw InputError("loss 'table' needs a loss table in the model file");
            return model.loss();
    }
    return model.loss();
}

struct Solved {
    std::string solver;
    PolicySet set;
};

Solved solve(const StructuralModel& model, const SolverOptions& opts) {
    switch (model.loss().kind) {
        case LossKind::ZeroOne: return {"zero_one_argmax", optimal_policies_zero_one(model, opts)};
        case LossKind::MeanSquaredError:
            return {"conditional_expectation", PolicySet{{p_admissible_policy(model, opts.inference)}}};
        case LossKind::CustomTable:
            return {"bruteforce",
                    optimal_policies_bruteforce(model, model.loss(), model.domain(model.prediction()), opts)};
    }
    throw PreconditionError("unknown loss");
}

json policy_json(const StructuralModel& model, const Policy& policy) {
    const SLGraph& g = model.graph();
    json features = json::array();
    for (NodeId p : g.parents(model.prediction())) features.push_back(g.label(p));
    json rows = json::array();
    for (const auto& row : describe_policy(model, policy)) {
        json f = json::array();
        for (const auto& v : row.features) f.push_back(value_json(v));
        rows.push_back({{"features", f}, {"action", value_json(row.action)}, {"reachable", row.reachable}});
    }
    return {{"features", features}, {"rows", rows}};
}

json fairness_json(const FairnessReport& f) {
    return {{"atv_y", f.atv_y},
            {"atv_yhat", f.atv_yhat},
            {"itv", f.itv},
            {"classification", classification_name(f.classification)},
            {"separation", {{"holds", f.separation.holds}, {"gap", f.separation.gap}}},
            {"sufficiency", {{"holds", f.sufficiency.holds}, {"gap", f.sufficiency.gap}}},
            {"imi", f.imi},
            {"independence_gap", f.independence_gap},
            {"legacy", f.legacy}};
}

std::string label_of(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number()) return format_number(v.get<double>());
    return v.dump();
}

std::string num_text(const json& v) {
    if (v.is_null()) return "n/a";
    return format_number(v.get<double>());
}

void render_criteria(std::ostringstream& os, const json& c) {
    const auto& t1 = c.at("theorem1");
    if (t1.at("satisfied").get<bool>()) {
        os << "Theorem 1: SATISFIED (W=" << t1.at("feature").get<std::string>() << ")\n";
        os << "  path: " << t1.at("path_text").get<std::string>() << "\n";
    } else {
        os << "Theorem 1: NOT satisfied\n";
    }
    if (c.contains("theorem2")) {
        const auto& t2 = c.at("theorem2");
        os << "Theorem 2: " << (t2.at("satisfied").get<bool>() ? "SATISFIED" : "NOT satisfied") << "\n";
        os << "  extra condition (A not a feature, d-connected to U given features): "
           << (t2.at("extra_condition").get<bool>() ? "holds" : "fails") << "\n";
    }
    if (c.contains("theorem3"))
        for (const auto& t3 : c.at("theorem3")) {
            os << "Theorem 3 via " << t3.at("mediator").get<std::string>() << ": ";
            if (t3.at("satisfied").get<bool>())
                os << "SATISFIED (" << t3.at("path_text").get<std::string>() << ")\n";
            else
                os << "NOT satisfied\n";
        }
    os << "Requisite features: ";
    const auto& req = c.at("requisite_features");
    if (req.empty()) os << "(none)";
    for (std::size_t i = 0; i < req.size(); ++i) os << (i ? ", " : "") << req[i].get<std::string>();
    os << "\n";
}

void render_audit(std::ostringstream& os, const json& r) {
    render_criteria(os, r.at("criteria"));
    const auto& p = r.at("policy");
    os << "Policy (" << p.at("solver").get<std::string>() << ", loss " << r.at("provenance").at("loss").get<std::string>()
       << "):\n";
    const auto& feats = p.at("features");
    for (const auto& row : p.at("rows")) {
        os << "  ";
        if (feats.empty()) os << "(no features)";
        for (std::size_t k = 0; k < feats.size(); ++k)
            os << (k ? ", " : "") << feats[k].get<std::string>() << "=" << label_of(row.at("features")[k]);
        os << " -> " << label_of(row.at("action"));
        if (!row.at("reachable").get<bool>()) os << " (unreachable)";
        os << "\n";
    }
    os << "Expected utility: " << num_text(p.at("expected_utility")) << "\n";
    const auto& f = r.at("fairness");
    os << "ATV(Y): " << num_text(f.at("atv_y")) << "\n";
    os << "ATV(Yhat): " << num_text(f.at("atv_yhat")) << "\n";
    os << "ITV: " << num_text(f.at("itv")) << " (" << f.at("classification").get<std::string>() << ")\n";
    os << "Separation: " << (f.at("separation").at("holds").get<bool>() ? "holds" : "fails") << " (gap "
       << num_text(f.at("separation").at("gap")) << " bits)\n";
    os << "Sufficiency: " << (f.at("sufficiency").at("holds").get<bool>() ? "holds" : "fails") << " (gap "
       << num_text(f.at("sufficiency").at("gap")) << " bits)\n";
    os << "IMI: " << num_text(f.at("imi")) << " bits (I(Yhat;A) " << num_text(f.at("independence_gap"))
       << ", I(Y;A) " << num_text(f.at("legacy")) << ")\n";
    if (r.contains("all_optima")) {
        const auto& a = r.at("all_optima");
        os << "Optimal policies: " << a.at("count").get<std::size_t>() << " (ITV min " << num_text(a.at("itv_min"))
           << ", max " << num_text(a.at("itv_max")) << ")\n";
    }
    if (r.contains("psie"))
        for (const auto& e : r.at("psie")) {
            os << "PSIE via " << e.at("mediator").get<std::string>() << ": " << num_text(e.at("psie"))
               << " (PSE(Yhat) " << num_text(e.at("pse_prediction")) << ", PSE(Y) " << num_text(e.at("pse_target"))
               << ")";
            if (e.at("coupling_dependent").get<bool>()) os << " [coupling-dependent]";
            os << "\n";
        }
}

}  // namespace

std::string format_number(double x) {
    if (!std::isfinite(x)) return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
    if (std::abs(x) < 1e-12) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

json criteria_report(const SLGraph& graph, const CriteriaOptions& options) {
    json out;
    out["kind"] = "criteria";
    out["theorem1"] = witness_entry(graph, itv_criterion(graph));
    if (options.padmissible)
        out["theorem2"] = {{"satisfied", padmissible_itv_criterion(graph)},
                           {"extra_condition", padmissible_extra_condition(graph)}};
    if (!options.psie_via.empty()) {
        out["theorem3"] = json::array();
        for (const auto& m : options.psie_via) out["theorem3"].push_back(theorem3_entry(graph, m));
    }
    json req = json::array();
    for (NodeId n : requisite_features(graph)) req.push_back(graph.label(n));
    out["requisite_features"] = req;
    return out;
}

json audit_report(const StructuralModel& base, const GroupSpec& groups, const AuditOptions& options) {
    if (!(options.tolerance >= 0.0)) throw InputError("tolerance must be non-negative");
    const StructuralModel model = options.loss ? base.with_loss(loss_of_kind(base, *options.loss)) : base;
    const SLGraph& g = model.graph();
    model.loss().check_compatible(model.domain(model.target()), model.domain(model.prediction()));

    SolverOptions opts;
    opts.tolerance = options.tolerance;
    opts.inference.capacity = options.capacity;

    json out;
    out["kind"] = "audit";
    out["provenance"] = {{"tool", kToolName},
                         {"version", kToolVersion},
                         {"tolerance", options.tolerance},
                         {"capacity", options.capacity},
                         {"seed", options.seed ? json(*options.seed) : json(nullptr)},
                         {"loss", loss_name(model.loss().kind)},
                         {"groups", {{"a0", value_json(groups.a0)}, {"a1", value_json(groups.a1)}}}};
    CriteriaOptions copts{true, options.psie_via};
    out["criteria"] = criteria_report(g, copts);
    out["criteria"].erase("kind");

    const Solved solved = solve(model, opts);
    if (solved.set.members.empty()) throw Error("solver returned no policy");
    const Policy& policy = solved.set.members.front();
    json pj = policy_json(model, policy);
    pj["solver"] = solved.solver;
    pj["expected_utility"] = expected_utility(model, policy, opts.inference);
    out["policy"] = pj;

    const JointTable joint = joint_distribution(model, policy, opts.inference);
    out["fairness"] = fairness_json(fairness_report(joint, groups, options.tolerance));

    if (options.all_optima) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& p : solved.set.members) {
            const double v = itv(model, p, groups, options.tolerance, opts.inference).value;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out["all_optima"] = {{"count", solved.set.members.size()}, {"itv_min", lo}, {"itv_max", hi}};
    }

    if (!options.psie_via.empty()) {
        out["psie"] = json::array();
        for (const auto& m : options.psie_via) {
            const EdgeSubgraph sub = directed_paths_via(g, g.id(m));
            const PsieResult r = psie(model, policy, sub, groups, opts.inference);
            out["psie"].push_back({{"mediator", m},
                                   {"pse_prediction", r.pse_prediction},
                                   {"pse_target", r.pse_target},
                                   {"psie", r.value},
                                   {"coupling_dependent", r.coupling_dependent}});
        }
    }
    return out;
}

std::vector<ReferenceCheck> reference_checks(ExampleId id) {
    std::vector<ReferenceCheck> out;
    auto policy_value = [](const StructuralModel&, const Policy& p, std::size_t row) {
        return as_double(p.action(row));
    };
    switch (id) {
        case ExampleId::HiringV1: {
            const auto ex = load_example(id);
            const auto p = p_admissible_policy(ex.model);
            out.push_back({"policy(D=maths)", 0.51, policy_value(ex.model, p, 0), 5e-3});
            out.push_back({"policy(D=stats)", 0.49, policy_value(ex.model, p, 1), 5e-3});
            out.push_back({"ITV", 0.0, itv(ex.model, p, ex.groups).value, 1e-9});
            break;
        }
        case ExampleId::HiringV2: {
            const auto ex = load_example(id);
            const auto p = optimal_policies_zero_one(ex.model).members.front();
            const auto r = itv(ex.model, p, ex.groups);
            out.push_back({"|ATV(Y)|", 0.012, std::abs(r.atv_target), 5e-4});
            out.push_back({"|ATV(Yhat)|", 0.6, std::abs(r.atv_prediction), 0.05});
            out.push_back({"ITV", 0.588, r.value, 5e-4});
            break;
        }
        case ExampleId::Music:
        case ExampleId::MusicWithA: {
            const auto zo = load_example(ExampleId::Music);
            const auto mse = zo.model.with_loss(LossSpec::mean_squared_error());
            const auto with_a = load_example(ExampleId::MusicWithA);
            const auto p01 = optimal_policies_zero_one(zo.model).members.front();
            const auto padm = p_admissible_policy(mse);
            const auto padm_a = p_admissible_policy(with_a.model);
            // Rows of the with-A policy: parents (A, T) with T fastest.
            out.push_back({"ITV zero_one", 0.05, itv(zo.model, p01, zo.groups).value, 5e-3});
            out.push_back({"ITV mse", 0.04, itv(mse, padm, zo.groups).value, 5e-3});
            out.push_back({"ITV mse with A as feature", 0.0, itv(with_a.model, padm_a, with_a.groups).value, 1e-9});
            out.push_back({"policy mse (T=0)", 0.1, policy_value(mse, padm, 0), 0.05});
            out.push_back({"policy mse (T=1)", 0.905, policy_value(mse, padm, 1), 5e-4});
            out.push_back({"policy mse with A (T=0, A=male)", 0.01, policy_value(with_a.model, padm_a, 0), 5e-3});
            out.push_back({"policy mse with A (T=1, A=male)", 0.907, policy_value(with_a.model, padm_a, 1), 5e-4});
            out.push_back({"policy mse with A (T=0, A=female)", 0.14, policy_value(with_a.model, padm_a, 2), 5e-3});
            out.push_back({"policy mse with A (T=1, A=female)", 0.903, policy_value(with_a.model, padm_a, 3), 5e-4});
            break;
        }
        case ExampleId::Degrees: {
            const auto ex = load_example(id);
            const auto p = p_admissible_policy(ex.model);
            const auto& g = ex.model.graph();
            const auto r = psie(ex.model, p, directed_paths_via(g, g.id("D")), ex.groups);
            out.push_back({"policy(D=maths)", 5.6, policy_value(ex.model, p, 0), 0.05});
            out.push_back({"policy(D=stats)", 4.4, policy_value(ex.model, p, 1), 0.05});
            out.push_back({"PSIE via D", 0.72, r.value, 5e-3});
            out.push_back({"PSE(Y) via D", 0.0, r.pse_target, 1e-9});
            out.push_back({"ITV", -1.28, itv(ex.model, p, ex.groups).value, 5e-3});
            break;
        }
        case ExampleId::DegreesCoding: break;
    }
    return out;
}

json example_report(ExampleId id, const AuditOptions& options) {
    const Example ex = load_example(id);
    AuditOptions opts = options;
    opts.all_optima = true;
    if (ex.mediator && opts.psie_via.empty()) opts.psie_via.push_back(*ex.mediator);
    json out = audit_report(ex.model, ex.groups, opts);
    out["kind"] = "example";
    out["example"] = example_name(id);
    json checks = json::array();
    for (const auto& c : reference_checks(id)) {
        const double diff = c.computed - c.reference;
        checks.push_back({{"quantity", c.quantity},
                          {"reference", c.reference},
                          {"computed", c.computed},
                          {"difference", diff},
                          {"within_tolerance", std::abs(diff) <= options.tolerance},
                          {"within_printed_precision", std::abs(diff) <= c.printed_precision + 1e-12}});
    }
    out["reference_checks"] = checks;
    return out;
}

json record_json(const SampleRecord& r) {
    json out = {{"index", r.index},     {"seed", r.seed},         {"graph_hash", r.graph_hash},
                {"skipped", r.skipped}, {"n_optima", r.n_optima}, {"exceeds", r.exceeds}};
    if (r.skipped) {
        out["skip_reason"] = r.skip_reason;
    } else {
        out["itv"] = finite_or_null(r.itv);
        out["itv_max"] = finite_or_null(r.itv_max);
    }
    return out;
}

json experiment_summary(const ExperimentResult& r) {
    const auto& c = r.config;
    return {{"kind", "experiment"},
            {"config",
             {{"samples", c.n_samples},
              {"nodes", c.n_nodes},
              {"edge_prob", c.edge_prob},
              {"alpha", c.dirichlet_alpha},
              {"domain_size", c.domain_size},
              {"loss", loss_name(c.loss)},
              {"criterion", criterion_name(c.criterion)},
              {"threshold", finite_or_null(c.itv_threshold)},
              {"seed", c.seed},
              {"max_attempts", c.max_attempts},
              {"capacity", c.inference.capacity}}},
            {"provenance", {{"tool", kToolName}, {"version", kToolVersion}, {"threads", c.threads}}},
            {"n_satisfying_criterion", r.n_satisfying_criterion},
            {"n_with_itv_above_threshold", r.n_with_itv_above_threshold},
            {"n_skipped", r.n_skipped},
            {"fraction", r.fraction}};
}

json witness_json(const Witness& w) {
    const SLGraph& g = w.model.graph();
    return {{"kind", "witness"},
            {"case", witness_case_name(w.kind)},
            {"feature", g.label(w.feature)},
            {"sensitive_path", g.format_path(w.sensitive_path)},
            {"target_path", g.format_path(w.target_path)},
            {"n_optima", w.n_optima},
            {"itv_min", w.min_itv},
            {"itv_max", w.max_itv}};
}

std::string render_text(const json& report) {
    std::ostringstream os;
    const std::string kind = report.value("kind", "");
    if (kind == "criteria") {
        render_criteria(os, report);
    } else if (kind == "audit" || kind == "example") {
        if (kind == "example") os << "Example: " << report.at("example").get<std::string>() << "\n";
        render_audit(os, report);
        if (kind == "example" && !report.at("reference_checks").empty()) {
            os << "Reference values:\n";
            for (const auto& c : report.at("reference_checks")) {
                os << "  " << c.at("quantity").get<std::string>() << ": reference " << num_text(c.at("reference"))
                   << ", computed " << num_text(c.at("computed"));
                if (c.at("within_tolerance").get<bool>())
                    os << " (exact)";
                else if (c.at("within_printed_precision").get<bool>())
                    os << " (agrees at printed precision)";
                else
                    os << " (DIFFERS by " << num_text(c.at("difference")) << ")";
                os << "\n";
            }
        }
    } else if (kind == "experiment") {
        os << "fraction: " << num_text(report.at("fraction")) << " ("
           << report.at("n_with_itv_above_threshold").get<std::size_t>() << "/"
           << report.at("n_satisfying_criterion").get<std::size_t>() << " models with ITV > "
           << num_text(report.at("config").at("threshold")) << "; " << report.at("n_skipped").get<std::size_t>()
           << " skipped)\n";
    } else if (kind == "witness") {
        os << "Witness (" << report.at("case").get<std::string>() << ", W=" << report.at("feature").get<std::string>()
           << "): ITV min " << num_text(report.at("itv_min")) << ", max " << num_text(report.at("itv_max")) << " over "
           << report.at("n_optima").get<std::size_t>() << " optimal policies\n";
    } else {
        os << report.dump(2) << "\n";
    }
    return os.str();
}

}  // namespace itv
