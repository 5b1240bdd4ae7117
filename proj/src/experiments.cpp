#include "itv/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <functional>
#include <map>
#include <thread>

#include "itv/error.hpp"
#include "itv/metrics.hpp"
#include "itv/policy.hpp"

namespace itv {

namespace {

Value str(const char* s) { return Value{std::string(s)}; }
Value num(std::int64_t v) { return Value{v}; }

using Spec = SLGraph::NodeSpec;

// ---------------------------------------------------------------- fixtures

Example hiring(LossSpec loss) {
    SLGraph g({{"A", NodeRole::Sensitive},
               {"D", NodeRole::Chance},
               {"Y", NodeRole::Target},
               {"Yhat", NodeRole::Prediction},
               {"U", NodeRole::Utility}},
              {{"A", "D"}, {"D", "Yhat"}, {"D", "Y"}, {"Y", "U"}, {"Yhat", "U"}});
    std::vector<FiniteDomain> domains = {
        {str("male"), str("female")}, {str("maths"), str("stats")}, {num(0), num(1)}, {num(0), num(1)}, {}};
    std::vector<std::optional<Cpt>> cpts(g.size());
    cpts[0] = Cpt{{{0.5, 0.5}}};
    cpts[1] = Cpt{{{0.8, 0.2}, {0.2, 0.8}}};
    cpts[2] = Cpt{{{0.49, 0.51}, {0.51, 0.49}}};
    return {from_cpts(g, std::move(domains), cpts, std::move(loss)), {str("male"), str("female")}, std::nullopt};
}

Example music(bool with_a, LossSpec loss) {
    std::vector<std::pair<std::string, std::string>> edges = {
        {"A", "T"}, {"M", "T"}, {"M", "Y"}, {"T", "Yhat"}, {"Y", "U"}, {"Yhat", "U"}};
    if (with_a) edges.push_back({"A", "Yhat"});
    SLGraph g({{"A", NodeRole::Sensitive},
               {"M", NodeRole::Chance},
               {"T", NodeRole::Chance},
               {"Y", NodeRole::Target},
               {"Yhat", NodeRole::Prediction},
               {"U", NodeRole::Utility}},
              edges);
    std::vector<FiniteDomain> domains = {{str("male"), str("female")},
                                         {num(0), num(1)},
                                         {num(0), num(1)},
                                         {num(0), num(1)},
                                         {num(0), num(1)},
                                         {}};
    std::vector<std::optional<Cpt>> cpts(g.size());
    cpts[0] = Cpt{{{0.5, 0.5}}};
    cpts[1] = Cpt{{{0.5, 0.5}}};
    // T | (A, M): rows (male,0) (male,1) (female,0) (female,1).
    cpts[2] = Cpt{{{0.95, 0.05}, {0.0, 1.0}, {0.95, 0.05}, {0.1, 0.9}}};
    cpts[3] = Cpt{{{0.95, 0.05}, {0.05, 0.95}}};
    return {from_cpts(g, std::move(domains), cpts, std::move(loss)), {str("male"), str("female")}, std::nullopt};
}

Example degrees() {
    SLGraph g({{"A", NodeRole::Sensitive},
               {"D", NodeRole::Chance},
               {"Y", NodeRole::Target},
               {"Yhat", NodeRole::Prediction},
               {"U", NodeRole::Utility}},
              {{"A", "D"}, {"A", "Y"}, {"D", "Yhat"}, {"D", "Y"}, {"Y", "U"}, {"Yhat", "U"}});
    std::vector<FiniteDomain> domains = {
        {str("man"), str("woman")}, {str("maths"), str("stats")}, {num(4), num(6)}, {num(4), num(6)}, {}};
    std::vector<std::optional<Cpt>> cpts(g.size());
    cpts[0] = Cpt{{{0.5, 0.5}}};
    cpts[1] = Cpt{{{0.8, 0.2}, {0.2, 0.8}}};
    // Y | (A, D): score 5, plus 1 for men and minus 1 for women.
    cpts[2] = Cpt{{{0.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 0.0}}};
    return {from_cpts(g, std::move(domains), cpts, LossSpec::mean_squared_error()),
            {str("man"), str("woman")},
            std::string("D")};
}

Example degrees_coding() {
    SLGraph g({{"A", NodeRole::Sensitive},
               {"C", NodeRole::Chance},
               {"D", NodeRole::Chance},
               {"Y", NodeRole::Target},
               {"Yhat", NodeRole::Prediction},
               {"U", NodeRole::Utility}},
              {{"A", "C"}, {"A", "D"}, {"C", "Y"}, {"D", "Yhat"}, {"D", "Y"}, {"Y", "U"}, {"Yhat", "U"}});
    std::vector<FiniteDomain> domains = {{str("man"), str("woman")},
                                         {num(0), num(1)},
                                         {str("maths"), str("stats")},
                                         {num(4), num(6)},
                                         {num(4), num(6)},
                                         {}};
    std::vector<std::optional<Cpt>> cpts(g.size());
    cpts[0] = Cpt{{{0.5, 0.5}}};
    cpts[1] = Cpt{{{0.2, 0.8}, {0.8, 0.2}}};
    cpts[2] = Cpt{{{0.8, 0.2}, {0.2, 0.8}}};
    // Y | (C, D): 6 with coding experience, 4 without.
    cpts[3] = Cpt{{{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}}};
    return {from_cpts(g, std::move(domains), cpts, LossSpec::mean_squared_error()),
            {str("man"), str("woman")},
            std::string("D")};
}

// ---------------------------------------------------------- random models

bool meets(const SLGraph& g, CriterionFilter c) {
    switch (c) {
        case CriterionFilter::Theorem1: return itv_criterion(g).satisfied;
        case CriterionFilter::Theorem2: return padmissible_itv_criterion(g);
        case CriterionFilter::FailsTheorem1: return !itv_criterion(g).satisfied;
        case CriterionFilter::FailsPadmissible: return !padmissible_extra_condition(g);
        case CriterionFilter::Any: return true;
    }
    return false;
}

std::vector<double> dirichlet_row(std::size_t k, double alpha, std::mt19937_64& rng) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    std::vector<double> row(k);
    for (int attempt = 0; attempt < 16; ++attempt) {
        double sum = 0.0;
        for (auto& x : row) sum += (x = gamma(rng));
        if (sum > 0.0 && std::isfinite(sum)) {
            for (auto& x : row) x /= sum;
            return row;
        }
    }
    // Very small alpha: every draw underflowed, which is the degenerate
    // limit of a vertex of the simplex.
    std::fill(row.begin(), row.end(), 0.0);
    row[std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)] = 1.0;
    return row;
}

SLGraph sample_graph(const ExperimentConfig& config, std::mt19937_64& rng) {
    const std::size_t k = config.n_nodes - 2;
    std::bernoulli_distribution coin(config.edge_prob);
    std::vector<std::pair<std::size_t, std::size_t>> chance_edges;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (coin(rng)) chance_edges.emplace_back(i, j);
    const std::size_t a = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
    std::size_t y = std::uniform_int_distribution<std::size_t>(0, k - 2)(rng);
    if (y >= a) ++y;
    std::vector<std::size_t> features;
    for (std::size_t i = 0; i < k; ++i)
        if (i != y && coin(rng)) features.push_back(i);

    std::vector<std::string> names(k);
    std::vector<Spec> specs;
    for (std::size_t i = 0; i < k; ++i) {
        NodeRole role = NodeRole::Chance;
        names[i] = "X" + std::to_string(i);
        if (i == a) {
            role = NodeRole::Sensitive;
            names[i] = "A";
        } else if (i == y) {
            role = NodeRole::Target;
            names[i] = "Y";
        }
        specs.push_back({names[i], role});
    }
    specs.push_back({"Yhat", NodeRole::Prediction});
    specs.push_back({"U", NodeRole::Utility});
    std::vector<std::pair<std::string, std::string>> edges;
    for (auto [i, j] : chance_edges) edges.emplace_back(names[i], names[j]);
    for (auto f : features) edges.emplace_back(names[f], "Yhat");
    edges.emplace_back("Y", "U");
    edges.emplace_back("Yhat", "U");
    return SLGraph(std::move(specs), edges);
}

LossSpec loss_for(LossKind kind) {
    switch (kind) {
        case LossKind::ZeroOne: return LossSpec::zero_one();
        case LossKind::MeanSquaredError: return LossSpec::mean_squared_error();
        case LossKind::CustomTable: break;
    }
    throw PreconditionError("experiments support zero_one and mse losses only");
}

SampleRecord run_sample(const ExperimentConfig& config, std::size_t index) {
    SampleRecord rec;
    rec.index = index;
    rec.seed = sample_seed(config.seed, index);
    try {
        auto rng = sample_rng(config.seed, index);
        const RandomModel rm = random_sl_model(config, rng);
        rec.graph_hash = rm.model.graph().fingerprint();
        if (config.loss == LossKind::ZeroOne) {
            SolverOptions opts;
            opts.inference = config.inference;
            const auto set = optimal_policies_zero_one(rm.model, opts);
            rec.itv = INFINITY;
            rec.itv_max = -INFINITY;
            for (const auto& p : set.members) {
                const double v = itv(rm.model, p, rm.groups, 1e-9, config.inference).value;
                rec.itv = std::min(rec.itv, v);
                rec.itv_max = std::max(rec.itv_max, v);
            }
            rec.n_optima = set.members.size();
        } else {
            const auto policy = p_admissible_policy(rm.model, config.inference);
            rec.itv = rec.itv_max = itv(rm.model, policy, rm.groups, 1e-9, config.inference).value;
            rec.n_optima = 1;
        }
        rec.exceeds = rec.itv > config.itv_threshold;
    } catch (const CapacityError& e) {
        rec.skipped = true;
        rec.skip_reason = std::string("capacity: ") + e.what();
    } catch (const UndefinedConditionalError& e) {
        rec.skipped = true;
        rec.skip_reason = std::string("undefined conditional: ") + e.what();
    }
    return rec;
}

// ----------------------------------------------------------------- witness

enum class Mech { Constant, Bern09, Copy, UniformPM, SourceM, Product, ProductNoise, YBern };

struct Role {
    Mech mech = Mech::Constant;
    NodeId a;
    NodeId b;
};

using Plan = std::map<NodeId, Role>;

bool claim(Plan& plan, NodeId n, Role r) { return plan.emplace(n, r).second; }

std::int64_t int_of(const Value& v) { return static_cast<std::int64_t>(as_double(v)); }

// Builds the model from a role plan; nodes without a role are constant 0.
StructuralModel realise(const SLGraph& g, const Plan& plan, const FiniteDomain& label_domain) {
    std::vector<FiniteDomain> domains(g.size());
    std::vector<std::optional<Mechanism>> mechs(g.size());
    for (NodeId n : g.topological_order()) {
        const NodeRole role = g.role(n);
        if (role == NodeRole::Utility) continue;
        if (role == NodeRole::Prediction) {
            domains[n.index] = label_domain;
            continue;
        }
        const auto& parents = g.parents(n);
        std::size_t rows = 1;
        for (auto p : parents) rows *= domains[p.index].size();
        auto parent_value = [&](std::size_t row, NodeId which) -> const Value& {
            std::size_t rest = row;
            for (std::size_t k = parents.size(); k-- > 0;) {
                const std::size_t size = domains[parents[k].index].size();
                if (parents[k] == which) return domains[which.index][rest % size];
                rest /= size;
            }
            throw PreconditionError("witness plan refers to a non-parent");
        };

        const auto it = plan.find(n);
        const Role r = it == plan.end() ? Role{} : it->second;
        Mechanism m;
        std::vector<double> noise = {1.0};
        // value(row, e) as an integer outcome
        std::function<std::int64_t(std::size_t, std::size_t)> f;
        switch (r.mech) {
            case Mech::Constant: f = [](std::size_t, std::size_t) { return std::int64_t{0}; }; break;
            case Mech::Bern09:
                noise = {0.1, 0.9};
                f = [](std::size_t, std::size_t e) { return std::int64_t(e); };
                break;
            case Mech::UniformPM:
            case Mech::SourceM:
                noise = r.mech == Mech::SourceM ? std::vector<double>{0.4, 0.6} : std::vector<double>{0.5, 0.5};
                f = [](std::size_t, std::size_t e) { return e == 0 ? std::int64_t{-1} : std::int64_t{1}; };
                break;
            case Mech::Copy:
                f = [&, r](std::size_t row, std::size_t) { return int_of(parent_value(row, r.a)); };
                break;
            case Mech::Product:
                f = [&, r](std::size_t row, std::size_t) {
                    return int_of(parent_value(row, r.a)) * int_of(parent_value(row, r.b));
                };
                break;
            case Mech::ProductNoise:
                noise = {0.5, 0.5};
                f = [&, r](std::size_t row, std::size_t e) {
                    return int_of(parent_value(row, r.a)) * (e == 0 ? -1 : 1);
                };
                break;
            case Mech::YBern:
                // Cells of mass 0.49 / 0.02 / 0.49: Y = 1 on the last cell, and
                // on the middle cell when the parent is 1.
                noise = {0.49, 0.02, 0.49};
                f = [&, r](std::size_t row, std::size_t e) {
                    return std::int64_t(e == 2 || (e == 1 && int_of(parent_value(row, r.a)) == 1));
                };
                break;
        }
        std::vector<std::int64_t> outputs;
        for (std::size_t row = 0; row < rows; ++row)
            for (std::size_t e = 0; e < noise.size(); ++e) outputs.push_back(f(row, e));
        std::vector<std::int64_t> sorted = outputs;
        if (r.mech == Mech::Bern09 || r.mech == Mech::YBern) sorted.insert(sorted.end(), {0, 1});
        if (r.mech == Mech::UniformPM || r.mech == Mech::SourceM) sorted.insert(sorted.end(), {-1, 1});
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        std::vector<Value> dom;
        for (auto v : sorted) dom.emplace_back(v);
        domains[n.index] = FiniteDomain(std::move(dom));
        for (auto v : outputs) m.table.push_back(*domains[n.index].index_of(Value{v}));
        std::vector<Value> noise_values;
        for (std::size_t e = 0; e < noise.size(); ++e) noise_values.emplace_back(std::int64_t(e));
        m.exogenous.domain = FiniteDomain(std::move(noise_values));
        m.exogenous.probs = noise;
        mechs[n.index] = std::move(m);
    }
    return StructuralModel(g, std::move(domains), std::move(mechs), LossSpec::zero_one());
}

struct Attempt {
    Plan plan;
    WitnessCase kind;
};

// Assigns copying chains along a trek A <- ... <- T -> ... -> W with a
// Bern(0.9) source T. False when T = W or a node is already claimed.
bool plan_sensitive_path(const SLGraph& g, const Path& p, Plan& plan) {
    const std::size_t k = p.size() - 1;
    std::size_t t = 0;
    while (t < k && !g.has_edge(p[t], p[t + 1])) ++t;
    if (t == k) return false;
    for (std::size_t i = 0; i < k; ++i) {
        Role r;
        if (i == t) r = {Mech::Bern09, {}, {}};
        else if (i < t) r = {Mech::Copy, p[i + 1], {}};
        else r = {Mech::Copy, p[i - 1], {}};
        if (!claim(plan, p[i], r)) return false;
    }
    return true;
}

// Shortest directed chain from `from` to a feature other than `w` through
// nodes not yet in the plan; empty when none exists.
Path chain_to_feature(const SLGraph& g, NodeId from, NodeId w, const NodeSet& features, const Plan& plan) {
    if (features.count(from) && from != w) return {from};
    std::map<NodeId, NodeId> prev;
    std::deque<NodeId> queue{from};
    NodeSet seen{from};
    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop_front();
        for (NodeId c : g.children(u)) {
            const NodeRole role = g.role(c);
            if (seen.count(c) || plan.count(c) || role == NodeRole::Prediction || role == NodeRole::Utility)
                continue;
            seen.insert(c);
            prev[c] = u;
            if (features.count(c) && c != w) {
                Path chain{c};
                while (chain.back() != from) chain.push_back(prev.at(chain.back()));
                std::reverse(chain.begin(), chain.end());
                return chain;
            }
            queue.push_back(c);
        }
    }
    return {};
}

std::optional<Attempt> plan_witness(const SLGraph& g, const Path& p_aw, const Path& p_wy, const NodeSet& features) {
    Attempt at;
    if (!plan_sensitive_path(g, p_aw, at.plan)) return std::nullopt;
    const NodeId w = p_aw.back();
    const NodeId a_side = p_aw[p_aw.size() - 2];
    const std::size_t n = p_wy.size() - 1;
    std::vector<bool> fwd(n);
    for (std::size_t i = 0; i < n; ++i) fwd[i] = g.has_edge(p_wy[i], p_wy[i + 1]);

    auto claim_all = [&](std::size_t i, Role r) { return claim(at.plan, p_wy[i], r); };

    if (std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; })) {
        at.kind = WitnessCase::DirectedToTarget;
        if (!claim_all(0, {Mech::Copy, a_side, {}})) return std::nullopt;
        for (std::size_t i = 1; i < n; ++i)
            if (!claim_all(i, {Mech::Copy, p_wy[i - 1], {}})) return std::nullopt;
        if (!claim_all(n, {Mech::YBern, p_wy[n - 1], {}})) return std::nullopt;
        return at;
    }

    at.kind = WitnessCase::CollidersDisjoint;
    std::vector<std::size_t> ends{0};
    for (std::size_t i = 1; i < n; ++i)
        if (fwd[i - 1] && !fwd[i]) ends.push_back(i);
    ends.push_back(n);
    const std::size_t m = ends.size() - 2;

    std::vector<std::size_t> sources;
    for (std::size_t j = 0; j + 1 < ends.size(); ++j) {
        std::size_t s = ends[j];
        while (s < ends[j + 1] && !fwd[s]) ++s;
        sources.push_back(s);
    }
    if (sources[0] == 0 && m == 0) return std::nullopt;

    // W first, so a clash with the sensitive path is caught before anything else.
    if (sources[0] == 0) {
        if (!claim_all(0, {Mech::ProductNoise, a_side, {}})) return std::nullopt;
    } else {
        if (!claim_all(0, {Mech::Product, a_side, p_wy[1]})) return std::nullopt;
    }
    for (std::size_t j = 0; j + 1 < ends.size(); ++j) {
        const std::size_t left = ends[j], right = ends[j + 1], s = sources[j];
        if (s != 0) {
            const Mech kind = j == m ? Mech::SourceM : Mech::UniformPM;
            if (!claim_all(s, {kind, {}, {}})) return std::nullopt;
        }
        for (std::size_t i = left + 1; i < s; ++i)
            if (!claim_all(i, {Mech::Copy, p_wy[i + 1], {}})) return std::nullopt;
        for (std::size_t i = s + 1; i < right; ++i)
            if (!claim_all(i, {Mech::Copy, p_wy[i - 1], {}})) return std::nullopt;
    }
    if (sources[m] != n && !claim_all(n, {Mech::Copy, p_wy[n - 1], {}})) return std::nullopt;
    for (std::size_t j = 1; j <= m; ++j)
        if (!claim_all(ends[j], {Mech::Product, p_wy[ends[j] - 1], p_wy[ends[j] + 1]})) return std::nullopt;

    for (std::size_t j = 1; j <= m; ++j) {
        const Path chain = chain_to_feature(g, p_wy[ends[j]], w, features, at.plan);
        if (chain.empty()) return std::nullopt;
        for (std::size_t i = 1; i < chain.size(); ++i)
            if (!claim(at.plan, chain[i], {Mech::Copy, chain[i - 1], {}})) return std::nullopt;
    }
    return at;
}

}  // namespace

const char* example_name(ExampleId id) {
    switch (id) {
        case ExampleId::HiringV1: return "hiring_v1";
        case ExampleId::HiringV2: return "hiring_v2";
        case ExampleId::Music: return "music";
        case ExampleId::MusicWithA: return "music_with_a";
        case ExampleId::Degrees: return "degrees";
        case ExampleId::DegreesCoding: return "degrees_coding";
    }
    return "";
}

std::vector<ExampleId> all_examples() {
    return {ExampleId::HiringV1, ExampleId::HiringV2, ExampleId::Music,
            ExampleId::MusicWithA, ExampleId::Degrees, ExampleId::DegreesCoding};
}

std::optional<ExampleId> parse_example_id(const std::string& name) {
    for (auto id : all_examples())
        if (name == example_name(id)) return id;
    return std::nullopt;
}

Example load_example(ExampleId id) {
    switch (id) {
        case ExampleId::HiringV1: return hiring(LossSpec::mean_squared_error());
        case ExampleId::HiringV2: return hiring(LossSpec::zero_one());
        case ExampleId::Music: return music(false, LossSpec::zero_one());
        case ExampleId::MusicWithA: return music(true, LossSpec::mean_squared_error());
        case ExampleId::Degrees: return degrees();
        case ExampleId::DegreesCoding: return degrees_coding();
    }
    throw PreconditionError("unknown example");
}

const char* criterion_name(CriterionFilter c) {
    switch (c) {
        case CriterionFilter::Theorem1: return "theorem1";
        case CriterionFilter::Theorem2: return "theorem2";
        case CriterionFilter::FailsTheorem1: return "not_theorem1";
        case CriterionFilter::FailsPadmissible: return "not_padmissible";
        case CriterionFilter::Any: return "any";
    }
    return "";
}

std::optional<CriterionFilter> parse_criterion(const std::string& name) {
    for (auto c : {CriterionFilter::Theorem1, CriterionFilter::Theorem2, CriterionFilter::FailsTheorem1,
                   CriterionFilter::FailsPadmissible, CriterionFilter::Any})
        if (name == criterion_name(c)) return c;
    return std::nullopt;
}

void validate_config(const ExperimentConfig& c) {
    if (c.n_samples == 0) throw PreconditionError("samples must be positive");
    if (c.n_nodes < 4) throw PreconditionError("nodes must be at least 4 (A, Y, prediction and utility)");
    if (!(c.edge_prob >= 0.0 && c.edge_prob <= 1.0)) throw PreconditionError("edge probability must lie in [0, 1]");
    if (!(c.dirichlet_alpha > 0.0) || !std::isfinite(c.dirichlet_alpha))
        throw PreconditionError("dirichlet alpha must be positive and finite");
    if (c.domain_size < 2) throw PreconditionError("domain size must be at least 2");
    if (!(c.itv_threshold >= 0.0)) throw PreconditionError("ITV threshold must be non-negative");
    if (c.max_attempts == 0) throw PreconditionError("attempt budget must be positive");
    if (c.loss != LossKind::ZeroOne && c.loss != LossKind::MeanSquaredError)
        throw PreconditionError("experiments support zero_one and mse losses only");
}

RandomModel random_sl_model(const ExperimentConfig& config, std::mt19937_64& rng) {
    validate_config(config);
    for (std::size_t attempt = 1; attempt <= config.max_attempts; ++attempt) {
        SLGraph g = sample_graph(config, rng);
        if (!validate_sl_graph(g).ok() || !meets(g, config.criterion)) continue;

        std::vector<Value> values;
        for (std::size_t v = 0; v < config.domain_size; ++v) values.emplace_back(std::int64_t(v));
        const FiniteDomain domain(values);
        std::vector<FiniteDomain> domains(g.size(), domain);
        domains[g.require_role(NodeRole::Utility).index] = FiniteDomain{};
        std::vector<std::optional<Cpt>> cpts(g.size());
        for (NodeId n : g.nodes()) {
            const NodeRole role = g.role(n);
            if (role == NodeRole::Prediction || role == NodeRole::Utility) continue;
            std::size_t rows = 1;
            for (auto p : g.parents(n)) rows *= domains[p.index].size();
            Cpt cpt;
            for (std::size_t r = 0; r < rows; ++r)
                cpt.rows.push_back(dirichlet_row(config.domain_size, config.dirichlet_alpha, rng));
            cpts[n.index] = std::move(cpt);
        }
        RandomModel out{from_cpts(g, std::move(domains), cpts, loss_for(config.loss)),
                        {Value{std::int64_t{0}}, Value{std::int64_t{1}}},
                        attempt};
        return out;
    }
    throw CapacityError("no graph meeting criterion '" + std::string(criterion_name(config.criterion)) +
                        "' within " + std::to_string(config.max_attempts) + " attempts");
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t index) { return seed ^ static_cast<std::uint64_t>(index); }

std::mt19937_64 sample_rng(std::uint64_t seed, std::size_t index) {
    const std::uint64_t s = sample_seed(seed, index);
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    return std::mt19937_64(seq);
}

std::size_t threads_from_env(std::size_t fallback) {
    const char* raw = std::getenv("ITV_AUDIT_THREADS");
    if (!raw || !*raw) return fallback;
    char* end = nullptr;
    const unsigned long v = std::strtoul(raw, &end, 10);
    if (*end != '\0' || v == 0) return fallback;
    return static_cast<std::size_t>(v);
}

ExperimentResult itv_incidence(const ExperimentConfig& config) {
    validate_config(config);
    ExperimentResult result;
    result.config = config;
    result.records.resize(config.n_samples);

    const std::size_t workers = std::max<std::size_t>(1, std::min(config.threads, config.n_samples));
    if (workers == 1) {
        for (std::size_t i = 0; i < config.n_samples; ++i) result.records[i] = run_sample(config, i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < config.n_samples; i = next++)
                    result.records[i] = run_sample(config, i);
            });
        for (auto& t : pool) t.join();
    }

    for (const auto& r : result.records) {
        if (r.skipped) {
            ++result.n_skipped;
            continue;
        }
        ++result.n_satisfying_criterion;
        if (r.exceeds) ++result.n_with_itv_above_threshold;
    }
    result.fraction = result.n_satisfying_criterion == 0
                          ? 0.0
                          : static_cast<double>(result.n_with_itv_above_threshold) /
                                static_cast<double>(result.n_satisfying_criterion);
    return result;
}

const char* witness_case_name(WitnessCase c) {
    return c == WitnessCase::DirectedToTarget ? "directed_to_target" : "colliders_disjoint";
}

Witness witness_scm(const SLGraph& graph) {
    const auto report = validate_sl_graph(graph);
    if (!report.ok()) throw PreconditionError("invalid SL graph: " + report.violations.front());
    if (!itv_criterion(graph).satisfied) throw PreconditionError("graph does not satisfy the ITV criterion");

    const NodeId a = graph.require_role(NodeRole::Sensitive);
    const NodeId y = graph.require_role(NodeRole::Target);
    const NodeId yhat = graph.require_role(NodeRole::Prediction);
    const NodeSet features(graph.parents(yhat).begin(), graph.parents(yhat).end());
    const GroupSpec groups{Value{std::int64_t{0}}, Value{std::int64_t{1}}};

    for (NodeId w : requisite_features(graph)) {
        if (w == a || d_separated(graph, {a}, {w}, {})) continue;
        NodeSet z = features;
        z.erase(w);
        z.insert(yhat);
        const auto sensitive_paths = active_paths(graph, a, w, {});
        const auto target_paths = active_paths(graph, w, y, z);
        for (const auto& p_aw : sensitive_paths) {
            for (const auto& p_wy : target_paths) {
                const auto attempt = plan_witness(graph, p_aw, p_wy, features);
                if (!attempt) continue;
                const bool directed = attempt->kind == WitnessCase::DirectedToTarget;
                const FiniteDomain labels = directed ? FiniteDomain{num(0), num(1)} : FiniteDomain{num(-1), num(1)};
                StructuralModel model = realise(graph, attempt->plan, labels);
                const auto optima = optimal_policies_bruteforce(model, LossSpec::zero_one(), labels);
                double lo = INFINITY, hi = -INFINITY;
                for (const auto& p : optima.members) {
                    const double v = itv(model, p, groups).value;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                if (!(lo > 1e-9)) continue;
                return Witness{std::move(model), groups, attempt->kind, w, p_aw, p_wy, lo, hi,
                               optima.members.size()};
            }
        }
    }
    throw UnsupportedCaseError(
        "no requisite feature admits a directed or collider-disjoint construction; "
        "shapes where the paths share nodes or the trek source is the feature are not supported");
}

}  // namespace itv
