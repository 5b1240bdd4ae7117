// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 7        run the listed criteria
//
// Exit status is non-zero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "itv/error.hpp"
#include "itv/experiments.hpp"
#include "itv/graph.hpp"
#include "itv/metrics.hpp"
#include "itv/policy.hpp"
#include "itv/scm.hpp"
#include "oracles.hpp"

using namespace itv;

namespace {

// Tolerances and budgets.
constexpr double kExact = 1e-9;
constexpr double kTableRounding = 5e-4;
constexpr double kBandZeroOne[2] = {0.05, 0.45};
constexpr double kBandMse[2] = {0.04, 0.40};

struct Check {
    std::vector<std::string> failures;
    std::ostringstream notes;

    void near(const std::string& what, double got, double want, double tol) {
        if (!(std::abs(got - want) <= tol)) {
            std::ostringstream os;
            os.precision(12);
            os << what << " = " << got << ", expected " << want << " +/- " << tol;
            failures.push_back(os.str());
        }
    }
    void that(const std::string& what, bool ok) {
        if (!ok) failures.push_back(what);
    }
};

struct Criterion {
    int id;
    const char* title;
    double budget_seconds;
    std::function<void(Check&)> body;
};

Value s(const char* v) { return Value{std::string(v)}; }
Value i64(std::int64_t v) { return Value{v}; }

Policy unique_zero_one(const StructuralModel& m, Check& c) {
    const PolicySet set = optimal_policies_zero_one(m);
    c.that("zero-one optimum is unique (found " + std::to_string(set.members.size()) + ")", set.members.size() == 1);
    return set.members.at(0);
}

// ------------------------------------------------------------------ 1-4

void hiring_v1(Check& c) {
    const Example ex = load_example(ExampleId::HiringV1);
    const Policy pi = p_admissible_policy(ex.model);
    c.near("pi(maths)", as_double(pi.action(0)), 0.51, kExact);
    c.near("pi(stats)", as_double(pi.action(1)), 0.49, kExact);
    c.near("ITV", itv::itv(ex.model, pi, ex.groups).value, 0.0, kExact);
    c.near("ITV (world enumeration)", oracle::introduced_variation(ex.model, pi, ex.groups.a0, ex.groups.a1), 0.0,
           kExact);
}

void hiring_v2(Check& c) {
    const Example ex = load_example(ExampleId::HiringV2);
    const Policy pi = unique_zero_one(ex.model, c);
    c.that("pi(maths) = 1", same_value(pi.action(0), i64(1)));
    c.that("pi(stats) = 0", same_value(pi.action(1), i64(0)));
    const ItvResult r = itv::itv(ex.model, pi, ex.groups);
    c.near("|ATV(Yhat)|", std::abs(r.atv_prediction), 0.6, kExact);
    c.near("|ATV(Y)|", std::abs(r.atv_target), 0.012, kExact);
    c.near("ITV", r.value, 0.588, kExact);
    c.near("ITV (world enumeration)", oracle::introduced_variation(ex.model, pi, ex.groups.a0, ex.groups.a1), 0.588,
           kExact);
}

void music(Check& c) {
    {
        const Example ex = load_example(ExampleId::Music);
        const StructuralModel zo = ex.model.with_loss(LossSpec::zero_one());
        const Policy pi = unique_zero_one(zo, c);
        c.near("ITV (zero-one)", itv::itv(zo, pi, ex.groups).value, 0.05, kExact);

        const Policy mean = p_admissible_policy(ex.model);
        const double itv_mse = itv::itv(ex.model, mean, ex.groups).value;
        c.notes << "ITV (MSE) = " << itv_mse << "; ";
        c.near("ITV (MSE)", itv_mse, 0.04, kExact);
        c.near("pi(T=1)", as_double(mean.action(1)), 0.905, kTableRounding);

        const auto worlds = oracle::world_list(ex.model, mean);
        const double t0 = oracle::conditional_mean(ex.model, worlds, "Y", {{"T", i64(0)}});
        c.near("pi(T=0) against enumeration", as_double(mean.action(0)), t0, kExact);
        c.near("pi(T=0) enumeration value", t0, 0.095, kExact);
    }
    {
        const Example ex = load_example(ExampleId::MusicWithA);
        const Policy mean = p_admissible_policy(ex.model);
        c.near("ITV (MSE, A a feature)", itv::itv(ex.model, mean, ex.groups).value, 0.0, kExact);
        // Rows over (A, T): (male,0) (male,1) (female,0) (female,1).
        c.near("pi(T=1, male)", as_double(mean.action(1)), 0.907, kTableRounding);
        c.near("pi(T=1, female)", as_double(mean.action(3)), 0.903, kTableRounding);
        const auto worlds = oracle::world_list(ex.model, mean);
        const double male_t0 = oracle::conditional_mean(ex.model, worlds, "Y", {{"A", s("male")}, {"T", i64(0)}});
        c.near("pi(T=0, male) against enumeration", as_double(mean.action(0)), male_t0, kExact);
        c.near("pi(T=0, male) enumeration value", male_t0, 0.05, kExact);
    }
}

void degrees(Check& c) {
    const Example ex = load_example(ExampleId::Degrees);
    const Policy pi = p_admissible_policy(ex.model);
    c.near("pi(maths)", as_double(pi.action(0)), 5.6, kExact);
    c.near("pi(stats)", as_double(pi.action(1)), 4.4, kExact);
    const SLGraph& g = ex.model.graph();
    const EdgeSubgraph via_d = directed_paths_via(g, g.id("D"));
    const PsieResult r = psie(ex.model, pi, via_d, ex.groups);
    c.near("PSIE via D", r.value, 0.72, kExact);
    const std::set<std::pair<std::string, std::string>> p = {{"A", "D"}, {"D", "Yhat"}, {"D", "Y"}};
    const double yhat = oracle::path_specific_effect(ex.model, pi, p, "Yhat", ex.groups.a0, ex.groups.a1);
    const double y = oracle::path_specific_effect(ex.model, pi, p, "Y", ex.groups.a0, ex.groups.a1);
    c.near("PSIE via D (paired-world oracle)", std::abs(yhat) - std::abs(y), 0.72, kExact);
    c.near("ITV", itv::itv(ex.model, pi, ex.groups).value, -1.28, kExact);
}

// ------------------------------------------------------------------ 5-6

void verdicts(Check& c) {
    const SLGraph fig1 = load_example(ExampleId::HiringV2).model.graph();
    const SLGraph fig2 = load_example(ExampleId::Music).model.graph();
    const SLGraph fig3 = load_example(ExampleId::Degrees).model.graph();
    c.that("Fig. 1 satisfies Theorem 1", itv_criterion(fig1).satisfied);
    c.that("Fig. 1 fails Theorem 2", !padmissible_itv_criterion(fig1));
    c.that("Fig. 2 satisfies Theorem 1", itv_criterion(fig2).satisfied);
    c.that("Fig. 2 satisfies Theorem 2", padmissible_itv_criterion(fig2));
    c.that("Fig. 3 satisfies the PSIE criterion via D",
           psie_criterion(fig3, directed_paths_via(fig3, fig3.id("D"))).satisfied);
}

void witness_case(Check& c, const SLGraph& g, const std::string& name, WitnessCase kind, double want) {
    const Witness w = witness_scm(g);
    c.that(name + " case is " + witness_case_name(kind), w.kind == kind);
    const StructuralModel& m = w.model;
    const PolicySet set = optimal_policies_bruteforce(m, LossSpec::zero_one(), m.domain(m.prediction()));
    c.that(name + " has optimal policies", !set.members.empty());
    for (const auto& pi : set.members)
        c.near(name + " ITV of an optimum (world enumeration)",
               oracle::introduced_variation(m, pi, w.groups.a0, w.groups.a1), want, kExact);
    c.near(name + " reported minimum ITV", w.min_itv, want, kExact);
}

void witnesses(Check& c) {
    witness_case(c, load_example(ExampleId::HiringV2).model.graph(), "Fig. 1 graph", WitnessCase::DirectedToTarget,
                 0.98);
    witness_case(c, load_example(ExampleId::Music).model.graph(), "Fig. 2 graph", WitnessCase::CollidersDisjoint,
                 0.8);
}

// ------------------------------------------------------------------ 7-8

std::vector<Value> unit_grid(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Value> out;
    while (out.size() < n) {
        const double x = u(rng);
        bool fresh = true;
        for (const auto& v : out) fresh = fresh && as_double(v) != x;
        if (fresh) out.push_back(Value{x});
    }
    return out;
}

std::vector<Value> groups_of(std::size_t n) {
    std::vector<Value> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(Value{std::int64_t(i)});
    return out;
}

void propositions(Check& c) {
    std::mt19937_64 rng(20220707);
    double worst_sep = -1e300, worst_suf = 1e300;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t na = 2 + trial % 2;
        const GroupSpec groups{Value{std::int64_t{0}}, Value{std::int64_t(na - 1)}};
        const auto pa = oracle::random_simplex(na, rng);
        {
            // Separation: Yhat is a randomised function of binary Y alone.
            const std::size_t nh = 2 + trial % 3;
            const auto yhat = unit_grid(nh, rng);
            std::vector<std::vector<double>> y_given_a, h_given_y;
            for (std::size_t a = 0; a < na; ++a) y_given_a.push_back(oracle::random_simplex(2, rng));
            for (std::size_t y = 0; y < 2; ++y) h_given_y.push_back(oracle::random_simplex(nh, rng));
            std::vector<double> probs;
            for (std::size_t a = 0; a < na; ++a)
                for (std::size_t y = 0; y < 2; ++y)
                    for (std::size_t h = 0; h < nh; ++h) probs.push_back(pa[a] * y_given_a[a][y] * h_given_y[y][h]);
            const JointTable joint =
                oracle::joint_of(groups_of(na), {Value{std::int64_t{0}}, Value{std::int64_t{1}}}, yhat, probs);
            c.that("constructed joint satisfies separation", separation_holds(joint).holds);
            const double v = itv::itv(joint, groups).value;
            worst_sep = std::max(worst_sep, v);
            if (v > kExact) c.near("ITV under separation (trial " + std::to_string(trial) + ")", v, 0.0, kExact);
        }
        {
            // Sufficiency: binary Yhat, Y depends on A only through Yhat.
            const std::size_t ny = 2 + trial % 3;
            const auto y = unit_grid(ny, rng);
            std::vector<std::vector<double>> h_given_a, y_given_h;
            for (std::size_t a = 0; a < na; ++a) h_given_a.push_back(oracle::random_simplex(2, rng));
            for (std::size_t h = 0; h < 2; ++h) y_given_h.push_back(oracle::random_simplex(ny, rng));
            std::vector<double> probs;
            for (std::size_t a = 0; a < na; ++a)
                for (std::size_t yi = 0; yi < ny; ++yi)
                    for (std::size_t h = 0; h < 2; ++h) probs.push_back(pa[a] * h_given_a[a][h] * y_given_h[h][yi]);
            const JointTable joint =
                oracle::joint_of(groups_of(na), y, {Value{std::int64_t{0}}, Value{std::int64_t{1}}}, probs);
            c.that("constructed joint satisfies sufficiency", sufficiency_holds(joint).holds);
            const double v = itv::itv(joint, groups).value;
            worst_suf = std::min(worst_suf, v);
            if (v < -kExact) c.near("ITV under sufficiency (trial " + std::to_string(trial) + ")", v, 0.0, kExact);
        }
    }
    c.notes << "max ITV under separation " << worst_sep << ", min ITV under sufficiency " << worst_suf << "; ";
}

void imi_identity(Check& c) {
    std::mt19937_64 rng(4242);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t na = 2 + trial % 3, ny = 2 + (trial / 3) % 3, nh = 2 + (trial / 9) % 4;
        std::vector<Value> y, h;
        for (std::size_t i = 0; i < ny; ++i) y.push_back(Value{std::int64_t(i)});
        for (std::size_t i = 0; i < nh; ++i) h.push_back(Value{std::int64_t(i)});
        auto probs = oracle::random_simplex(na * ny * nh, rng);
        // Some joints with exact zeros.
        if (trial % 5 == 0)
            for (std::size_t i = 0; i < probs.size(); i += 3) probs[i] = 0.0;
        double sum = 0.0;
        for (double p : probs) sum += p;
        for (double& p : probs) p /= sum;
        const JointTable joint = oracle::joint_of(groups_of(na), y, h, probs);
        const InfoSuite s = info_suite(joint);
        const double lhs = s.independence_gap - s.legacy, rhs = s.separation_gap - s.sufficiency_gap;
        worst = std::max(worst, std::abs(lhs - rhs));
        c.near("I(Yhat;A) - I(Y;A) vs I(Yhat;A|Y) - I(Y;A|Yhat)", lhs, rhs, kExact);
        const auto t = oracle::triple_of(joint);
        c.near("I(Yhat;A) against direct summation", s.independence_gap, oracle::mutual_information(t, 2, 0, -1),
               kExact);
        c.near("I(Yhat;A|Y) against direct summation", s.separation_gap, oracle::mutual_information(t, 2, 0, 1),
               kExact);
        c.near("I(Y;A|Yhat) against direct summation", s.sufficiency_gap, oracle::mutual_information(t, 1, 0, 2),
               kExact);
    }
    c.notes << "largest identity gap " << worst << "; ";
}

// ------------------------------------------------------------------ 9

void soundness(Check& c) {
    ExperimentConfig cfg;
    cfg.criterion = CriterionFilter::FailsTheorem1;
    double worst = 0.0;
    for (std::size_t i = 0; i < 200; ++i) {
        auto rng = sample_rng(1001, i);
        const RandomModel rm = random_sl_model(cfg, rng);
        const StructuralModel restricted = rm.model.with_prediction_features(requisite_features(rm.model.graph()));
        std::vector<Policy> optima;
        if (i % 2 == 0) {
            optima = optimal_policies_zero_one(restricted).members;
        } else {
            optima.push_back(p_admissible_policy(restricted.with_loss(LossSpec::mean_squared_error())));
        }
        for (const auto& pi : optima) {
            const double a = itv::itv(restricted, pi, rm.groups).atv_prediction;
            worst = std::max(worst, std::abs(a));
            if (std::abs(a) > kExact) c.near("ATV(Yhat), Theorem 1 sweep model " + std::to_string(i), a, 0.0, kExact);
        }
    }
    c.notes << "Theorem 1 sweep max |ATV(Yhat)| " << worst << "; ";

    cfg.criterion = CriterionFilter::FailsPadmissible;
    cfg.loss = LossKind::MeanSquaredError;
    worst = 0.0;
    std::size_t with_theorem1 = 0;
    for (std::size_t i = 0; i < 200; ++i) {
        auto rng = sample_rng(2002, i);
        const RandomModel rm = random_sl_model(cfg, rng);
        if (itv_criterion(rm.model.graph()).satisfied) ++with_theorem1;
        const Policy pi = p_admissible_policy(rm.model);
        const double v = itv::itv(rm.model, pi, rm.groups).value;
        worst = std::max(worst, std::abs(v));
        if (std::abs(v) > kExact) c.near("ITV, Theorem 2 sweep model " + std::to_string(i), v, 0.0, kExact);
    }
    c.that("Theorem 2 sweep includes graphs meeting Theorem 1", with_theorem1 > 0);
    c.notes << "Theorem 2 sweep max |ITV| " << worst << " (" << with_theorem1 << "/200 meet Theorem 1); ";
}

// ------------------------------------------------------------------ 10

void incidence_case(Check& c, LossKind loss, CriterionFilter filter, const double band[2], const char* name) {
    ExperimentConfig cfg;
    cfg.loss = loss;
    cfg.criterion = filter;
    cfg.seed = 0;
    cfg.threads = 1;
    const ExperimentResult a = itv_incidence(cfg);
    c.notes << name << " fraction " << a.fraction << " (" << a.n_with_itv_above_threshold << "/"
            << a.n_satisfying_criterion << ", skipped " << a.n_skipped << "); ";
    c.that(std::string(name) + " fraction within band", a.fraction >= band[0] && a.fraction <= band[1]);
    const ExperimentResult b = itv_incidence(cfg);
    bool same = a.records.size() == b.records.size() && a.fraction == b.fraction;
    for (std::size_t i = 0; same && i < a.records.size(); ++i)
        same = a.records[i].graph_hash == b.records[i].graph_hash && a.records[i].itv == b.records[i].itv &&
               a.records[i].itv_max == b.records[i].itv_max && a.records[i].seed == b.records[i].seed;
    c.that(std::string(name) + " rerun is bit-identical", same);
}

void incidence(Check& c) {
    incidence_case(c, LossKind::ZeroOne, CriterionFilter::Theorem1, kBandZeroOne, "zero-one/Theorem 1");
    incidence_case(c, LossKind::MeanSquaredError, CriterionFilter::Theorem2, kBandMse, "MSE/Theorem 2");
}

// ------------------------------------------------------------------ 11

bool same_policy_sets(const PolicySet& a, const PolicySet& b) {
    if (a.members.size() != b.members.size()) return false;
    for (const auto& p : a.members) {
        bool found = false;
        for (const auto& q : b.members) found = found || p == q;
        if (!found) return false;
    }
    return true;
}

double squared_error_utility(const StructuralModel& m, const Policy& pi) {
    const std::size_t y = oracle::position(m, m.graph().label(m.target()));
    const std::size_t h = oracle::position(m, m.graph().label(m.prediction()));
    double eu = 0.0;
    for (const auto& [w, p] : oracle::world_list(m, pi)) {
        const double d = as_double(w[y]) - as_double(w[h]);
        eu -= p * d * d;
    }
    return eu;
}

void oracle_equivalence(Check& c) {
    ExperimentConfig cfg;
    cfg.criterion = CriterionFilter::Any;
    cfg.n_nodes = 5;
    std::size_t accepted = 0, index = 0, grid_policies = 0;
    while (accepted < 100) {
        cfg.domain_size = 2 + index % 2;
        auto rng = sample_rng(3003, index++);
        const RandomModel rm = random_sl_model(cfg, rng);
        const StructuralModel& m = rm.model;
        const auto reach = reachable_rows(m);
        std::size_t reachable = 0;
        for (bool r : reach) reachable += r;
        const FiniteDomain& dom = m.domain(m.prediction());
        if (reachable > 4 || dom.size() > 3) continue;
        ++accepted;

        const StructuralModel zo = m.with_loss(LossSpec::zero_one());
        c.that("zero-one solver equals brute force (model " + std::to_string(index - 1) + ")",
               same_policy_sets(optimal_policies_zero_one(zo), optimal_policies_bruteforce(zo, LossSpec::zero_one(), dom)));

        // Every deterministic policy over dom(Yhat) on the reachable rows.
        const StructuralModel mse = m.with_loss(LossSpec::mean_squared_error());
        const double best = squared_error_utility(mse, p_admissible_policy(mse));
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < reach.size(); ++r)
            if (reach[r]) rows.push_back(r);
        std::vector<std::size_t> digit(rows.size(), 0);
        while (true) {
            std::vector<Value> actions(reach.size(), dom[0]);
            for (std::size_t k = 0; k < rows.size(); ++k) actions[rows[k]] = dom[digit[k]];
            const double eu = squared_error_utility(mse, Policy(actions, reach));
            ++grid_policies;
            if (eu > best + kExact) c.near("grid policy beats the conditional mean", eu, best, kExact);
            std::size_t k = 0;
            while (k < digit.size() && ++digit[k] == dom.size()) digit[k++] = 0;
            if (k == digit.size()) break;
        }
    }
    c.notes << accepted << " models, " << grid_policies << " grid policies; ";
}

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "hiring v1: conditional-mean policy 0.51/0.49, ITV 0", 1.0, hiring_v1},
        {2, "hiring v2: unique zero-one optimum, ITV 0.588", 1.0, hiring_v2},
        {3, "music: ITV 0.05 / 0.04 / 0 and Table 1 policy values", 1.0, music},
        {4, "degrees: policy 5.6/4.4, PSIE 0.72, ITV -1.28", 1.0, degrees},
        {5, "graphical verdicts on the worked examples", 1.0, verdicts},
        {6, "witness models: ITV 0.98 and 0.8 over all optima", 5.0, witnesses},
        {7, "separation caps ITV, sufficiency floors it (500 joints each)", 30.0, propositions},
        {8, "IMI = separation gap - sufficiency gap (500 joints)", 10.0, imi_identity},
        {9, "soundness sweeps for Theorems 1 and 2 (200 models each)", 60.0, soundness},
        {10, "incidence fractions within bands and reproducible", 300.0, incidence},
        {11, "zero-one solver and conditional mean against brute force (100 models)", 60.0, oracle_equivalence},
    };
    return all;
}

bool run(const Criterion& k) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        k.body(c);
    } catch (const std::exception& e) {
        c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (seconds > k.budget_seconds) {
        std::ostringstream os;
        os << "runtime " << seconds << " s exceeds " << k.budget_seconds << " s";
        c.failures.push_back(os.str());
    }
    const bool pass = c.failures.empty();
    std::printf("[%s] criterion %2d: %s (%.2f s)", pass ? "PASS" : "FAIL", k.id, k.title, seconds);
    const std::string notes = c.notes.str();
    if (!notes.empty()) std::printf(" | %s", notes.substr(0, notes.size() - 2).c_str());
    std::printf("\n");
    const std::size_t shown = std::min<std::size_t>(c.failures.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) std::printf("       %s\n", c.failures[i].c_str());
    if (c.failures.size() > shown) std::printf("       ... %zu more\n", c.failures.size() - shown);
    std::fflush(stdout);
    return pass;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    int failed = 0;
    for (const auto& k : criteria()) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), k.id) == selected.end()) continue;
        if (!run(k)) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
