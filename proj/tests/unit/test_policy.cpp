#include <doctest.h>

#include <cmath>

#include "itv/error.hpp"
#include "itv/experiments.hpp"
#include "itv/metrics.hpp"
#include "itv/policy.hpp"

using namespace itv;

namespace {

Value i64(std::int64_t v) { return Value{v}; }

}  // namespace

TEST_CASE("conditional-mean policy on hiring version 1") {
    const Example ex = load_example(ExampleId::HiringV1);
    const Policy pi = p_admissible_policy(ex.model);
    REQUIRE(pi.row_count() == 2);
    CHECK(as_double(pi.action(0)) == doctest::Approx(0.51).epsilon(1e-12));
    CHECK(as_double(pi.action(1)) == doctest::Approx(0.49).epsilon(1e-12));
    // Squared error: Var(Y | D) = 0.51 * 0.49 on both rows.
    CHECK(expected_utility(ex.model, pi) == doctest::Approx(-0.51 * 0.49).epsilon(1e-12));
}

TEST_CASE("zero-one optimum on hiring version 2") {
    const Example ex = load_example(ExampleId::HiringV2);
    const PolicySet set = optimal_policies_zero_one(ex.model);
    REQUIRE(set.members.size() == 1);
    const Policy& pi = set.members[0];
    CHECK(same_value(pi.action(0), i64(1)));
    CHECK(same_value(pi.action(1), i64(0)));
    // Misses: maths with Y=0 and stats with Y=1, each 0.5 * 0.49.
    CHECK(expected_utility(ex.model, pi) == doctest::Approx(-(0.5 * 0.49 + 0.5 * 0.49)).epsilon(1e-12));
    const auto rows = describe_policy(ex.model, pi);
    REQUIRE(rows.size() == 2);
    CHECK(to_string(rows[0].features[0]) == "maths");
}

TEST_CASE("ties produce every optimal labelling") {
    const Example ex = load_example(ExampleId::HiringV2);
    // Y independent of D with probability one half on both rows.
    const SLGraph& g = ex.model.graph();
    std::vector<FiniteDomain> domains;
    for (auto v : g.nodes()) domains.push_back(ex.model.domain(v));
    std::vector<std::optional<Cpt>> cpts(g.size());
    cpts[0] = Cpt{{{0.5, 0.5}}};
    cpts[1] = Cpt{{{0.8, 0.2}, {0.2, 0.8}}};
    cpts[2] = Cpt{{{0.5, 0.5}, {0.5, 0.5}}};
    const StructuralModel tied = from_cpts(g, domains, cpts, LossSpec::zero_one());
    CHECK(optimal_policies_zero_one(tied).members.size() == 4);
    SolverOptions capped;
    capped.max_policies = 3;
    CHECK_THROWS_AS(optimal_policies_zero_one(tied, capped), CapacityError);
}

TEST_CASE("brute force agrees with the row-wise solvers on the worked examples") {
    for (auto id : all_examples()) {
        CAPTURE(example_name(id));
        const Example ex = load_example(id);
        const NodeId yhat = ex.model.prediction();
        const FiniteDomain& dom = ex.model.domain(yhat);
        if (ex.model.loss().kind == LossKind::ZeroOne) {
            const auto a = optimal_policies_zero_one(ex.model);
            const auto b = optimal_policies_bruteforce(ex.model, LossSpec::zero_one(), dom);
            REQUIRE(a.members.size() == b.members.size());
            for (std::size_t i = 0; i < a.members.size(); ++i) CHECK(a.members[i] == b.members[i]);
        } else {
            const Policy pa = p_admissible_policy(ex.model);
            const auto grid = optimal_policies_bruteforce(ex.model, LossSpec::mean_squared_error(), dom);
            for (const auto& p : grid.members)
                CHECK(expected_utility(ex.model, pa) >= expected_utility(ex.model, p) - 1e-12);
        }
    }
}

TEST_CASE("unreachable rows are flagged and take the smallest label") {
    // P(M=1) = 0 and P(T=1 | male, M=0) = 0, so (male, T=1) cannot occur.
    const Example ex = load_example(ExampleId::MusicWithA);
    const SLGraph& g = ex.model.graph();
    std::vector<FiniteDomain> domains;
    for (auto v : g.nodes()) domains.push_back(ex.model.domain(v));
    std::vector<std::optional<Cpt>> cpts(g.size());
    cpts[0] = Cpt{{{0.5, 0.5}}};
    cpts[1] = Cpt{{{1.0, 0.0}}};
    cpts[2] = Cpt{{{1.0, 0.0}, {0.0, 1.0}, {0.9, 0.1}, {0.1, 0.9}}};
    cpts[3] = Cpt{{{0.95, 0.05}, {0.05, 0.95}}};
    const StructuralModel m = from_cpts(g, domains, cpts, LossSpec::zero_one());
    const auto reach = reachable_rows(m);
    // Rows over (A, T): (male,0) (male,1) (female,0) (female,1).
    CHECK(reach == std::vector<bool>{true, false, true, true});
    const Policy pi = optimal_policies_zero_one(m).members.at(0);
    CHECK_FALSE(pi.reachable(1));
    CHECK(same_value(pi.action(1), i64(0)));
}

TEST_CASE("tabulated rules follow row order") {
    const Example ex = load_example(ExampleId::MusicWithA);
    const Policy pi = tabulate_policy(ex.model, [](const std::vector<Value>& pa) {
        const bool hire = to_string(pa[0]) == "female" || as_double(pa[1]) > 0;
        return Value{std::int64_t{hire ? 1 : 0}};
    });
    REQUIRE(pi.row_count() == 4);
    CHECK(same_value(pi.action(0), i64(0)));
    CHECK(same_value(pi.action(1), i64(1)));
    CHECK(same_value(pi.action(2), i64(1)));
    CHECK(same_value(pi.action(3), i64(1)));
}

TEST_CASE("mass of feature rows and target values") {
    const Example ex = load_example(ExampleId::HiringV1);
    const auto mass = feature_target_mass(ex.model);
    REQUIRE(mass.size() == 2);
    CHECK(mass[0][1] == doctest::Approx(0.5 * 0.51));
    CHECK(mass[1][0] == doctest::Approx(0.5 * 0.51));
}

TEST_CASE("custom loss tables") {
    const Example ex = load_example(ExampleId::HiringV2);
    // Predicting 1 is free; predicting 0 costs 1 whatever Y is.
    const LossSpec lopsided = LossSpec::custom({{i64(0), i64(0), -1.0},
                                                {i64(1), i64(0), -1.0},
                                                {i64(0), i64(1), 0.0},
                                                {i64(1), i64(1), 0.0}});
    const auto set = optimal_policies_bruteforce(ex.model, lopsided, ex.model.domain(ex.model.prediction()));
    REQUIRE(set.members.size() == 1);
    CHECK(same_value(set.members[0].action(0), i64(1)));
    CHECK(same_value(set.members[0].action(1), i64(1)));
    CHECK_THROWS_AS(lopsided.utility(i64(2), i64(0)), PreconditionError);
}
