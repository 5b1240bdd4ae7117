#include <doctest.h>

#include <random>

#include "itv/error.hpp"
#include "itv/graph.hpp"
#include "oracles.hpp"

using namespace itv;

namespace {

SLGraph hiring_graph() {
    return SLGraph({{"A", NodeRole::Sensitive},
                    {"D", NodeRole::Chance},
                    {"Y", NodeRole::Target},
                    {"Yhat", NodeRole::Prediction},
                    {"U", NodeRole::Utility}},
                   {{"A", "D"}, {"D", "Yhat"}, {"D", "Y"}, {"Y", "U"}, {"Yhat", "U"}});
}

SLGraph music_graph() {
    return SLGraph({{"A", NodeRole::Sensitive},
                    {"M", NodeRole::Chance},
                    {"T", NodeRole::Chance},
                    {"Y", NodeRole::Target},
                    {"Yhat", NodeRole::Prediction},
                    {"U", NodeRole::Utility}},
                   {{"A", "T"}, {"M", "T"}, {"M", "Y"}, {"T", "Yhat"}, {"Y", "U"}, {"Yhat", "U"}});
}

SLGraph degrees_graph() {
    return SLGraph({{"A", NodeRole::Sensitive},
                    {"D", NodeRole::Chance},
                    {"Y", NodeRole::Target},
                    {"Yhat", NodeRole::Prediction},
                    {"U", NodeRole::Utility}},
                   {{"A", "D"}, {"A", "Y"}, {"D", "Yhat"}, {"D", "Y"}, {"Y", "U"}, {"Yhat", "U"}});
}

NodeSet set_of(const SLGraph& g, std::initializer_list<const char*> labels) {
    NodeSet s;
    for (auto l : labels) s.insert(g.id(l));
    return s;
}

SLGraph random_dag(std::size_t n, double p, std::mt19937_64& rng) {
    std::vector<SLGraph::NodeSpec> nodes;
    for (std::size_t i = 0; i < n; ++i) nodes.push_back({"V" + std::to_string(i), NodeRole::Chance});
    std::vector<std::pair<std::string, std::string>> edges;
    std::bernoulli_distribution coin(p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (coin(rng)) edges.push_back({nodes[i].label, nodes[j].label});
    return SLGraph(nodes, edges);
}

}  // namespace

TEST_CASE("construction rejects duplicate labels and unknown endpoints") {
    CHECK_THROWS_AS(SLGraph({{"A", NodeRole::Chance}, {"A", NodeRole::Chance}}, {}), PreconditionError);
    CHECK_THROWS_AS(SLGraph({{"A", NodeRole::Chance}}, {{"A", "B"}}), PreconditionError);
}

TEST_CASE("validation reports each structural violation") {
    CHECK(validate_sl_graph(hiring_graph()).ok());

    SLGraph loop = hiring_graph().with_edge("D", "A");
    auto r = validate_sl_graph(loop);
    REQUIRE_FALSE(r.ok());
    CHECK(r.violations[0] == "graph contains a directed cycle");

    SLGraph bad_u = hiring_graph().with_edge("D", "U");
    CHECK_FALSE(validate_sl_graph(bad_u).ok());

    SLGraph yhat_child({{"A", NodeRole::Sensitive},
                        {"Y", NodeRole::Target},
                        {"Yhat", NodeRole::Prediction},
                        {"X", NodeRole::Chance},
                        {"U", NodeRole::Utility}},
                       {{"A", "Yhat"}, {"Yhat", "X"}, {"Y", "U"}, {"Yhat", "U"}});
    auto r2 = validate_sl_graph(yhat_child);
    REQUIRE(r2.violations.size() == 1);
    CHECK(r2.violations[0] == "Prediction child other than Utility: X");

    SLGraph no_target({{"Yhat", NodeRole::Prediction}, {"U", NodeRole::Utility}}, {{"Yhat", "U"}});
    CHECK(validate_sl_graph(no_target).violations.size() == 2);
}

TEST_CASE("topological order breaks ties by insertion order") {
    const SLGraph g = music_graph();
    std::vector<std::string> labels;
    for (auto n : g.topological_order()) labels.push_back(g.label(n));
    CHECK(labels == std::vector<std::string>{"A", "M", "T", "Y", "Yhat", "U"});
    CHECK_THROWS_AS(g.with_edge("Yhat", "A").topological_order(), PreconditionError);
}

TEST_CASE("d-separation on the collider at T") {
    const SLGraph g = music_graph();
    CHECK(d_separated(g, set_of(g, {"A"}), set_of(g, {"M"}), {}));
    CHECK_FALSE(d_separated(g, set_of(g, {"A"}), set_of(g, {"M"}), set_of(g, {"T"})));
    CHECK_FALSE(d_separated(g, set_of(g, {"A"}), set_of(g, {"M"}), set_of(g, {"Yhat"})));
    CHECK(d_separated(g, set_of(g, {"A"}), set_of(g, {"Y"}), {}));
    CHECK_FALSE(d_separated(g, set_of(g, {"A"}), set_of(g, {"Y"}), set_of(g, {"T"})));
    CHECK_THROWS_AS(d_separated(g, set_of(g, {"A"}), set_of(g, {"A"}), {}), PreconditionError);
}

TEST_CASE("d-separation agrees with the moral-graph oracle on random graphs") {
    std::mt19937_64 rng(12345);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 3 + trial % 6;
        const SLGraph g = random_dag(n, 0.35, rng);
        std::uniform_int_distribution<int> pick(0, 3);
        for (int q = 0; q < 10; ++q) {
            NodeSet x, y, z;
            for (auto v : g.nodes()) {
                switch (pick(rng)) {
                    case 0: x.insert(v); break;
                    case 1: y.insert(v); break;
                    case 2: z.insert(v); break;
                    default: break;
                }
            }
            if (x.empty() || y.empty()) continue;
            CHECK(d_separated(g, x, y, z) == oracle::moral_d_separated(g, x, y, z));
            ++checked;
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("active paths are shortest and lexicographically smallest") {
    const SLGraph g = degrees_graph();
    auto p = shortest_active_path(g, g.id("A"), g.id("Y"), {});
    REQUIRE(p);
    CHECK(g.format_path(*p) == "A -> Y");
    auto all = active_paths(g, g.id("A"), g.id("Y"), {});
    REQUIRE(all.size() == 2);
    CHECK(g.format_path(all[1]) == "A -> D -> Y");
    CHECK(shortest_active_path(g, g.id("A"), g.id("Y"), set_of(g, {"D"})).has_value());
    CHECK_FALSE(shortest_active_path(music_graph(), music_graph().id("A"), music_graph().id("M"), {}));
}

TEST_CASE("requisite features and the introduced-variation criteria on the worked examples") {
    SUBCASE("hiring: Theorem 1 holds, Theorem 2 does not") {
        const SLGraph g = hiring_graph();
        CHECK(requisite_features(g) == set_of(g, {"D"}));
        auto w = itv_criterion(g);
        CHECK(w.satisfied);
        REQUIRE(w.feature);
        CHECK(g.label(*w.feature) == "D");
        CHECK(g.format_path(w.path) == "A -> D");
        CHECK_FALSE(padmissible_extra_condition(g));
        CHECK_FALSE(padmissible_itv_criterion(g));
    }
    SUBCASE("music: both hold") {
        const SLGraph g = music_graph();
        CHECK(requisite_features(g) == set_of(g, {"T"}));
        CHECK(itv_criterion(g).satisfied);
        CHECK(padmissible_itv_criterion(g));
        const SLGraph with_a = g.with_edge("A", "Yhat");
        CHECK(itv_criterion(with_a).satisfied);
        CHECK_FALSE(padmissible_itv_criterion(with_a));
    }
    SUBCASE("degrees: both hold, PSIE via D holds") {
        const SLGraph g = degrees_graph();
        CHECK(itv_criterion(g).satisfied);
        CHECK(padmissible_itv_criterion(g));
        const EdgeSubgraph via_d = directed_paths_via(g, g.id("D"));
        CHECK(via_d.edges() == EdgeSubgraph(g, {{"A", "D"}, {"D", "Yhat"}, {"D", "Y"}}).edges());
        auto w = psie_criterion(g, via_d);
        CHECK(w.satisfied);
        CHECK(g.format_path(w.path) == "A -> D -> Yhat");
        CHECK_FALSE(psie_criterion(g, EdgeSubgraph(g, {{"A", "Y"}})).satisfied);
    }
    SUBCASE("a feature that is not requisite does not count") {
        const SLGraph g({{"A", NodeRole::Sensitive},
                         {"X", NodeRole::Chance},
                         {"Z", NodeRole::Chance},
                         {"Y", NodeRole::Target},
                         {"Yhat", NodeRole::Prediction},
                         {"U", NodeRole::Utility}},
                        {{"A", "X"}, {"X", "Yhat"}, {"Z", "Yhat"}, {"Z", "Y"}, {"Y", "U"}, {"Yhat", "U"}});
        CHECK(requisite_features(g) == set_of(g, {"Z"}));
        CHECK_FALSE(itv_criterion(g).satisfied);
    }
}

TEST_CASE("edge subgraphs are tied to their graph") {
    const SLGraph g = degrees_graph();
    const EdgeSubgraph s(g, {{"A", "D"}});
    CHECK_NOTHROW(s.check_belongs_to(g));
    CHECK_THROWS_AS(s.check_belongs_to(hiring_graph()), PreconditionError);
    CHECK_THROWS_AS(EdgeSubgraph(g, {{"D", "A"}}), PreconditionError);
    CHECK(EdgeSubgraph::all(g).edges() == g.edges());
    CHECK(EdgeSubgraph::none(g).empty());
}

TEST_CASE("a PSIE witness is also a Theorem 1 witness") {
    std::mt19937_64 rng(99);
    int found = 0;
    for (int trial = 0; trial < 400; ++trial) {
        SLGraph base = random_dag(5, 0.45, rng);
        std::vector<SLGraph::NodeSpec> nodes;
        std::vector<std::pair<std::string, std::string>> edges;
        for (auto v : base.nodes()) nodes.push_back({base.label(v), NodeRole::Chance});
        nodes[0].role = NodeRole::Sensitive;
        nodes[4].role = NodeRole::Target;
        for (const auto& [f, t] : base.edges()) edges.push_back({base.label(f), base.label(t)});
        nodes.push_back({"Yhat", NodeRole::Prediction});
        nodes.push_back({"U", NodeRole::Utility});
        for (int i = 1; i < 4; ++i)
            if (rng() % 2) edges.push_back({nodes[i].label, "Yhat"});
        edges.push_back({"V4", "U"});
        edges.push_back({"Yhat", "U"});
        const SLGraph g(nodes, edges);
        for (auto v : g.nodes()) {
            if (g.role(v) != NodeRole::Chance) continue;
            const EdgeSubgraph p = directed_paths_via(g, v);
            if (psie_criterion(g, p).satisfied) {
                ++found;
                CHECK(itv_criterion(g).satisfied);
            }
        }
    }
    CHECK(found > 0);
}

TEST_CASE("fingerprints ignore edge insertion order") {
    const SLGraph a({{"X", NodeRole::Chance}, {"Y", NodeRole::Chance}, {"Z", NodeRole::Chance}},
                    {{"X", "Y"}, {"Y", "Z"}});
    const SLGraph b({{"X", NodeRole::Chance}, {"Y", NodeRole::Chance}, {"Z", NodeRole::Chance}},
                    {{"Y", "Z"}, {"X", "Y"}});
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint() != a.with_edge("X", "Z").fingerprint());
}
