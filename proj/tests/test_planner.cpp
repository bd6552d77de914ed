#include "oracles.hpp"

#include "intpath/planner.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace intpath;

namespace {

RoadGraph graph_of(const std::vector<std::pair<std::string, Vec3>>& nodes,
                   const std::vector<std::pair<std::string, std::string>>& edges) {
    RoadGraph g;
    for (const auto& [id, p] : nodes) g.nodes[id] = p;
    for (const auto& [a, b] : edges) g.edges.push_back({a, b, (g.nodes[a] - g.nodes[b]).norm()});
    return g;
}

NodeSchedule line_schedule(const std::vector<double>& seg) {
    NodeSchedule s;
    for (std::size_t i = 0; i < seg.size(); ++i) {
        s.entries.push_back({"p" + std::to_string(i), Vec3::Zero(), static_cast<double>(i), seg[i]});
    }
    return s;
}

std::map<std::string, NodeIntegrityResult> results_of(const std::vector<double>& hpl, const std::vector<bool>& fault) {
    std::map<std::string, NodeIntegrityResult> out;
    for (std::size_t i = 0; i < hpl.size(); ++i) {
        NodeIntegrityResult r;
        r.node_id = "p" + std::to_string(i);
        r.hpl = hpl[i];
        r.fault = fault[i];
        out[r.node_id] = r;
    }
    return out;
}

PathEvaluation evaluation(double cost, double dist, bool feasible, std::vector<std::string> nodes) {
    PathEvaluation e;
    e.cost = cost;
    e.total_distance = dist;
    e.feasible = feasible;
    e.nodes = std::move(nodes);
    return e;
}

}  // namespace

TEST(EnumerateCandidates, StraightLineHasOnePath) {
    const auto g = graph_of({{"a", {0, 0, 0}}, {"b", {10, 0, 0}}, {"c", {20, 0, 0}}}, {{"a", "b"}, {"b", "c"}});
    const auto c = enumerate_candidates(g, "a", "c", 10);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].nodes, (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_DOUBLE_EQ(c[0].total_distance(), 20.0);
}

TEST(EnumerateCandidates, FourCycleShorterFirst) {
    const auto g = graph_of({{"s", {0, 0, 0}}, {"u", {10, 0, 0}}, {"t", {10, 10, 0}}, {"v", {0, 30, 0}}},
                            {{"s", "u"}, {"u", "t"}, {"t", "v"}, {"v", "s"}});
    const auto c = enumerate_candidates(g, "s", "t", 10);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[0].nodes, (std::vector<std::string>{"s", "u", "t"}));
    EXPECT_LT(c[0].total_distance(), c[1].total_distance());
}

TEST(EnumerateCandidates, UnreachableTargetThrows) {
    const auto g = graph_of({{"a", {0, 0, 0}}, {"b", {1, 0, 0}}, {"c", {5, 5, 0}}}, {{"a", "b"}});
    EXPECT_THROW(enumerate_candidates(g, "a", "c", 3), ValidationError);
    EXPECT_THROW(enumerate_candidates(g, "a", "zz", 3), ValidationError);
}

TEST(EnumerateCandidates, NamedRoutesAreAddedOrRenamed) {
    const auto g = graph_of({{"s", {0, 0, 0}}, {"u", {10, 0, 0}}, {"t", {10, 10, 0}}, {"v", {0, 30, 0}}},
                            {{"s", "u"}, {"u", "t"}, {"t", "v"}, {"v", "s"}});
    const std::map<std::string, std::vector<std::string>> named{{"east", {"s", "u", "t"}}, {"west", {"s", "v", "t"}}};
    const auto c = enumerate_candidates(g, "s", "t", 1, named);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[0].name, "east");
    EXPECT_EQ(c[1].name, "west");
}

TEST(EnumerateCandidates, MatchesExhaustiveEnumeration) {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 30; ++k) {
        const auto g = oracle::random_graph(rng, 12, 10);
        const auto all = oracle::all_simple_paths(g, "n0", "n11");
        const std::size_t K = 8;
        const auto got = enumerate_candidates(g, "n0", "n11", K);
        ASSERT_EQ(got.size(), std::min(K, all.size()));
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].nodes, all[i].nodes) << "graph " << k << " rank " << i;
            EXPECT_NEAR(got[i].total_distance(), all[i].length, 1e-9);
        }
    }
}

TEST(EvaluatePath, CostIsLengthWeightedHpl) {
    const auto ev = evaluate_path(line_schedule({0, 10, 10}), results_of({1, 2, 3}, {false, false, false}),
                                  IntegrityParams{});
    EXPECT_DOUBLE_EQ(ev.cost, 50.0);
    EXPECT_DOUBLE_EQ(ev.total_distance, 20.0);
    EXPECT_DOUBLE_EQ(ev.avg_hpl, 2.0);
    EXPECT_DOUBLE_EQ(ev.max_hpl, 3.0);
    EXPECT_TRUE(ev.feasible);
}

TEST(EvaluatePath, FaultRatioAboveLimit) {
    const auto ev = evaluate_path(line_schedule({0, 5, 5, 5}), results_of({1, 1, 1, 1}, {false, false, true, false}),
                                  IntegrityParams{});
    EXPECT_DOUBLE_EQ(ev.fault_ratio, 0.25);
    EXPECT_EQ(ev.n_faulty, 1u);
    EXPECT_FALSE(ev.fault_ratio_ok);
    EXPECT_FALSE(ev.feasible);
}

TEST(EvaluatePath, HplAboveAlertLimit) {
    const auto ev = evaluate_path(line_schedule({0, 5, 5}), results_of({10, 40.5, 10}, {false, false, false}),
                                  IntegrityParams{});
    EXPECT_TRUE(ev.fault_ratio_ok);
    EXPECT_FALSE(ev.hal_ok);
    EXPECT_FALSE(ev.feasible);
}

TEST(EvaluatePath, InfiniteHplIsInfeasible) {
    const double inf = std::numeric_limits<double>::infinity();
    const auto ev = evaluate_path(line_schedule({0, 5}), results_of({1, inf}, {false, true}), IntegrityParams{});
    EXPECT_FALSE(ev.feasible);
    EXPECT_TRUE(std::isinf(ev.cost));
}

TEST(EvaluatePath, SplittingSegmentKeepsCost) {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> len(1.0, 100.0), h(1.0, 50.0);
    for (int k = 0; k < 100; ++k) {
        const double a = len(rng), b = len(rng), ha = h(rng), hb = h(rng), hc = h(rng);
        const auto whole = evaluate_path(line_schedule({0, a, b}), results_of({ha, hb, hc}, {false, false, false}),
                                         IntegrityParams{});
        const double f = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
        const auto split = evaluate_path(line_schedule({0, a, f * b, (1 - f) * b}),
                                         results_of({ha, hb, hc, hc}, {false, false, false, true}), IntegrityParams{});
        EXPECT_NEAR(split.cost, whole.cost, 1e-9 * whole.cost);
    }
}

TEST(SelectOptimal, Examples) {
    const auto r = select_optimal({evaluation(5, 1, true, {"a"}), evaluation(3, 1, true, {"b"}),
                                   evaluation(7, 1, true, {"c"})});
    ASSERT_TRUE(r.chosen);
    EXPECT_EQ(*r.chosen, 1u);
    const auto none = select_optimal({evaluation(1, 1, false, {"a"}), evaluation(2, 1, false, {"b"})});
    EXPECT_FALSE(none.chosen);
    EXPECT_THROW(select_optimal({}), ValidationError);
}

TEST(SelectOptimal, TieBreaks) {
    const auto by_dist = select_optimal({evaluation(3, 9, true, {"a"}), evaluation(3, 4, true, {"b"})});
    EXPECT_EQ(*by_dist.chosen, 1u);
    const auto by_name = select_optimal({evaluation(3, 4, true, {"s", "y"}), evaluation(3, 4, true, {"s", "x"})});
    EXPECT_EQ(*by_name.chosen, 1u);
}

TEST(SelectOptimal, MatchesBruteForce) {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> count(1, 8), cost(0, 20), dist(1, 5), name(0, 3);
    std::bernoulli_distribution feasible(0.6);
    for (int k = 0; k < 100; ++k) {
        std::vector<PathEvaluation> ev;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            ev.push_back(evaluation(cost(rng), dist(rng), feasible(rng), {"s", "m" + std::to_string(name(rng)), "t"}));
        }
        EXPECT_EQ(select_optimal(ev).chosen, oracle::brute_force_choice(ev)) << "instance " << k;
    }
}

TEST(SelectOptimal, UniformHplScalingKeepsChoice) {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> h(1.0, 30.0), len(5.0, 50.0);
    IntegrityParams p;
    p.hal = 1e9;
    for (int k = 0; k < 50; ++k) {
        std::vector<PathEvaluation> base, scaled;
        const double s = std::uniform_real_distribution<double>(0.2, 5.0)(rng);
        for (int c = 0; c < 4; ++c) {
            std::vector<double> seg{0.0}, hpl{h(rng)};
            for (int i = 0; i < 4; ++i) seg.push_back(len(rng)), hpl.push_back(h(rng));
            const std::vector<bool> fault(5, false);
            auto a = evaluate_path(line_schedule(seg), results_of(hpl, fault), p);
            for (auto& v : hpl) v *= s;
            auto b = evaluate_path(line_schedule(seg), results_of(hpl, fault), p);
            EXPECT_NEAR(b.cost, s * a.cost, 1e-9 * b.cost);
            a.nodes = b.nodes = {"c" + std::to_string(c)};
            base.push_back(a);
            scaled.push_back(b);
        }
        EXPECT_EQ(select_optimal(base).chosen, select_optimal(scaled).chosen);
    }
}

TEST(SelectOptimal, RelaxingConstraintsLowersTheOptimum) {
    std::mt19937_64 rng(25);
    std::uniform_real_distribution<double> h(5.0, 60.0), len(5.0, 50.0);
    std::bernoulli_distribution faulty(0.1);
    IntegrityParams strict;
    IntegrityParams relaxed;
    relaxed.fault_max = 1.0;
    relaxed.hal = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 100; ++k) {
        std::vector<PathEvaluation> a, b;
        for (int c = 0; c < 5; ++c) {
            std::vector<double> seg{0.0}, hpl{h(rng)};
            std::vector<bool> fault{faulty(rng)};
            for (int i = 0; i < 5; ++i) seg.push_back(len(rng)), hpl.push_back(h(rng)), fault.push_back(faulty(rng));
            a.push_back(evaluate_path(line_schedule(seg), results_of(hpl, fault), strict));
            b.push_back(evaluate_path(line_schedule(seg), results_of(hpl, fault), relaxed));
            a.back().nodes = b.back().nodes = {"c" + std::to_string(c)};
            if (a.back().feasible) {
                EXPECT_TRUE(b.back().feasible);
            }
        }
        const auto ra = select_optimal(a);
        const auto rb = select_optimal(b);
        ASSERT_TRUE(rb.chosen);
        if (ra.chosen) {
            EXPECT_LE(b[*rb.chosen].cost, a[*ra.chosen].cost);
        }
    }
}
