#include <algorithm>
#include <cmath>
#include <memory>

#include "conlab/algorithms.hpp"
#include "conlab/engine.hpp"
#include "conlab/errors.hpp"
#include "conlab/graphs.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace conlab;
using namespace conlab::testing;

namespace {

std::vector<Vec> scalar_outputs(std::vector<double> ys) {
    std::vector<Vec> out;
    for (double y : ys) out.push_back({y});
    return out;
}

// Cyclic out-neighbor ring: agent i sends to i and i+1. Doubly stochastic
// under mass splitting, so repeated rounds settle on the average.
CommGraph ring3() { return CommGraph::from_in_lists(3, {{0, 2}, {0, 1}, {1, 2}}); }

// Strongly connected but not doubly stochastic under even splitting.
CommGraph lopsided3() { return CommGraph::from_in_lists(3, {{0, 2}, {0, 1}, {0, 1, 2}}); }

double spread(const Algorithm& alg, const Configuration& c) { return output_delta(alg, c); }

}  // namespace

TEST_CASE("thirds moves two thirds of the way") {
    ThirdsAlgorithm thirds;
    CHECK(thirds.name() == "thirds");
    CHECK(thirds.dimension() == 1);
    CHECK(thirds.convex());
    CHECK_THROWS_AS(thirds.check_agent_count(1), validation_error);
    CHECK_THROWS_AS(thirds.check_agent_count(3), validation_error);

    Configuration c = make_initial(thirds, scalar_outputs({0, 1}));
    CHECK(outputs(thirds, apply_round(thirds, one_to_two(), c)) ==
          std::vector<Vec>{{0.0}, {1.0 / 3.0}});
    CHECK(outputs(thirds, apply_round(thirds, two_to_one(), c)) ==
          std::vector<Vec>{{2.0 / 3.0}, {1.0}});
    CHECK(outputs(thirds, apply_round(thirds, complete2(), c)) ==
          std::vector<Vec>{{2.0 / 3.0}, {1.0 / 3.0}});

    // Agreement is an exact fixed point, not an approximate one.
    Configuration agreed = make_initial(thirds, scalar_outputs({0.7, 0.7}));
    Configuration after = apply_round(thirds, complete2(), agreed);
    CHECK(outputs(thirds, after) == std::vector<Vec>{{0.7}, {0.7}});
}

TEST_CASE("midpoint halves the spread under non-split graphs") {
    CHECK_THROWS_AS(MidpointAlgorithm(0), validation_error);
    MidpointAlgorithm mid2(2);
    CHECK(mid2.dimension() == 2);
    Configuration c = make_initial(mid2, {{0.0, 10.0}, {1.0, 20.0}, {4.0, 30.0}});
    Configuration after = apply_round(mid2, CommGraph::complete(3), c);
    CHECK(outputs(mid2, after) == std::vector<Vec>{{2.0, 20.0}, {2.0, 20.0}, {2.0, 20.0}});

    MidpointAlgorithm mid;
    std::mt19937_64 rng(404);
    for (int n : {3, 4, 5}) {
        for (int trial = 0; trial < 40; ++trial) {
            CommGraph g = random_graph_such_that(n, rng, is_nonsplit);
            std::vector<Vec> y0 = random_outputs(n, rng);
            double lo = y0[0][0], hi = y0[0][0];
            for (const auto& y : y0) {
                lo = std::min(lo, y[0]);
                hi = std::max(hi, y[0]);
            }
            Configuration before = make_initial(mid, y0);
            Configuration next = apply_round(mid, g, before);
            CHECK(spread(mid, next) <= spread(mid, before) / 2 + 1e-12);
            for (const auto& y : outputs(mid, next)) {
                CHECK(y[0] >= lo);
                CHECK(y[0] <= hi);
            }
        }
    }
}

TEST_CASE("midpoint spread after t non-split rounds is at most half per round") {
    MidpointAlgorithm mid;
    std::mt19937_64 rng(405);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 4;
        auto [model, indices] = random_pattern(n, 12, rng, is_nonsplit);
        RecordedSource source(model, indices);
        std::vector<Vec> y0 = random_outputs(n, rng);
        Execution exec = run(mid, y0, source, 12);
        double delta0 = output_delta(mid, exec.initial);
        for (int t = 0; t <= 12; ++t)
            CHECK(output_delta(mid, exec.config_at(t)) <=
                  delta0 * std::pow(0.5, t) + 1e-9);
    }
}

TEST_CASE("amortized midpoint relays extrema for a phase then jumps") {
    CHECK_THROWS_AS(AmortizedMidpointAlgorithm(1), validation_error);
    CHECK_THROWS_AS(AmortizedMidpointAlgorithm(3, 0), validation_error);

    AmortizedMidpointAlgorithm alg(3);
    CHECK(alg.phase_length() == 2);
    CHECK(alg.name() == "amortized-midpoint");
    CHECK_THROWS_AS(make_initial(alg, scalar_outputs({0, 1})), validation_error);

    Configuration c = make_initial(alg, scalar_outputs({0, 1, 2}));
    CHECK(alg.phase_position(c.states[0]) == 0.0);
    CHECK(outputs(alg, c) == std::vector<Vec>{{0.0}, {1.0}, {2.0}});

    Configuration mid_phase = apply_round(alg, CommGraph::complete(3), c);
    // Outputs hold still inside a phase while the extrema travel.
    CHECK(outputs(alg, mid_phase) == std::vector<Vec>{{0.0}, {1.0}, {2.0}});
    CHECK(alg.phase_position(mid_phase.states[1]) == 1.0);

    Configuration done = apply_round(alg, CommGraph::complete(3), mid_phase);
    CHECK(outputs(alg, done) == std::vector<Vec>{{1.0}, {1.0}, {1.0}});
    CHECK(alg.phase_position(done.states[2]) == 0.0);

    AmortizedMidpointAlgorithm alg2(3, 2);
    Configuration c2 = make_initial(alg2, {{0.0, 5.0}, {1.0, 6.0}, {2.0, 7.0}});
    CHECK(c2.states[0].size() == 3 * 2 + 1);
    CHECK(alg2.output(c2.states[1]) == Vec{1.0, 6.0});
}

TEST_CASE("amortized midpoint halves the spread per rooted phase") {
    std::mt19937_64 rng(406);
    for (int n : {3, 4, 5}) {
        AmortizedMidpointAlgorithm alg(n);
        const int phases = 3;
        const int len = phases * (n - 1);
        for (int trial = 0; trial < 25; ++trial) {
            auto [model, indices] = random_pattern(n, len, rng, is_rooted);
            RecordedSource source(model, indices);
            std::vector<Vec> y0 = random_outputs(n, rng);
            Execution exec = run(alg, y0, source, len);
            double delta0 = output_delta(alg, exec.initial);
            for (int k = 0; k <= phases; ++k)
                CHECK(output_delta(alg, exec.config_at(k * (n - 1))) <=
                      delta0 * std::pow(0.5, k) + 1e-9);
        }
    }
}

TEST_CASE("mass splitting conserves the total but leaves the hull") {
    CHECK_THROWS_AS(MassSplitAlgorithm{one_to_two()}, validation_error);
    CHECK_THROWS_AS(MassSplitAlgorithm{CommGraph::identity(3)}, validation_error);

    MassSplitAlgorithm alg(lopsided3());
    CHECK_FALSE(alg.convex());
    CHECK(alg.declared() == lopsided3());
    CHECK_THROWS_AS(alg.check_agent_count(2), validation_error);
    CHECK_THROWS_WITH_AS(apply_round(alg, CommGraph::complete(3),
                                     make_initial(alg, scalar_outputs({1, 1, 1}))),
                         doctest::Contains("declared"), validation_error);

    // From agreement at 1, one round pushes an agent to 4/3, outside the
    // hull of everything it heard.
    Configuration c = make_initial(alg, scalar_outputs({1, 1, 1}));
    Configuration after = apply_round(alg, lopsided3(), c);
    double third = 1.0 / 3.0;
    CHECK(outputs(alg, after) ==
          std::vector<Vec>{{third + 0.5}, {third + 0.5}, {third + 0.5 + 0.5}});
    CHECK(outputs(alg, after)[2][0] > 1.0);

    // The total is preserved up to rounding across many rounds.
    MassSplitAlgorithm ring_alg(ring3());
    std::mt19937_64 rng(11);
    std::vector<Vec> y0 = random_outputs(3, rng, -2.0, 5.0);
    double total = y0[0][0] + y0[1][0] + y0[2][0];
    Configuration state = make_initial(ring_alg, y0);
    for (int t = 0; t < 200; ++t) state = apply_round(ring_alg, ring3(), state);
    auto final_y = outputs(ring_alg, state);
    CHECK(std::abs(final_y[0][0] + final_y[1][0] + final_y[2][0] - total) <= 1e-9);
    // The ring splits evenly both ways, so the values settle on the mean.
    for (const auto& y : final_y) CHECK(std::abs(y[0] - total / 3.0) <= 1e-9);
}

TEST_CASE("decision round counts per regime") {
    CHECK(decision_rounds(ApproxRegime::two_agent, 1.0, 0.1, 2) == 3);
    CHECK(decision_rounds(ApproxRegime::nonsplit_midpoint, 1.0, 0.1, 3) == 4);
    CHECK(decision_rounds(ApproxRegime::rooted_amortized, 1.0, 0.1, 4) == 12);
    CHECK(decision_rounds(ApproxRegime::two_agent, 9.0, 1.0, 2) == 2);
    CHECK(decision_rounds(ApproxRegime::nonsplit_midpoint, 8.0, 1.0, 3) == 3);
    CHECK(decision_rounds(ApproxRegime::two_agent, 0.05, 0.1, 2) == 0);
    CHECK_THROWS_AS(decision_rounds(ApproxRegime::two_agent, 0.0, 0.1, 2), validation_error);
    CHECK_THROWS_AS(decision_rounds(ApproxRegime::two_agent, 1.0, 0.0, 2), validation_error);

    CHECK(parse_regime("two_agent") == ApproxRegime::two_agent);
    CHECK(parse_regime("nonsplit_midpoint") == ApproxRegime::nonsplit_midpoint);
    CHECK(parse_regime("rooted_amortized") == ApproxRegime::rooted_amortized);
    CHECK_THROWS_AS(parse_regime("bogus"), validation_error);
    for (auto r : {ApproxRegime::two_agent, ApproxRegime::nonsplit_midpoint,
                   ApproxRegime::rooted_amortized})
        CHECK(parse_regime(regime_name(r)) == r);
}

TEST_CASE("decision wrapper freezes its output at the decision round") {
    auto inner = std::make_shared<MidpointAlgorithm>();
    DecisionAlgorithm alg(inner, 1.0, 0.1, ApproxRegime::nonsplit_midpoint, 3);
    CHECK(alg.name() == "decide:midpoint");
    CHECK(alg.decision_round() == 4);
    CHECK(alg.convex());

    // Repeat the graph that deafens agent 1; values drift toward 0.
    std::vector<AgentSet> masks{AgentSet{1}, AgentSet{0b111}, AgentSet{0b111}};
    CommGraph deaf0(3, std::move(masks));
    NetworkModel model({deaf0});
    ConstantSource source(model, 0);
    Execution exec = run(alg, scalar_outputs({0, 0.5, 1}), source, 8);

    for (int t = 0; t <= 3; ++t)
        for (const auto& state : exec.config_at(t).states) CHECK_FALSE(alg.has_decided(state));
    CHECK_THROWS_AS(alg.decision_of(exec.config_at(0).states[0]), validation_error);

    const Configuration& at4 = exec.config_at(4);
    std::vector<double> decided;
    for (const auto& state : at4.states) {
        CHECK(alg.has_decided(state));
        decided.push_back(alg.decision_of(state)[0]);
    }
    double gap = *std::max_element(decided.begin(), decided.end()) -
                 *std::min_element(decided.begin(), decided.end());
    CHECK(gap <= 0.1);

    // Later rounds keep reporting the frozen decision.
    for (int t = 4; t <= 8; ++t)
        for (int i = 0; i < 3; ++i) {
            const AgentState& state = exec.config_at(t).states[i];
            CHECK(alg.has_decided(state));
            CHECK(alg.decision_of(state)[0] == decided[i]);
            CHECK(alg.output(state) == Vec{decided[i]});
        }
}

TEST_CASE("decision wrapper with zero rounds decides immediately") {
    auto inner = std::make_shared<MidpointAlgorithm>();
    DecisionAlgorithm alg(inner, 0.05, 0.1, ApproxRegime::nonsplit_midpoint, 3);
    CHECK(alg.decision_round() == 0);
    std::vector<double> ys{0.2, 0.21, 0.22};
    Configuration c = make_initial(alg, scalar_outputs(ys));
    for (int i = 0; i < 3; ++i) {
        CHECK(alg.has_decided(c.states[i]));
        CHECK(alg.decision_of(c.states[i]) == Vec{ys[i]});
    }
}

TEST_CASE("decision wrapper enforces the regime's graph contract") {
    auto mid = std::make_shared<MidpointAlgorithm>();

    DecisionAlgorithm two(std::make_shared<ThirdsAlgorithm>(), 1.0, 0.1,
                          ApproxRegime::two_agent, 2);
    CHECK_NOTHROW(two.check_graph(one_to_two()));
    CHECK_THROWS_WITH_AS(two.check_graph(CommGraph::identity(2)),
                         doctest::Contains("rooted two-agent"), validation_error);

    DecisionAlgorithm nonsplit(mid, 1.0, 0.1, ApproxRegime::nonsplit_midpoint, 3);
    CHECK_NOTHROW(nonsplit.check_graph(CommGraph::complete(3)));
    CHECK_THROWS_WITH_AS(nonsplit.check_graph(CommGraph::identity(3)),
                         doctest::Contains("split"), validation_error);

    DecisionAlgorithm rooted(mid, 1.0, 0.1, ApproxRegime::rooted_amortized, 3);
    CHECK_NOTHROW(rooted.check_graph(CommGraph::from_in_lists(3, {{0}, {0, 1}, {1, 2}})));
    CHECK_THROWS_WITH_AS(rooted.check_graph(CommGraph::identity(3)),
                         doctest::Contains("unrooted"), validation_error);

    CHECK_THROWS_AS(make_initial(DecisionAlgorithm(mid, 1.0, 0.1,
                                                   ApproxRegime::nonsplit_midpoint, 3),
                                 scalar_outputs({0, 1})),
                    validation_error);
}

TEST_CASE("two-agent decisions agree under every pattern of the full length") {
    auto thirds = std::make_shared<ThirdsAlgorithm>();
    DecisionAlgorithm alg(thirds, 1.0, 0.1, ApproxRegime::two_agent, 2);
    const int T = alg.decision_round();
    REQUIRE(T == 3);
    NetworkModel model = two_agent_graphs();

    for (int code = 0; code < 27; ++code) {
        std::vector<int> indices{code % 3, code / 3 % 3, code / 9 % 3};
        RecordedSource source(model, indices);
        Execution exec = run(alg, scalar_outputs({0, 1}), source, T);
        const Configuration& last = exec.config_at(T);
        std::vector<double> decisions;
        for (const auto& state : last.states) {
            REQUIRE(alg.has_decided(state));
            decisions.push_back(alg.decision_of(state)[0]);
        }
        CHECK(std::abs(decisions[0] - decisions[1]) <= 0.1 + 1e-12);
        for (double v : decisions) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("algorithm factory") {
    CHECK(make_algorithm("thirds", 2)->name() == "thirds");
    CHECK(make_algorithm("midpoint", 5)->name() == "midpoint");
    auto amortized = make_algorithm("amortized-midpoint", 4);
    CHECK(amortized->name() == "amortized-midpoint");
    CHECK_THROWS_AS(make_initial(*amortized, scalar_outputs({0, 1, 2})), validation_error);

    NetworkModel single({ring3()});
    CHECK(make_algorithm("mass-split", 3, &single)->name() == "mass-split");
    CHECK_THROWS_AS(make_algorithm("mass-split", 3), validation_error);
    NetworkModel pair({ring3(), CommGraph::complete(3)});
    CHECK_THROWS_AS(make_algorithm("mass-split", 3, &pair), validation_error);
    CHECK_THROWS_WITH_AS(make_algorithm("nope", 3), doctest::Contains("unknown algorithm"),
                         validation_error);
}

TEST_CASE("min-relay value sets") {
    MinRelayState state;
    CHECK_THROWS_AS(state.y(), validation_error);
    CHECK(state.merge({3.0, 1.0}));
    CHECK(state.values == std::vector<double>{1.0, 3.0});
    CHECK(state.y() == 1.0);
    CHECK_FALSE(state.merge({1.0, 3.0}));
    CHECK(state.merge({0.5, 3.0}));
    CHECK(state.y() == 0.5);
    CHECK(state.merge({2.0, 2.0}));
    CHECK(state.values == std::vector<double>{0.5, 1.0, 2.0, 3.0});
}
