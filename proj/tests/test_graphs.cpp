#include <algorithm>
#include <random>

#include "conlab/errors.hpp"
#include "conlab/graphs.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace conlab;
using namespace conlab::testing;

TEST_CASE("agent set helpers round-trip") {
    CHECK(popcount(0b1011) == 3);
    CHECK(set_to_list(0b1011) == std::vector<int>{0, 1, 3});
    CHECK(list_to_set({0, 1, 3}, 4) == AgentSet{0b1011});
    CHECK_THROWS_AS(list_to_set({4}, 4), validation_error);
}

TEST_CASE("graph construction validates self-loops and sizes") {
    CHECK_THROWS_AS(CommGraph(0, {}), validation_error);
    CHECK_THROWS_AS(CommGraph(64, std::vector<AgentSet>(64, ~AgentSet{0})), validation_error);
    // Self-loop missing at agent 2 (1-based) must name that agent.
    CHECK_THROWS_WITH_AS(CommGraph::from_in_lists(3, {{0}, {0}, {2}}),
                         doctest::Contains("agent 2"), validation_error);
    CHECK_THROWS_AS(CommGraph::from_in_lists(2, {{0, 2}, {1}}), validation_error);
    CHECK_THROWS_AS(CommGraph(2, {AgentSet{0b01}}), validation_error);  // wrong mask count
}

TEST_CASE("complete and identity graphs") {
    CommGraph k3 = CommGraph::complete(3);
    CommGraph id3 = CommGraph::identity(3);
    for (int i = 0; i < 3; ++i) {
        CHECK(k3.in_degree(i) == 3);
        CHECK(id3.in_degree(i) == 1);
        CHECK(id3.in_neighbors(i) == std::vector<int>{i});
    }
    CHECK(is_rooted(k3));
    CHECK(is_nonsplit(k3));
    CHECK_FALSE(is_rooted(id3));
    CHECK_FALSE(is_nonsplit(id3));
    CHECK(is_rooted(CommGraph::identity(1)));
    CHECK(is_nonsplit(CommGraph::identity(1)));
}

TEST_CASE("in and out views describe the same edge set") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 1 + static_cast<int>(rng() % 8);
        CommGraph g = random_graph(n, rng);
        for (int i = 0; i < n; ++i) {
            CHECK(g.in_degree(i) == popcount(g.in_mask(i)));
            CHECK(g.out_degree(i) == popcount(g.out_mask(i)));
            for (int j = 0; j < n; ++j) {
                bool e = g.has_edge(i, j);
                CHECK(e == ((g.in_mask(j) >> i & 1) != 0));
                CHECK(e == ((g.out_mask(i) >> j & 1) != 0));
            }
        }
    }
}

TEST_CASE("product matches the edge-by-edge definition") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 1 + static_cast<int>(rng() % 6);
        CommGraph g = random_graph(n, rng), h = random_graph(n, rng);
        CHECK(product(g, h) == product_oracle(g, h));
    }
}

TEST_CASE("product identity and associativity") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 2 + static_cast<int>(rng() % 5);
        CommGraph g = random_graph(n, rng), h = random_graph(n, rng), k = random_graph(n, rng);
        CommGraph id = CommGraph::identity(n);
        CHECK(product(g, id) == g);
        CHECK(product(id, g) == g);
        CHECK(product(product(g, h), k) == product(g, product(h, k)));
    }
    CHECK_THROWS_AS(product(CommGraph::complete(2), CommGraph::complete(3)), validation_error);
}

TEST_CASE("the two one-directional graphs compose to the complete graph") {
    CHECK(product(one_to_two(), two_to_one()) == complete2());
    CHECK(product(two_to_one(), one_to_two()) == complete2());
    // Repeating a one-directional graph never completes the other direction.
    CHECK(product(one_to_two(), one_to_two()) == one_to_two());
}

TEST_CASE("roots agree with the BFS oracle") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng() % 8);
        CommGraph g = random_graph(n, rng);
        CHECK(roots(g) == roots_oracle(g));
        CHECK(is_rooted(g) == !roots_oracle(g).empty());
    }
}

TEST_CASE("roots of structured graphs") {
    CHECK(roots(CommGraph::complete(4)) == std::vector<int>{0, 1, 2, 3});
    CHECK(roots(CommGraph::identity(3)).empty());
    CHECK(roots(one_to_two()) == std::vector<int>{0});
    // A ring is rooted everywhere but the deaf variants are single-rooted.
    CommGraph ring = CommGraph::from_in_lists(3, {{0, 2}, {0, 1}, {1, 2}});
    CHECK(roots(ring) == std::vector<int>{0, 1, 2});
    NetworkModel fam = deaf_family(ring);
    for (std::size_t i = 0; i < fam.size(); ++i) CHECK(roots(fam[i]).size() == 1);
}

TEST_CASE("non-split detection") {
    CHECK(is_nonsplit(CommGraph::complete(5)));
    CHECK_FALSE(is_nonsplit(CommGraph::identity(2)));
    // Rooted but split: deaf root plus an agent that cannot hear it directly.
    CommGraph g = CommGraph::from_in_lists(3, {{0}, {0, 1}, {1, 2}});
    CHECK(is_rooted(g));
    CHECK_FALSE(is_nonsplit(g));
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + static_cast<int>(rng() % 5);
        CommGraph h = random_graph(n, rng);
        bool expect = true;
        for (int a = 0; a < n && expect; ++a)
            for (int b = a + 1; b < n && expect; ++b)
                expect = (h.in_mask(a) & h.in_mask(b)) != 0;
        CHECK(is_nonsplit(h) == expect);
    }
}

TEST_CASE("deaf agents and sole deaf roots") {
    CommGraph k3 = CommGraph::complete(3);
    CHECK_FALSE(is_deaf(k3, 0));
    CHECK(sole_deaf_root(k3) == std::nullopt);
    NetworkModel fam = deaf_family(k3);
    REQUIRE(fam.size() == 3);
    for (std::size_t i = 0; i < fam.size(); ++i) {
        auto r = sole_deaf_root(fam[i]);
        REQUIRE(r.has_value());
        CHECK(is_deaf(fam[i], *r));
        CHECK(roots(fam[i]) == std::vector<int>{*r});
    }
    // Deaf but not a root: nothing to report.
    CHECK(sole_deaf_root(CommGraph::identity(2)) == std::nullopt);
    CHECK(sole_deaf_root(one_to_two()) == 0);
}

TEST_CASE("deaf family merges variants that already coincide") {
    // Agent 0 of this graph is already deaf, so making it deaf changes
    // nothing and the family has n distinct members only when no agent
    // starts deaf.
    NetworkModel fam = deaf_family(one_to_two());
    CHECK(fam.size() == 2);
    CHECK(fam.contains(one_to_two()));
    CHECK(fam.contains(CommGraph::identity(2)));
}

TEST_CASE("two agent model contents and canonical order") {
    NetworkModel m = two_agent_graphs();
    REQUIRE(m.size() == 3);
    CHECK(m.contains(complete2()));
    CHECK(m.contains(one_to_two()));
    CHECK(m.contains(two_to_one()));
    for (std::size_t i = 0; i + 1 < m.size(); ++i) CHECK(m[i] < m[i + 1]);
}

TEST_CASE("relay graphs have the documented shape") {
    // psi_graph(4, 0): a single-node path at 3, edges 3->1, 3->2, 1->3,
    // 2->3, 0->3; agent 0 deaf.
    CommGraph p = psi_graph(4, 0);
    CHECK(p.in_neighbors(0) == std::vector<int>{0});
    CHECK(p.in_neighbors(1) == std::vector<int>{1, 3});
    CHECK(p.in_neighbors(2) == std::vector<int>{2, 3});
    CHECK(p.in_neighbors(3) == std::vector<int>{0, 1, 2, 3});
    for (int n : {4, 5, 6, 7}) {
        for (int i = 0; i < 3; ++i) {
            CommGraph g = psi_graph(n, i);
            CHECK(sole_deaf_root(g) == i);
            // The path relays: agent l >= 4 hears exactly l-1 and itself.
            for (int l = 4; l < n; ++l) CHECK(g.in_neighbors(l) == std::vector<int>{l - 1, l});
        }
        NetworkModel m = psi_model(n);
        CHECK(m.size() == 3);
        for (int i = 0; i < 3; ++i) CHECK(m.contains(psi_graph(n, i)));
    }
    CHECK_THROWS_AS(psi_graph(3, 0), validation_error);
    CHECK_THROWS_AS(psi_graph(5, 3), validation_error);
}

TEST_CASE("relay model matches the shipped sample file") {
    NetworkModel shipped = parse_model(read_text(data_file("relay_n6_model.json")));
    CHECK(shipped == psi_model(6));
}

TEST_CASE("async round models have the predicted sizes") {
    CHECK(async_model_size(3, 1) == 27);
    CHECK(async_model_size(4, 1) == 256);
    CHECK(async_model_size(4, 2) == 2401);
    NetworkModel m31 = async_model(3, 1);
    CHECK(m31.size() == 27);
    NetworkModel m41 = async_model(4, 1);
    CHECK(m41.size() == 256);
    NetworkModel m42 = async_model(4, 2);
    CHECK(m42.size() == 2401);
    for (const auto& g : m42.graphs())
        for (int i = 0; i < 4; ++i) CHECK(g.in_degree(i) >= 2);
    CHECK(m42.contains(CommGraph::complete(4)));
    // Degenerate cases: f = 0 forces the complete graph.
    NetworkModel m40 = async_model(4, 0);
    CHECK(m40.size() == 1);
    CHECK(m40[0] == CommGraph::complete(4));
}

TEST_CASE("async model enumeration refuses to exceed the cap") {
    CHECK_THROWS_WITH_AS(async_model(4, 2, 1000), doctest::Contains("2401"), resource_error);
    CHECK_THROWS_AS(async_model(6, 3), resource_error);  // 26^6 graphs
}

TEST_CASE("network model normalizes order and duplicates") {
    CommGraph a = complete2(), b = one_to_two(), c = two_to_one();
    NetworkModel clean({b, c, a});
    NetworkModel messy({a, a, c, b, c, a});
    CHECK(clean == messy);
    CHECK(messy.size() == 3);
    CHECK(clean.index_of(a).has_value());
    CHECK(clean.index_of(CommGraph::identity(2)) == std::nullopt);
    CHECK_THROWS_AS(NetworkModel({}), validation_error);
    CHECK_THROWS_AS(NetworkModel({a, CommGraph::complete(3)}), validation_error);
}

TEST_CASE("graph json round-trips and validates") {
    CHECK(parse_graph(read_text(data_file("k3_graph.json"))) == CommGraph::complete(3));
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 1 + static_cast<int>(rng() % 8);
        CommGraph g = random_graph(n, rng);
        CHECK(parse_graph(serialize_graph(g)) == g);
    }
    CHECK_THROWS_AS(parse_graph("{"), validation_error);
    CHECK_THROWS_AS(parse_graph(R"({"n": 2})"), validation_error);
    CHECK_THROWS_WITH_AS(parse_graph(R"({"n": 2, "in": {"1": [1], "2": [1]}})"),
                         doctest::Contains("agent 2"), validation_error);
    CHECK_THROWS_AS(parse_graph(R"({"n": 2, "in": {"1": [1, 3], "2": [2]}})"), validation_error);
    CHECK_THROWS_AS(parse_graph(R"({"n": 2, "in": {"1": [1]}})"), validation_error);
}

TEST_CASE("model json round-trips and matches builders") {
    CHECK(parse_model(read_text(data_file("two_agent_model.json"))) == two_agent_graphs());
    CHECK(parse_model(read_text(data_file("deaf_k3_model.json"))) ==
          deaf_family(CommGraph::complete(3)));
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 1 + static_cast<int>(rng() % 6);
        NetworkModel m = random_model(n, 1 + static_cast<int>(rng() % 6), rng);
        CHECK(parse_model(serialize_model(m)) == m);
    }
    CHECK_THROWS_AS(parse_model(R"({"n": 2, "graphs": []})"), validation_error);
}
