#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace conlab {

// Bitmask over agents; bit i stands for agent i. Agents are 0-based in code
// and 1-based in serialized files.
using AgentSet = std::uint64_t;

int popcount(AgentSet s);
std::vector<int> set_to_list(AgentSet s);
AgentSet list_to_set(const std::vector<int>& agents, int n);

// A directed communication graph on n agents. Edge (i,j) means j hears from
// i in this round; every agent hears itself, so In(j) always contains j.
// Stored as one in-neighborhood mask per agent. Comparison is lexicographic
// on (n, masks), which fixes the canonical order used by NetworkModel.
class CommGraph {
public:
    static constexpr int max_agents = 63;

    CommGraph(int n, std::vector<AgentSet> in_masks);
    static CommGraph from_in_lists(int n, const std::vector<std::vector<int>>& in_lists);
    static CommGraph complete(int n);
    // Self-loops only: each agent hears nobody else.
    static CommGraph identity(int n);

    int agent_count() const { return n_; }
    AgentSet in_mask(int agent) const;
    std::vector<int> in_neighbors(int agent) const;
    int in_degree(int agent) const;
    bool has_edge(int from, int to) const;
    // Derived view; edges are stored by receiver.
    AgentSet out_mask(int agent) const;
    std::vector<int> out_neighbors(int agent) const;
    int out_degree(int agent) const;

    bool operator==(const CommGraph&) const = default;
    auto operator<=>(const CommGraph&) const = default;

private:
    int n_;
    std::vector<AgentSet> in_;
};

// Graph product: (i,j) is an edge of product(g,h) iff some k has (i,k) in g
// and (k,j) in h. Models "g's round happened before h's round".
CommGraph product(const CommGraph& g, const CommGraph& h);

// Agents from which every agent is reachable.
AgentSet roots_mask(const CommGraph& g);
std::vector<int> roots(const CommGraph& g);
bool is_rooted(const CommGraph& g);

// Every two agents share an in-neighbor.
bool is_nonsplit(const CommGraph& g);

// Agent i hears nobody but itself.
bool is_deaf(const CommGraph& g, int agent);
// The unique root of a rooted graph with a deaf agent, if there is one.
std::optional<int> sole_deaf_root(const CommGraph& g);

// A nonempty set of communication graphs over a common agent count, deduped
// and kept in canonical sorted order so enumeration is deterministic.
class NetworkModel {
public:
    explicit NetworkModel(std::vector<CommGraph> graphs);

    int agent_count() const { return n_; }
    std::size_t size() const { return graphs_.size(); }
    const CommGraph& operator[](std::size_t i) const { return graphs_[i]; }
    const std::vector<CommGraph>& graphs() const { return graphs_; }
    std::optional<std::size_t> index_of(const CommGraph& g) const;
    bool contains(const CommGraph& g) const;

    bool operator==(const NetworkModel&) const = default;

private:
    int n_;
    std::vector<CommGraph> graphs_;
};

// For each agent i of g, the variant where i is made deaf and everyone else
// keeps their in-neighborhood. Duplicates merge when agents are already deaf.
NetworkModel deaf_family(const CommGraph& g);

// The three two-agent graphs: complete, and the two one-directional ones.
NetworkModel two_agent_graphs();

// The relay graph used by the phase adversary, n >= 4, i in {0,1,2}:
// a path 3 -> 4 -> ... -> n-1, edges n-1 -> l and l -> 3 for the two
// l in {0,1,2} other than i, plus i -> 3. Agent i hears only itself.
CommGraph psi_graph(int n, int i);
NetworkModel psi_model(int n);

// All graphs on n agents whose in-degrees are all >= n-f. Refuses to
// enumerate more than `cap` graphs.
NetworkModel async_model(int n, int f, std::uint64_t cap = 1'000'000);
std::uint64_t async_model_size(int n, int f);

// JSON round-trip. A graph document looks like
//   {"n": 3, "in": {"1": [1,2], "2": [2], "3": [1,3]}}
// with 1-based agents and explicit self-loops; a model document is
//   {"n": 3, "graphs": [{"in": {...}}, ...]}.
// Parsing validates agent ranges and self-loops and names the offender.
CommGraph parse_graph(const std::string& text);
NetworkModel parse_model(const std::string& text);
std::string serialize_graph(const CommGraph& g);
std::string serialize_model(const NetworkModel& m);

}  // namespace conlab
