#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "conlab/graphs.hpp"

namespace conlab {

using Vec = std::vector<double>;

// Distances between output vectors use the max norm, so one-dimensional
// outputs reduce to plain absolute differences.
double linf_distance(const Vec& a, const Vec& b);
double diameter(const std::vector<Vec>& points);

// Full local state of one agent; layout is owned by the algorithm.
using AgentState = std::vector<double>;

struct Received {
    int sender;
    const AgentState* state;
};

// A round-based algorithm: every agent applies `step` to the states it
// hears in a round. The engine always includes the agent's own state in
// `received`, sorted by sender.
class Algorithm {
public:
    virtual ~Algorithm() = default;
    virtual std::string name() const = 0;
    virtual int dimension() const { return 1; }
    // True when each output lands in the coordinatewise interval hull of the
    // heard outputs. Enables exact limit probes and hull bookkeeping.
    virtual bool convex() const = 0;
    virtual void check_agent_count(int) const {}
    // Pattern contract; throws validation_error on graphs the algorithm
    // does not support.
    virtual void check_graph(const CommGraph&) const {}
    virtual AgentState initial_state(int agent, int n, const Vec& y0) const = 0;
    virtual AgentState step(int agent, const AgentState& own,
                            const std::vector<Received>& received) const = 0;
    // Default: the first dimension() entries of the state.
    virtual Vec output(const AgentState& state) const;
};

struct Configuration {
    std::vector<AgentState> states;
    bool operator==(const Configuration&) const = default;
};

std::vector<Vec> outputs(const Algorithm& alg, const Configuration& config);
double output_delta(const Algorithm& alg, const Configuration& config);

// Agents with identical state cannot tell two configurations apart.
bool indistinguishable(const Configuration& a, const Configuration& b, int agent);

Configuration make_initial(const Algorithm& alg, const std::vector<Vec>& initial_outputs);
Configuration apply_round(const Algorithm& alg, const CommGraph& g, const Configuration& config);

struct RoundEntry {
    int graph;  // index into the execution's model
    Configuration config;
};

struct Execution {
    NetworkModel model;
    std::string algorithm;
    int n = 0;
    int dimension = 1;
    Configuration initial;
    std::vector<RoundEntry> rounds;

    int length() const { return static_cast<int>(rounds.size()); }
    const Configuration& config_at(int t) const;
    std::vector<int> graph_indices() const;
};

// Chooses the communication graph of each round. Implementations may assume
// rounds are requested in order 0, 1, 2, ... after a reset.
class PatternSource {
public:
    virtual ~PatternSource() = default;
    virtual const NetworkModel& model() const = 0;
    virtual void reset() {}
    virtual int next_index(int round, const Execution& history) = 0;
};

class ConstantSource final : public PatternSource {
public:
    ConstantSource(NetworkModel model, int index);
    const NetworkModel& model() const override { return model_; }
    int next_index(int, const Execution&) override { return index_; }

private:
    NetworkModel model_;
    int index_;
};

class CyclicSource final : public PatternSource {
public:
    CyclicSource(NetworkModel model, std::vector<int> cycle);
    const NetworkModel& model() const override { return model_; }
    int next_index(int round, const Execution&) override;

private:
    NetworkModel model_;
    std::vector<int> cycle_;
};

// Replays a fixed list of graph indices; running past the end is an error.
class RecordedSource final : public PatternSource {
public:
    RecordedSource(NetworkModel model, std::vector<int> indices);
    const NetworkModel& model() const override { return model_; }
    int next_index(int round, const Execution&) override;

private:
    NetworkModel model_;
    std::vector<int> indices_;
};

class IidSource final : public PatternSource {
public:
    IidSource(NetworkModel model, std::uint64_t seed);
    const NetworkModel& model() const override { return model_; }
    void reset() override { rng_.seed(seed_); }
    int next_index(int, const Execution&) override;

private:
    NetworkModel model_;
    std::uint64_t seed_;
    std::mt19937_64 rng_;
};

// Relay-graph phases: every n-2 rounds, pick one of the three relay graphs
// at random and repeat it for the whole phase.
class PhaseRelaySource final : public PatternSource {
public:
    PhaseRelaySource(int n, std::uint64_t seed);
    const NetworkModel& model() const override { return model_; }
    void reset() override;
    int next_index(int round, const Execution&) override;

private:
    NetworkModel model_;
    int phase_length_;
    std::vector<int> member_index_;  // model index of relay graph i
    std::uint64_t seed_;
    std::mt19937_64 rng_;
    int current_ = 0;
};

Execution run(const Algorithm& alg, const std::vector<Vec>& initial_outputs, PatternSource& source,
              int rounds);

// One continuation probe: apply `prefix`, then repeat `closing` forever.
// `value` approximates the limit outputs reach; `err` bounds how far the
// true limit can be from `value` in each coordinate. Probes closing on a
// graph whose only root is deaf are exact for convex algorithms (the deaf
// root drags everyone to its own frozen output), so err is 0 there.
struct LimitSample {
    Vec value;
    double err;
    std::vector<int> prefix;
    int closing;
};

struct BracketOptions {
    int prefix_cap = 4096;
    long long round_budget = 1'000'000;
    bool has_seed = false;
    std::uint64_t seed = 0;
};

// Encloses the diameter of the set of reachable limits from a configuration.
// `tol` is relative to the configuration's current output spread; `tol_abs`
// is the absolute tolerance actually applied. `lower` comes from sampled
// continuation limits minus their error bounds; `upper` is the current
// spread for convex algorithms and infinite otherwise.
struct ValencyBracket {
    double lower = 0;
    double upper = std::numeric_limits<double>::infinity();
    double tol = 0;
    double tol_abs = 0;
    int depth = 0;
    bool exhaustive = true;
    std::vector<LimitSample> samples;
};

ValencyBracket valency_bracket(const Algorithm& alg, const NetworkModel& model,
                               const Configuration& config, int depth, double tol,
                               const BracketOptions& opts = {});

// Per round, extends the execution by the graph whose successor
// configuration brackets the largest remaining spread; ties pick the
// lowest-index graph. brackets[t] encloses the spread reachable from
// configuration t, for t = 0..rounds.
struct AdversaryRun {
    Execution exec;
    std::vector<ValencyBracket> brackets;
};

AdversaryRun greedy_adversary(const Algorithm& alg, const NetworkModel& model,
                              const std::vector<Vec>& initial_outputs, int rounds, int depth,
                              double tol, const BracketOptions& opts = {});

// Phase adversary over the relay model: each phase repeats one relay graph
// for n-2 rounds, chosen to maximize the spread of the three phase-limit
// probes afterwards. phase_brackets[k] holds the probes at the k-th phase
// boundary, so phase_brackets[k].lower certifies the spread still reachable
// after k phases.
struct PsiAdversaryRun {
    Execution exec;
    int phase_length = 0;
    std::vector<int> phase_choices;
    std::vector<ValencyBracket> phase_brackets;
};

PsiAdversaryRun psi_adversary(const Algorithm& alg, int n, const std::vector<Vec>& initial_outputs,
                              int phases, double tol,
                              long long round_budget = 1'000'000);

// Per-step ratios v[t+1]/v[t] and running t-th roots (v[t]/v[0])^(1/t) of a
// positive decreasing series; entries touching a zero are NaN.
struct ContractionEstimate {
    std::vector<double> ratios;
    std::vector<double> roots;
    double max_ratio;
    double final_root;
};

ContractionEstimate contraction_estimate(const std::vector<double>& series);

}  // namespace conlab
