#pragma once

#include <memory>

#include "conlab/engine.hpp"

namespace conlab {

// Two agents; on hearing the other agent, move to own/3 + 2*other/3.
// Repeating any rooted two-agent graph contracts the gap by exactly 1/3.
class ThirdsAlgorithm final : public Algorithm {
public:
    std::string name() const override { return "thirds"; }
    bool convex() const override { return true; }
    void check_agent_count(int n) const override;
    AgentState initial_state(int agent, int n, const Vec& y0) const override;
    AgentState step(int agent, const AgentState& own,
                    const std::vector<Received>& received) const override;
};

// Move to the midpoint of the least and greatest value heard, per
// coordinate. Halves the spread under every non-split graph.
class MidpointAlgorithm final : public Algorithm {
public:
    explicit MidpointAlgorithm(int dimension = 1);
    std::string name() const override { return "midpoint"; }
    int dimension() const override { return dimension_; }
    bool convex() const override { return true; }
    AgentState initial_state(int agent, int n, const Vec& y0) const override;
    AgentState step(int agent, const AgentState& own,
                    const std::vector<Received>& received) const override;

private:
    int dimension_;
};

// Relay running minima and maxima for phases of n-1 rounds, then move to
// their midpoint. Under rooted graphs each full phase halves the spread.
// State layout: output, running min, running max (dimension entries each),
// then the position inside the phase.
class AmortizedMidpointAlgorithm final : public Algorithm {
public:
    explicit AmortizedMidpointAlgorithm(int n, int dimension = 1);
    std::string name() const override { return "amortized-midpoint"; }
    int dimension() const override { return dimension_; }
    bool convex() const override { return true; }
    void check_agent_count(int n) const override;
    AgentState initial_state(int agent, int n, const Vec& y0) const override;
    AgentState step(int agent, const AgentState& own,
                    const std::vector<Received>& received) const override;

    int phase_length() const { return n_ - 1; }
    double phase_position(const AgentState& state) const;

private:
    int n_;
    int dimension_;
};

// Splits the own value evenly over the out-neighbors of one declared
// strongly connected graph; the new value is the sum of received shares.
// Conserves the total but may leave the hull of heard values, so it is
// deliberately not a convex-combination algorithm.
class MassSplitAlgorithm final : public Algorithm {
public:
    explicit MassSplitAlgorithm(CommGraph declared);
    std::string name() const override { return "mass-split"; }
    bool convex() const override { return false; }
    void check_agent_count(int n) const override;
    void check_graph(const CommGraph& g) const override;
    AgentState initial_state(int agent, int n, const Vec& y0) const override;
    AgentState step(int agent, const AgentState& own,
                    const std::vector<Received>& received) const override;

    const CommGraph& declared() const { return declared_; }

private:
    CommGraph declared_;
    std::vector<int> out_degree_;
};

enum class ApproxRegime { two_agent, nonsplit_midpoint, rooted_amortized };

ApproxRegime parse_regime(const std::string& name);
std::string regime_name(ApproxRegime regime);

// Rounds after which deciding on the current output is within eps of
// every other decision, given initial spread at most delta:
// ceil(log3(delta/eps)) for two agents, ceil(log2(delta/eps)) under
// non-split graphs, (n-1)*ceil(log2(delta/eps)) under rooted graphs.
int decision_rounds(ApproxRegime regime, double delta, double eps, int n);

// Runs the wrapped algorithm and irrevocably decides on its output after
// decision_rounds rounds. Enforces the regime's graph contract each round.
class DecisionAlgorithm final : public Algorithm {
public:
    DecisionAlgorithm(std::shared_ptr<const Algorithm> inner, double delta, double eps,
                      ApproxRegime regime, int n);
    std::string name() const override;
    int dimension() const override { return inner_->dimension(); }
    bool convex() const override { return inner_->convex(); }
    void check_agent_count(int n) const override;
    void check_graph(const CommGraph& g) const override;
    AgentState initial_state(int agent, int n, const Vec& y0) const override;
    AgentState step(int agent, const AgentState& own,
                    const std::vector<Received>& received) const override;
    Vec output(const AgentState& state) const override;

    int decision_round() const { return rounds_; }
    bool has_decided(const AgentState& state) const;
    Vec decision_of(const AgentState& state) const;

private:
    std::size_t suffix_size() const;
    std::shared_ptr<const Algorithm> inner_;
    ApproxRegime regime_;
    int n_;
    int rounds_;
};

// CLI-facing factory; mass-split needs a singleton model for its declared
// graph, the others ignore `model`.
std::shared_ptr<Algorithm> make_algorithm(const std::string& name, int n,
                                          const NetworkModel* model = nullptr);

// Value set of one agent in the asynchronous min-relay protocol.
struct MinRelayState {
    std::vector<double> values;  // sorted, unique

    double y() const;
    // Returns true when the set grew, which is the relay trigger.
    bool merge(const std::vector<double>& incoming);
};

}  // namespace conlab
