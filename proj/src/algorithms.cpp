#include "conlab/algorithms.hpp"

#include <algorithm>
#include <cmath>

#include "conlab/errors.hpp"

namespace conlab {

void ThirdsAlgorithm::check_agent_count(int n) const {
    if (n != 2) throw validation_error("the thirds rule is defined for exactly two agents");
}

AgentState ThirdsAlgorithm::initial_state(int, int n, const Vec& y0) const {
    check_agent_count(n);
    return {y0[0]};
}

AgentState ThirdsAlgorithm::step(int agent, const AgentState& own,
                                 const std::vector<Received>& received) const {
    for (const auto& r : received) {
        if (r.sender == agent) continue;
        double other = (*r.state)[0];
        // Keep exact fixed points exact instead of rounding through thirds.
        if (other == own[0]) return own;
        return {own[0] / 3.0 + 2.0 * other / 3.0};
    }
    return own;
}

MidpointAlgorithm::MidpointAlgorithm(int dimension) : dimension_(dimension) {
    if (dimension < 1) throw validation_error("dimension must be positive");
}

AgentState MidpointAlgorithm::initial_state(int, int, const Vec& y0) const { return y0; }

AgentState MidpointAlgorithm::step(int, const AgentState&,
                                   const std::vector<Received>& received) const {
    AgentState next(dimension_);
    for (int c = 0; c < dimension_; ++c) {
        double lo = (*received.front().state)[c];
        double hi = lo;
        for (const auto& r : received) {
            lo = std::min(lo, (*r.state)[c]);
            hi = std::max(hi, (*r.state)[c]);
        }
        next[c] = (lo + hi) / 2.0;
    }
    return next;
}

AmortizedMidpointAlgorithm::AmortizedMidpointAlgorithm(int n, int dimension)
    : n_(n), dimension_(dimension) {
    if (n < 2) throw validation_error("amortized midpoint needs at least two agents");
    if (dimension < 1) throw validation_error("dimension must be positive");
}

void AmortizedMidpointAlgorithm::check_agent_count(int n) const {
    if (n != n_)
        throw validation_error("amortized midpoint was built for " + std::to_string(n_) +
                               " agents, got " + std::to_string(n));
}

AgentState AmortizedMidpointAlgorithm::initial_state(int, int n, const Vec& y0) const {
    check_agent_count(n);
    AgentState state;
    state.reserve(3 * dimension_ + 1);
    for (int rep = 0; rep < 3; ++rep) state.insert(state.end(), y0.begin(), y0.end());
    state.push_back(0);  // phase position
    return state;
}

double AmortizedMidpointAlgorithm::phase_position(const AgentState& state) const {
    return state.at(3 * dimension_);
}

AgentState AmortizedMidpointAlgorithm::step(int, const AgentState& own,
                                            const std::vector<Received>& received) const {
    const int d = dimension_;
    AgentState next(own);
    for (int c = 0; c < d; ++c) {
        double lo = own[d + c];
        double hi = own[2 * d + c];
        for (const auto& r : received) {
            lo = std::min(lo, (*r.state)[d + c]);
            hi = std::max(hi, (*r.state)[2 * d + c]);
        }
        next[d + c] = lo;
        next[2 * d + c] = hi;
    }
    double pos = own[3 * d] + 1;
    if (pos == phase_length()) {
        for (int c = 0; c < d; ++c) {
            double mid = (next[d + c] + next[2 * d + c]) / 2.0;
            next[c] = next[d + c] = next[2 * d + c] = mid;
        }
        pos = 0;
    }
    next[3 * d] = pos;
    return next;
}

MassSplitAlgorithm::MassSplitAlgorithm(CommGraph declared) : declared_(std::move(declared)) {
    const int n = declared_.agent_count();
    if (static_cast<int>(set_to_list(roots_mask(declared_)).size()) != n)
        throw validation_error("mass split needs a strongly connected declared graph");
    for (int j = 0; j < n; ++j) out_degree_.push_back(declared_.out_degree(j));
}

void MassSplitAlgorithm::check_agent_count(int n) const {
    if (n != declared_.agent_count())
        throw validation_error("mass split was declared on " +
                               std::to_string(declared_.agent_count()) + " agents");
}

void MassSplitAlgorithm::check_graph(const CommGraph& g) const {
    if (!(g == declared_))
        throw validation_error("mass split runs only under its declared graph");
}

AgentState MassSplitAlgorithm::initial_state(int, int n, const Vec& y0) const {
    check_agent_count(n);
    return {y0[0]};
}

AgentState MassSplitAlgorithm::step(int, const AgentState&,
                                    const std::vector<Received>& received) const {
    double sum = 0;
    for (const auto& r : received) sum += (*r.state)[0] / out_degree_[r.sender];
    return {sum};
}

ApproxRegime parse_regime(const std::string& name) {
    if (name == "two_agent") return ApproxRegime::two_agent;
    if (name == "nonsplit_midpoint") return ApproxRegime::nonsplit_midpoint;
    if (name == "rooted_amortized") return ApproxRegime::rooted_amortized;
    throw validation_error("unknown regime \"" + name + "\"");
}

std::string regime_name(ApproxRegime regime) {
    switch (regime) {
        case ApproxRegime::two_agent: return "two_agent";
        case ApproxRegime::nonsplit_midpoint: return "nonsplit_midpoint";
        case ApproxRegime::rooted_amortized: return "rooted_amortized";
    }
    throw std::logic_error("unreachable");
}

namespace {

// Smallest T >= 0 with base^T >= x.
int ceil_log(double base, double x) {
    int t = 0;
    double power = 1;
    while (power < x) {
        power *= base;
        ++t;
    }
    return t;
}

}  // namespace

int decision_rounds(ApproxRegime regime, double delta, double eps, int n) {
    if (!(delta > 0) || !(eps > 0))
        throw validation_error("spread and accuracy must be positive");
    if (eps >= delta) return 0;
    switch (regime) {
        case ApproxRegime::two_agent: return ceil_log(3, delta / eps);
        case ApproxRegime::nonsplit_midpoint: return ceil_log(2, delta / eps);
        case ApproxRegime::rooted_amortized: return (n - 1) * ceil_log(2, delta / eps);
    }
    throw std::logic_error("unreachable");
}

DecisionAlgorithm::DecisionAlgorithm(std::shared_ptr<const Algorithm> inner, double delta,
                                     double eps, ApproxRegime regime, int n)
    : inner_(std::move(inner)),
      regime_(regime),
      n_(n),
      rounds_(decision_rounds(regime, delta, eps, n)) {}

std::string DecisionAlgorithm::name() const { return "decide:" + inner_->name(); }

void DecisionAlgorithm::check_agent_count(int n) const {
    inner_->check_agent_count(n);
    if (n != n_)
        throw validation_error("decision wrapper was built for " + std::to_string(n_) + " agents");
}

void DecisionAlgorithm::check_graph(const CommGraph& g) const {
    inner_->check_graph(g);
    switch (regime_) {
        case ApproxRegime::two_agent:
            if (g.agent_count() != 2 || !is_rooted(g))
                throw validation_error("two_agent regime needs rooted two-agent graphs");
            return;
        case ApproxRegime::nonsplit_midpoint:
            if (!is_nonsplit(g))
                throw validation_error("nonsplit_midpoint regime got a split graph");
            return;
        case ApproxRegime::rooted_amortized:
            if (!is_rooted(g))
                throw validation_error("rooted_amortized regime got an unrooted graph");
            return;
    }
}

// Suffix appended to the inner state: rounds done, decided flag, decision.
std::size_t DecisionAlgorithm::suffix_size() const {
    return 2 + static_cast<std::size_t>(inner_->dimension());
}

AgentState DecisionAlgorithm::initial_state(int agent, int n, const Vec& y0) const {
    AgentState state = inner_->initial_state(agent, n, y0);
    state.push_back(0);                  // rounds done
    state.push_back(rounds_ == 0 ? 1 : 0);  // decided
    Vec decision = rounds_ == 0 ? y0 : Vec(inner_->dimension(), 0.0);
    state.insert(state.end(), decision.begin(), decision.end());
    return state;
}

AgentState DecisionAlgorithm::step(int agent, const AgentState& own,
                                   const std::vector<Received>& received) const {
    const std::size_t inner_size = own.size() - suffix_size();
    AgentState inner_own(own.begin(), own.begin() + inner_size);
    std::vector<AgentState> scratch;
    scratch.reserve(received.size());
    for (const auto& r : received)
        scratch.emplace_back(r.state->begin(), r.state->begin() + inner_size);
    std::vector<Received> inner_received;
    inner_received.reserve(received.size());
    for (std::size_t k = 0; k < received.size(); ++k)
        inner_received.push_back({received[k].sender, &scratch[k]});

    AgentState next = inner_->step(agent, inner_own, inner_received);
    double done = own[inner_size] + 1;
    bool decided = own[inner_size + 1] != 0;
    Vec decision(own.begin() + inner_size + 2, own.end());
    if (!decided && done >= rounds_) {
        decided = true;
        decision = inner_->output(next);
    }
    next.push_back(done);
    next.push_back(decided ? 1 : 0);
    next.insert(next.end(), decision.begin(), decision.end());
    return next;
}

Vec DecisionAlgorithm::output(const AgentState& state) const {
    if (has_decided(state)) return decision_of(state);
    AgentState inner_part(state.begin(), state.begin() + (state.size() - suffix_size()));
    return inner_->output(inner_part);
}

bool DecisionAlgorithm::has_decided(const AgentState& state) const {
    return state.at(state.size() - suffix_size() + 1) != 0;
}

Vec DecisionAlgorithm::decision_of(const AgentState& state) const {
    if (!has_decided(state)) throw validation_error("agent has not decided yet");
    return Vec(state.end() - inner_->dimension(), state.end());
}

std::shared_ptr<Algorithm> make_algorithm(const std::string& name, int n,
                                          const NetworkModel* model) {
    if (name == "thirds") return std::make_shared<ThirdsAlgorithm>();
    if (name == "midpoint") return std::make_shared<MidpointAlgorithm>();
    if (name == "amortized-midpoint") return std::make_shared<AmortizedMidpointAlgorithm>(n);
    if (name == "mass-split") {
        if (model == nullptr || model->size() != 1)
            throw validation_error("mass-split needs a model with exactly one graph");
        return std::make_shared<MassSplitAlgorithm>((*model)[0]);
    }
    throw validation_error("unknown algorithm \"" + name + "\"");
}

double MinRelayState::y() const {
    if (values.empty()) throw validation_error("empty value set has no minimum");
    return values.front();
}

bool MinRelayState::merge(const std::vector<double>& incoming) {
    bool grew = false;
    for (double v : incoming) {
        auto it = std::lower_bound(values.begin(), values.end(), v);
        if (it == values.end() || *it != v) {
            values.insert(it, v);
            grew = true;
        }
    }
    return grew;
}

}  // namespace conlab
