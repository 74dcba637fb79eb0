#include "conlab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conlab/errors.hpp"

namespace conlab {

double linf_distance(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw validation_error("vectors of different dimension");
    double d = 0;
    for (std::size_t c = 0; c < a.size(); ++c) d = std::max(d, std::abs(a[c] - b[c]));
    return d;
}

double diameter(const std::vector<Vec>& points) {
    if (points.empty()) throw validation_error("diameter of an empty set");
    double d = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            d = std::max(d, linf_distance(points[i], points[j]));
    return d;
}

Vec Algorithm::output(const AgentState& state) const {
    const auto d = static_cast<std::size_t>(dimension());
    if (state.size() < d) throw validation_error("agent state shorter than the output dimension");
    return Vec(state.begin(), state.begin() + d);
}

std::vector<Vec> outputs(const Algorithm& alg, const Configuration& config) {
    std::vector<Vec> out;
    out.reserve(config.states.size());
    for (const auto& s : config.states) out.push_back(alg.output(s));
    return out;
}

double output_delta(const Algorithm& alg, const Configuration& config) {
    return diameter(outputs(alg, config));
}

bool indistinguishable(const Configuration& a, const Configuration& b, int agent) {
    return a.states.at(agent) == b.states.at(agent);
}

Configuration make_initial(const Algorithm& alg, const std::vector<Vec>& initial_outputs) {
    const int n = static_cast<int>(initial_outputs.size());
    alg.check_agent_count(n);
    Configuration config;
    config.states.reserve(initial_outputs.size());
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(initial_outputs[i].size()) != alg.dimension())
            throw validation_error("initial output of agent " + std::to_string(i + 1) +
                                   " does not match the algorithm dimension");
        config.states.push_back(alg.initial_state(i, n, initial_outputs[i]));
    }
    return config;
}

Configuration apply_round(const Algorithm& alg, const CommGraph& g, const Configuration& config) {
    const int n = static_cast<int>(config.states.size());
    if (g.agent_count() != n)
        throw validation_error("graph agent count does not match the configuration");
    alg.check_graph(g);
    Configuration next;
    next.states.reserve(config.states.size());
    for (int i = 0; i < n; ++i) {
        std::vector<Received> received;
        for (int s : g.in_neighbors(i)) received.push_back({s, &config.states[s]});
        next.states.push_back(alg.step(i, config.states[i], received));
    }
    return next;
}

const Configuration& Execution::config_at(int t) const {
    if (t == 0) return initial;
    return rounds.at(t - 1).config;
}

std::vector<int> Execution::graph_indices() const {
    std::vector<int> out;
    out.reserve(rounds.size());
    for (const auto& r : rounds) out.push_back(r.graph);
    return out;
}

ConstantSource::ConstantSource(NetworkModel model, int index)
    : model_(std::move(model)), index_(index) {
    if (index < 0 || index >= static_cast<int>(model_.size()))
        throw validation_error("constant pattern index out of range");
}

CyclicSource::CyclicSource(NetworkModel model, std::vector<int> cycle)
    : model_(std::move(model)), cycle_(std::move(cycle)) {
    if (cycle_.empty()) throw validation_error("cyclic pattern needs at least one index");
    for (int i : cycle_)
        if (i < 0 || i >= static_cast<int>(model_.size()))
            throw validation_error("cyclic pattern index out of range");
}

int CyclicSource::next_index(int round, const Execution&) {
    return cycle_[static_cast<std::size_t>(round) % cycle_.size()];
}

RecordedSource::RecordedSource(NetworkModel model, std::vector<int> indices)
    : model_(std::move(model)), indices_(std::move(indices)) {
    for (int i : indices_)
        if (i < 0 || i >= static_cast<int>(model_.size()))
            throw validation_error("recorded pattern index out of range");
}

int RecordedSource::next_index(int round, const Execution&) {
    if (round < 0 || round >= static_cast<int>(indices_.size()))
        throw validation_error("recorded pattern exhausted at round " + std::to_string(round));
    return indices_[round];
}

IidSource::IidSource(NetworkModel model, std::uint64_t seed)
    : model_(std::move(model)), seed_(seed), rng_(seed) {}

int IidSource::next_index(int, const Execution&) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(model_.size()) - 1);
    return pick(rng_);
}

PhaseRelaySource::PhaseRelaySource(int n, std::uint64_t seed)
    : model_(psi_model(n)), phase_length_(n - 2), seed_(seed), rng_(seed) {
    for (int i = 0; i < 3; ++i) member_index_.push_back(static_cast<int>(*model_.index_of(psi_graph(n, i))));
}

void PhaseRelaySource::reset() {
    rng_.seed(seed_);
    current_ = 0;
}

int PhaseRelaySource::next_index(int round, const Execution&) {
    if (round % phase_length_ == 0) {
        std::uniform_int_distribution<int> pick(0, 2);
        current_ = pick(rng_);
    }
    return member_index_[current_];
}

Execution run(const Algorithm& alg, const std::vector<Vec>& initial_outputs, PatternSource& source,
              int rounds) {
    if (rounds < 0) throw validation_error("round count must be nonnegative");
    source.reset();
    const NetworkModel& model = source.model();
    if (static_cast<int>(initial_outputs.size()) != model.agent_count())
        throw validation_error("initial outputs do not match the model's agent count");
    Execution exec{model, alg.name(), model.agent_count(), alg.dimension(),
                   make_initial(alg, initial_outputs), {}};
    Configuration current = exec.initial;
    for (int t = 0; t < rounds; ++t) {
        int idx = source.next_index(t, exec);
        if (idx < 0 || idx >= static_cast<int>(model.size()))
            throw validation_error("pattern source yielded a graph outside its model");
        current = apply_round(alg, model[idx], current);
        exec.rounds.push_back({idx, current});
    }
    return exec;
}

namespace {

// Limit of `config` under a constant graph. Exact when a deaf sole root
// freezes the limit; otherwise iterate until the spread is within tol_abs
// and report that spread as the error bound. Iterated averaging cannot
// contract the spread below a few ulps of the operand scale, so the demanded
// tolerance is clamped at that noise floor; continuations that stall above
// it still exhaust the budget and fail.
std::pair<Vec, double> limit_probe(const Algorithm& alg, const CommGraph& g, Configuration config,
                                   double tol_abs, long long round_budget) {
    if (alg.convex()) {
        if (auto deaf = sole_deaf_root(g)) return {alg.output(config.states[*deaf]), 0.0};
    }
    double scale = 1.0;
    for (const auto& state : config.states)
        for (double v : alg.output(state)) scale = std::max(scale, std::abs(v));
    double target =
        std::max(tol_abs, 64 * std::numeric_limits<double>::epsilon() * scale);
    for (long long t = 0; t <= round_budget; ++t) {
        double spread = output_delta(alg, config);
        if (spread <= target) return {alg.output(config.states[0]), spread};
        if (t == round_budget) break;
        config = apply_round(alg, g, config);
    }
    throw convergence_error("constant-graph continuation still above tolerance after " +
                            std::to_string(round_budget) + " rounds");
}

std::vector<std::vector<int>> enumerate_prefixes(int base, int depth) {
    std::vector<std::vector<int>> out;
    std::vector<int> digits(depth, 0);
    while (true) {
        out.push_back(digits);
        int i = depth - 1;
        while (i >= 0 && ++digits[i] == base) digits[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

}  // namespace

ValencyBracket valency_bracket(const Algorithm& alg, const NetworkModel& model,
                               const Configuration& config, int depth, double tol,
                               const BracketOptions& opts) {
    if (depth < 0) throw validation_error("bracket depth must be nonnegative");
    if (tol <= 0) throw validation_error("tolerance must be positive");
    if (model.agent_count() != static_cast<int>(config.states.size()))
        throw validation_error("configuration does not match the model's agent count");

    ValencyBracket b;
    b.depth = depth;
    b.tol = tol;
    double scale = output_delta(alg, config);
    b.tol_abs = scale > 0 ? tol * scale : tol;
    b.upper = alg.convex() ? scale : std::numeric_limits<double>::infinity();

    const int m = static_cast<int>(model.size());
    long long count = 1;
    for (int i = 0; i < depth && count <= opts.prefix_cap; ++i) count *= m;
    b.exhaustive = count <= opts.prefix_cap;

    std::vector<std::vector<int>> prefixes;
    if (b.exhaustive) {
        prefixes = enumerate_prefixes(m, depth);
    } else {
        if (!opts.has_seed)
            throw validation_error("prefix space exceeds the cap of " +
                                   std::to_string(opts.prefix_cap) +
                                   "; sampled probing needs a seed");
        std::mt19937_64 rng(opts.seed);
        std::uniform_int_distribution<int> pick(0, m - 1);
        prefixes.resize(opts.prefix_cap);
        for (auto& p : prefixes) {
            p.resize(depth);
            for (int& digit : p) digit = pick(rng);
        }
    }

    for (const auto& prefix : prefixes) {
        Configuration reached = config;
        for (int idx : prefix) reached = apply_round(alg, model[idx], reached);
        for (int closing = 0; closing < m; ++closing) {
            auto [value, err] =
                limit_probe(alg, model[closing], reached, b.tol_abs, opts.round_budget);
            b.samples.push_back({std::move(value), err, prefix, closing});
        }
    }

    // Largest certified pairwise gap: per coordinate, the best inflated
    // minimum against the best deflated maximum.
    double lower = 0;
    for (int c = 0; c < alg.dimension(); ++c) {
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& s : b.samples) {
            hi = std::max(hi, s.value[c] - s.err);
            lo = std::min(lo, s.value[c] + s.err);
        }
        lower = std::max(lower, hi - lo);
    }
    b.lower = std::max(lower, 0.0);
    return b;
}

AdversaryRun greedy_adversary(const Algorithm& alg, const NetworkModel& model,
                              const std::vector<Vec>& initial_outputs, int rounds, int depth,
                              double tol, const BracketOptions& opts) {
    if (rounds < 0) throw validation_error("round count must be nonnegative");
    if (static_cast<int>(initial_outputs.size()) != model.agent_count())
        throw validation_error("initial outputs do not match the model's agent count");
    Execution exec{model, alg.name(), model.agent_count(), alg.dimension(),
                   make_initial(alg, initial_outputs), {}};
    std::vector<ValencyBracket> brackets;
    brackets.push_back(valency_bracket(alg, model, exec.initial, depth, tol, opts));

    Configuration current = exec.initial;
    const int m = static_cast<int>(model.size());
    for (int t = 0; t < rounds; ++t) {
        int best = -1;
        Configuration best_config;
        ValencyBracket best_bracket;
        for (int gi = 0; gi < m; ++gi) {
            Configuration cand = apply_round(alg, model[gi], current);
            ValencyBracket br = valency_bracket(alg, model, cand, depth, tol, opts);
            if (best < 0 || br.lower > best_bracket.lower) {
                best = gi;
                best_config = std::move(cand);
                best_bracket = std::move(br);
            }
        }
        exec.rounds.push_back({best, best_config});
        brackets.push_back(std::move(best_bracket));
        current = std::move(best_config);
    }
    return {std::move(exec), std::move(brackets)};
}

namespace {

// Probes at a phase boundary: the limit each pure relay continuation pins.
ValencyBracket boundary_bracket(const Algorithm& alg, const NetworkModel& model,
                                const std::vector<int>& member_index, const Configuration& config,
                                double tol, long long round_budget) {
    ValencyBracket b;
    b.tol = tol;
    double scale = output_delta(alg, config);
    b.tol_abs = scale > 0 ? tol * scale : tol;
    b.upper = alg.convex() ? scale : std::numeric_limits<double>::infinity();
    for (int u = 0; u < 3; ++u) {
        auto [value, err] =
            limit_probe(alg, model[member_index[u]], config, b.tol_abs, round_budget);
        b.samples.push_back({std::move(value), err, {}, member_index[u]});
    }
    double lower = 0;
    for (int c = 0; c < alg.dimension(); ++c) {
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& s : b.samples) {
            hi = std::max(hi, s.value[c] - s.err);
            lo = std::min(lo, s.value[c] + s.err);
        }
        lower = std::max(lower, hi - lo);
    }
    b.lower = std::max(lower, 0.0);
    return b;
}

}  // namespace

PsiAdversaryRun psi_adversary(const Algorithm& alg, int n, const std::vector<Vec>& initial_outputs,
                              int phases, double tol, long long round_budget) {
    if (phases < 0) throw validation_error("phase count must be nonnegative");
    if (static_cast<int>(initial_outputs.size()) != n)
        throw validation_error("initial outputs do not match the agent count");
    NetworkModel model = psi_model(n);
    std::vector<int> member_index;
    for (int i = 0; i < 3; ++i) member_index.push_back(static_cast<int>(*model.index_of(psi_graph(n, i))));

    const int phase_length = n - 2;
    Execution exec{model, alg.name(), n, alg.dimension(), make_initial(alg, initial_outputs), {}};
    std::vector<int> phase_choices;
    std::vector<ValencyBracket> phase_brackets;
    phase_brackets.push_back(
        boundary_bracket(alg, model, member_index, exec.initial, tol, round_budget));

    Configuration current = exec.initial;
    for (int k = 0; k < phases; ++k) {
        int best = -1;
        Configuration best_config;
        ValencyBracket best_bracket;
        for (int u = 0; u < 3; ++u) {
            Configuration cand = current;
            for (int r = 0; r < phase_length; ++r)
                cand = apply_round(alg, model[member_index[u]], cand);
            ValencyBracket br =
                boundary_bracket(alg, model, member_index, cand, tol, round_budget);
            if (best < 0 || br.lower > best_bracket.lower) {
                best = u;
                best_config = std::move(cand);
                best_bracket = std::move(br);
            }
        }
        // Re-walk the chosen phase to record the per-round configurations.
        for (int r = 0; r < phase_length; ++r) {
            current = apply_round(alg, model[member_index[best]], current);
            exec.rounds.push_back({member_index[best], current});
        }
        phase_choices.push_back(best);
        phase_brackets.push_back(std::move(best_bracket));
    }
    return {std::move(exec), phase_length, std::move(phase_choices), std::move(phase_brackets)};
}

ContractionEstimate contraction_estimate(const std::vector<double>& series) {
    ContractionEstimate est;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t t = 0; t + 1 < series.size(); ++t)
        est.ratios.push_back(series[t] > 0 ? series[t + 1] / series[t] : nan);
    for (std::size_t t = 1; t < series.size(); ++t)
        est.roots.push_back(series[0] > 0 ? std::pow(series[t] / series[0], 1.0 / static_cast<double>(t))
                                          : nan);
    est.max_ratio = nan;
    for (double r : est.ratios)
        if (!std::isnan(r) && (std::isnan(est.max_ratio) || r > est.max_ratio)) est.max_ratio = r;
    est.final_root = est.roots.empty() ? nan : est.roots.back();
    return est;
}

}  // namespace conlab
