#include "conlab/async_sim.hpp"

#include <algorithm>
#include <queue>

#include "conlab/errors.hpp"
#include "json.hpp"

namespace conlab {

void CrashSchedule::validate(int n, int f) const {
    if (static_cast<int>(crashes.size()) > f)
        throw validation_error("schedule crashes " + std::to_string(crashes.size()) +
                               " agents, but the fault bound is " + std::to_string(f));
    std::vector<bool> seen(n, false);
    for (const auto& c : crashes) {
        if (c.agent < 0 || c.agent >= n) throw validation_error("crash agent out of range");
        if (seen[c.agent])
            throw validation_error("agent " + std::to_string(c.agent + 1) + " crashes twice");
        seen[c.agent] = true;
        if (c.time < 0) throw validation_error("crash times must be nonnegative");
        std::vector<bool> rec(n, false);
        for (int r : c.final_recipients) {
            if (r < 0 || r >= n) throw validation_error("final recipient out of range");
            if (r == c.agent)
                throw validation_error("an agent cannot be its own final recipient");
            if (rec[r]) throw validation_error("final recipient listed twice");
            rec[r] = true;
        }
    }
}

std::optional<double> CrashSchedule::crash_time(int agent) const {
    for (const auto& c : crashes)
        if (c.agent == agent) return c.time;
    return std::nullopt;
}

const std::vector<int>* CrashSchedule::final_recipients_of(int agent) const {
    for (const auto& c : crashes)
        if (c.agent == agent) return &c.final_recipients;
    return nullptr;
}

CrashSchedule parse_schedule(const std::string& text, int n, int f) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("crashes") || !doc["crashes"].is_array())
        throw validation_error("schedule document needs a \"crashes\" array");
    CrashSchedule schedule;
    for (const auto& c : doc["crashes"]) {
        if (!c.contains("agent") || !c["agent"].is_number_integer() || !c.contains("time") ||
            !c["time"].is_number())
            throw validation_error("each crash needs an integer \"agent\" and a numeric \"time\"");
        CrashEvent event{c["agent"].get<int>() - 1, c["time"].get<double>(), {}};
        if (c.contains("recipients")) {
            if (!c["recipients"].is_array())
                throw validation_error("crash \"recipients\" must be an array");
            for (const auto& r : c["recipients"]) {
                if (!r.is_number_integer())
                    throw validation_error("crash recipients must be integers");
                event.final_recipients.push_back(r.get<int>() - 1);
            }
        }
        schedule.crashes.push_back(std::move(event));
    }
    schedule.validate(n, f);
    return schedule;
}

std::string serialize_schedule(const CrashSchedule& schedule) {
    nlohmann::json crashes = nlohmann::json::array();
    for (const auto& c : schedule.crashes) {
        nlohmann::json recipients = nlohmann::json::array();
        for (int r : c.final_recipients) recipients.push_back(r + 1);
        crashes.push_back({{"agent", c.agent + 1}, {"time", c.time}, {"recipients", recipients}});
    }
    return nlohmann::json{{"crashes", crashes}}.dump(2);
}

ConstantDelay::ConstantDelay(double delay) : delay_(delay) {
    if (!(delay > 0) || delay > 1) throw validation_error("delays must lie in (0, 1]");
}

UniformDelay::UniformDelay(std::uint64_t seed, double lo, double hi)
    : seed_(seed), lo_(lo), hi_(hi) {
    if (!(lo >= 0) || !(hi > lo) || hi > 1)
        throw validation_error("delay range must satisfy 0 <= lo < hi <= 1");
}

double UniformDelay::operator()(int sender, int receiver, long long broadcast_id) const {
    std::uint64_t x = seed_;
    x ^= 0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(sender) + 1);
    x ^= 0xc2b2ae3d27d4eb4full * (static_cast<std::uint64_t>(receiver) + 2);
    x ^= 0x165667b19e3779f9ull * (static_cast<std::uint64_t>(broadcast_id) + 3);
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    x ^= x >> 31;
    double u = static_cast<double>(x >> 11) * 0x1.0p-53;  // in [0, 1)
    return hi_ - (hi_ - lo_) * u;                         // in (lo, hi]
}

std::vector<double> AsyncRun::values_at(int agent, double time) const {
    const auto& snaps = history.at(agent);
    const std::vector<double>* last = nullptr;
    for (const auto& s : snaps) {
        if (s.time > time) break;
        last = &s.values;
    }
    if (last == nullptr) throw validation_error("query before the initial snapshot");
    return *last;
}

bool AsyncRun::correct_values_equal_at(double time) const {
    const std::vector<double>* reference = nullptr;
    std::vector<double> first;
    for (int i = 0; i < n; ++i) {
        if (!correct(i)) continue;
        std::vector<double> v = values_at(i, time);
        if (reference == nullptr) {
            first = std::move(v);
            reference = &first;
        } else if (v != *reference) {
            return false;
        }
    }
    return true;
}

std::optional<double> AsyncRun::agreement_time() const {
    if (!correct_values_equal_at(horizon)) return std::nullopt;
    double last_change = 0;
    for (int i = 0; i < n; ++i)
        if (correct(i)) last_change = std::max(last_change, history[i].back().time);
    return last_change;
}

namespace {

struct Pending {
    double time;
    long long id;
    int receiver;  // -1 marks a crash record
    int sender;
    std::vector<double> payload;
};

struct PendingLater {
    bool operator()(const Pending& a, const Pending& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.id > b.id;
    }
};

}  // namespace

AsyncRun run_minrelay(int n, int f, const Vec& initial_values, const DelayPolicy& delays,
                      const CrashSchedule& schedule, double horizon) {
    if (n < 1) throw validation_error("need at least one agent");
    if (f < 0 || f >= n) throw validation_error("fault bound must satisfy 0 <= f < n");
    if (static_cast<int>(initial_values.size()) != n)
        throw validation_error("initial values do not match the agent count");
    if (horizon < 0) throw validation_error("horizon must be nonnegative");
    schedule.validate(n, f);

    AsyncRun run;
    run.n = n;
    run.f = f;
    run.horizon = horizon;
    run.crash_times.resize(n);
    for (int i = 0; i < n; ++i) run.crash_times[i] = schedule.crash_time(i);

    std::vector<MinRelayState> states(n);
    run.history.resize(n);
    for (int i = 0; i < n; ++i) {
        states[i].values = {initial_values[i]};
        run.history[i].push_back({0.0, states[i].values});
    }

    long long next_id = 0;
    std::priority_queue<Pending, std::vector<Pending>, PendingLater> queue;
    for (const auto& c : schedule.crashes) queue.push({c.time, next_id++, -1, c.agent, {}});

    auto broadcast = [&](int sender, double time, bool final_one) {
        long long id = next_id++;
        run.log.push_back({AsyncEventRecord::Kind::broadcast, time, id, sender, -1,
                           states[sender].values, !final_one});
        std::vector<int> recipients;
        if (final_one) {
            if (const auto* r = schedule.final_recipients_of(sender)) recipients = *r;
        } else {
            for (int r = 0; r < n; ++r)
                if (r != sender) recipients.push_back(r);
        }
        for (int r : recipients) {
            double d = delays(sender, r, id);
            if (!(d > 0) || d > 1) throw validation_error("delay policy left (0, 1]");
            queue.push({time + d, next_id++, r, sender, states[sender].values});
        }
    };

    for (int i = 0; i < n; ++i) {
        auto ct = run.crash_times[i];
        broadcast(i, 0.0, ct.has_value() && *ct == 0.0);
    }

    while (!queue.empty()) {
        Pending ev = queue.top();
        if (ev.time > horizon) break;
        queue.pop();
        if (ev.receiver < 0) {
            run.log.push_back(
                {AsyncEventRecord::Kind::crash, ev.time, ev.id, ev.sender, -1, {}, false});
            continue;
        }
        auto ct = run.crash_times[ev.receiver];
        if (ct && ev.time > *ct) {
            run.log.push_back({AsyncEventRecord::Kind::drop, ev.time, ev.id, ev.receiver,
                               ev.sender, ev.payload, false});
            continue;
        }
        run.log.push_back({AsyncEventRecord::Kind::deliver, ev.time, ev.id, ev.receiver, ev.sender,
                           ev.payload, false});
        if (states[ev.receiver].merge(ev.payload)) {
            run.history[ev.receiver].push_back({ev.time, states[ev.receiver].values});
            broadcast(ev.receiver, ev.time, ct.has_value() && ev.time == *ct);
        }
    }

    std::stable_sort(run.log.begin(), run.log.end(), [](const auto& a, const auto& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.id < b.id;
    });
    run.final_states = std::move(states);
    return run;
}

CrashSchedule worst_case_crash_schedule(int n, int f) {
    if (f < 0 || f >= n) throw validation_error("fault bound must satisfy 0 <= f < n");
    CrashSchedule schedule;
    for (int k = 0; k < f; ++k)
        schedule.crashes.push_back({k, static_cast<double>(k), {k + 1}});
    return schedule;
}

CrashSchedule random_crash_schedule(int n, int f, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> count_pick(0, f);
    int count = count_pick(rng);
    std::vector<int> agents(n);
    for (int i = 0; i < n; ++i) agents[i] = i;
    std::shuffle(agents.begin(), agents.end(), rng);
    std::uniform_real_distribution<double> time_pick(0.0, 3.0);
    std::uniform_int_distribution<int> coin(0, 1);
    CrashSchedule schedule;
    for (int k = 0; k < count; ++k) {
        CrashEvent event{agents[k], time_pick(rng), {}};
        for (int r = 0; r < n; ++r)
            if (r != event.agent && coin(rng)) event.final_recipients.push_back(r);
        schedule.crashes.push_back(std::move(event));
    }
    return schedule;
}

RoundWrapperRun round_based_wrapper(const Algorithm& alg, int n, int f,
                                    const std::vector<Vec>& initial_outputs, int rounds,
                                    const DelayPolicy& delays) {
    if (f < 0 || f >= n) throw validation_error("fault bound must satisfy 0 <= f < n");
    if (static_cast<int>(initial_outputs.size()) != n)
        throw validation_error("initial outputs do not match the agent count");
    if (rounds < 0) throw validation_error("round count must be nonnegative");

    Configuration current = make_initial(alg, initial_outputs);
    std::vector<Configuration> configs;
    std::vector<CommGraph> induced;
    for (int t = 0; t < rounds; ++t) {
        std::vector<AgentSet> masks(n);
        for (int i = 0; i < n; ++i) {
            // Own state arrives instantly; everything else after its delay.
            std::vector<std::pair<double, int>> arrivals;
            arrivals.reserve(n);
            arrivals.emplace_back(0.0, i);
            for (int s = 0; s < n; ++s) {
                if (s == i) continue;
                long long id = static_cast<long long>(t) * n + s;
                double d = delays(s, i, id);
                if (!(d > 0) || d > 1) throw validation_error("delay policy left (0, 1]");
                arrivals.emplace_back(d, s);
            }
            std::sort(arrivals.begin(), arrivals.end());
            double cutoff = arrivals[n - f - 1].first;
            for (const auto& [time, sender] : arrivals)
                if (time <= cutoff) masks[i] |= AgentSet{1} << sender;
        }
        CommGraph g(n, std::move(masks));
        current = apply_round(alg, g, current);
        induced.push_back(g);
        configs.push_back(current);
    }

    NetworkModel model = induced.empty() ? NetworkModel({CommGraph::complete(n)})
                                         : NetworkModel(induced);
    Execution exec{model, alg.name(), n, alg.dimension(), make_initial(alg, initial_outputs), {}};
    for (int t = 0; t < rounds; ++t)
        exec.rounds.push_back(
            {static_cast<int>(*model.index_of(induced[t])), std::move(configs[t])});
    return {std::move(exec), std::move(induced)};
}

}  // namespace conlab
