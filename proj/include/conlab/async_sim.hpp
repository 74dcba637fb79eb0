#pragma once

#include <optional>

#include "conlab/algorithms.hpp"
#include "conlab/engine.hpp"

namespace conlab {

// At `time` the agent makes its final, possibly incomplete broadcast: only
// `final_recipients` receive it. Deliveries to the agent at exactly `time`
// are still processed; later ones are dropped.
struct CrashEvent {
    int agent;
    double time;
    std::vector<int> final_recipients;
};

struct CrashSchedule {
    std::vector<CrashEvent> crashes;

    void validate(int n, int f) const;
    std::optional<double> crash_time(int agent) const;
    const std::vector<int>* final_recipients_of(int agent) const;
};

CrashSchedule parse_schedule(const std::string& text, int n, int f);
std::string serialize_schedule(const CrashSchedule& schedule);

// Delay of one broadcast hop, in (0, 1]. Stateless in the call order:
// policies derive the delay from (sender, receiver, broadcast id) alone so
// reruns are reproducible.
class DelayPolicy {
public:
    virtual ~DelayPolicy() = default;
    virtual double operator()(int sender, int receiver, long long broadcast_id) const = 0;
};

class ConstantDelay final : public DelayPolicy {
public:
    explicit ConstantDelay(double delay = 1.0);
    double operator()(int, int, long long) const override { return delay_; }

private:
    double delay_;
};

// Hash of (seed, sender, receiver, broadcast id) mapped into (lo, hi].
class UniformDelay final : public DelayPolicy {
public:
    UniformDelay(std::uint64_t seed, double lo = 0.0, double hi = 1.0);
    double operator()(int sender, int receiver, long long broadcast_id) const override;

private:
    std::uint64_t seed_;
    double lo_, hi_;
};

struct AsyncEventRecord {
    enum class Kind { broadcast, deliver, drop, crash };
    Kind kind;
    double time;
    long long id;
    int agent;  // sender for broadcast, receiver for deliver/drop
    int peer;   // the other side, -1 for crash records
    std::vector<double> payload;
    bool clean;  // broadcast only: reached every other agent
};

struct Snapshot {
    double time;
    std::vector<double> values;
};

struct AsyncRun {
    int n = 0;
    int f = 0;
    double horizon = 0;
    std::vector<AsyncEventRecord> log;
    std::vector<MinRelayState> final_states;
    std::vector<std::optional<double>> crash_times;
    std::vector<std::vector<Snapshot>> history;  // per agent, first entry at time 0

    bool correct(int agent) const { return !crash_times[agent].has_value(); }
    std::vector<double> values_at(int agent, double time) const;
    bool correct_values_equal_at(double time) const;
    // Last time a correct agent's set changed, provided all correct sets
    // agree at the horizon; nullopt otherwise.
    std::optional<double> agreement_time() const;
};

// Event-driven min-relay: agents keep a set of seen values, broadcast on
// every growth, and output the minimum. Initial broadcasts happen at time
// 0; an agent crashing at time t makes its broadcasts at t incomplete.
AsyncRun run_minrelay(int n, int f, const Vec& initial_values, const DelayPolicy& delays,
                      const CrashSchedule& schedule, double horizon);

// Chain of f crashing relays, each handing the low value to exactly one
// successor: with unit delays the last correct sets agree exactly at time
// f+1 and not before.
CrashSchedule worst_case_crash_schedule(int n, int f);

CrashSchedule random_crash_schedule(int n, int f, std::uint64_t seed);

// Lock-step rounds over an asynchronous wire: each round every agent waits
// for the n-f earliest arrivals (ties included) and steps on those. The
// induced graphs always have in-degrees >= n-f.
struct RoundWrapperRun {
    Execution exec;
    std::vector<CommGraph> induced;
};

RoundWrapperRun round_based_wrapper(const Algorithm& alg, int n, int f,
                                    const std::vector<Vec>& initial_outputs, int rounds,
                                    const DelayPolicy& delays);

}  // namespace conlab
