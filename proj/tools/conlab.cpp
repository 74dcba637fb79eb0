// Command-line front end: analyze network models, run and attack round-based
// consensus algorithms, simulate asynchronous min-relay, and exercise the
// approximate-consensus decision wrapper.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "conlab/algorithms.hpp"
#include "conlab/async_sim.hpp"
#include "conlab/engine.hpp"
#include "conlab/errors.hpp"
#include "conlab/graphs.hpp"
#include "conlab/model_analysis.hpp"
#include "conlab/report.hpp"

namespace {

using namespace conlab;
namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

NetworkModel load_model(const std::string& path) { return parse_model(read_file(path)); }

std::vector<Vec> parse_initial(const std::string& text) {
    std::vector<Vec> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        try {
            std::size_t used = 0;
            double v = std::stod(item, &used);
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
                ++used;
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back({v});
        } catch (const std::exception&) {
            throw validation_error("cannot parse initial output \"" + item + "\"");
        }
    }
    if (out.empty()) throw validation_error("--initial needs at least one value");
    return out;
}

struct SeedFlag {
    std::optional<std::uint64_t> value;
    std::uint64_t require(const std::string& why) const {
        if (!value) throw validation_error("--seed is required " + why);
        return *value;
    }
};

std::unique_ptr<PatternSource> make_source(const std::string& spec, NetworkModel model,
                                           const SeedFlag& seed) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon == std::string::npos ? spec.size() : colon);
    std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "constant") {
        if (arg.empty()) throw validation_error("constant pattern needs a 1-based graph index");
        return std::make_unique<ConstantSource>(std::move(model), std::stoi(arg) - 1);
    }
    if (kind == "cyclic") {
        std::vector<int> cycle;
        std::stringstream stream(arg);
        std::string item;
        while (std::getline(stream, item, ',')) cycle.push_back(std::stoi(item) - 1);
        return std::make_unique<CyclicSource>(std::move(model), std::move(cycle));
    }
    if (kind == "iid")
        return std::make_unique<IidSource>(std::move(model),
                                           seed.require("for the iid pattern"));
    if (kind == "phases") {
        int n = model.agent_count();
        if (!(model == psi_model(n)))
            throw validation_error("the phases pattern runs on the relay model");
        return std::make_unique<PhaseRelaySource>(n, seed.require("for the phases pattern"));
    }
    throw validation_error("unknown pattern \"" + spec + "\"");
}

void emit(const std::optional<std::string>& out_dir, const std::string& name,
          const std::string& content) {
    if (!out_dir) return;
    fs::create_directories(*out_dir);
    write_file_atomic((fs::path(*out_dir) / name).string(), content);
}

std::vector<double> bracket_lowers(const std::vector<ValencyBracket>& brackets) {
    std::vector<double> out;
    for (const auto& b : brackets) out.push_back(b.lower);
    return out;
}

int run_analyze(const std::string& model_path, const std::optional<std::string>& out_dir,
                bool beta_check) {
    NetworkModel model = load_model(model_path);
    ModelReport report = analyze(model);
    nlohmann::json doc = report_json(report);
    if (beta_check) doc["beta_oracle_match"] = beta_oracle(model) == report.beta_blocks;
    std::string text = doc.dump(2) + "\n";
    emit(out_dir, "report.json", text);
    std::cout << text;
    return 0;
}

struct SimulateArgs {
    std::string model_path, algorithm, initial, pattern = "iid", format = "csv";
    int rounds = 0, depth = 0;
    double tol = 1e-9;
    bool brackets = false;
    SeedFlag seed;
    std::optional<std::string> out_dir;
};

int run_simulate(const SimulateArgs& args) {
    NetworkModel model = load_model(args.model_path);
    auto initial = parse_initial(args.initial);
    auto alg = make_algorithm(args.algorithm, model.agent_count(), &model);
    auto source = make_source(args.pattern, model, args.seed);
    Execution exec = run(*alg, initial, *source, args.rounds);

    std::optional<std::vector<ValencyBracket>> brackets;
    if (args.brackets) {
        BracketOptions opts;
        if (args.seed.value) {
            opts.has_seed = true;
            opts.seed = *args.seed.value;
        }
        brackets.emplace();
        for (int t = 0; t <= exec.length(); ++t)
            brackets->push_back(
                valency_bracket(*alg, model, exec.config_at(t), args.depth, args.tol, opts));
    }

    std::string csv = execution_csv(*alg, exec, brackets ? &*brackets : nullptr);
    nlohmann::json summary = execution_summary_json(*alg, exec);
    summary["pattern"] = args.pattern;
    summary["tol"] = args.tol;
    if (args.seed.value) summary["seed"] = *args.seed.value;
    if (brackets) {
        summary["delta_lb_series"] = bracket_lowers(*brackets);
        nlohmann::json bs = nlohmann::json::array();
        for (const auto& b : *brackets) bs.push_back(bracket_json(b));
        summary["brackets"] = bs;
    }
    emit(args.out_dir, "trace.csv", csv);
    emit(args.out_dir, "summary.json", summary.dump(2) + "\n");
    if (args.format == "json")
        std::cout << summary.dump(2) << "\n";
    else
        std::cout << csv;
    return 0;
}

struct AdversaryArgs {
    std::string mode = "greedy", model_path, algorithm, initial, format = "csv";
    int rounds = 0, depth = 0, phases = 0, n = 0;
    double tol = 1e-9;
    SeedFlag seed;
    std::optional<std::string> out_dir;
};

int run_adversary(const AdversaryArgs& args) {
    auto initial = parse_initial(args.initial);
    BracketOptions opts;
    if (args.seed.value) {
        opts.has_seed = true;
        opts.seed = *args.seed.value;
    }

    std::string csv;
    nlohmann::json summary;
    if (args.mode == "greedy") {
        NetworkModel model = load_model(args.model_path);
        auto alg = make_algorithm(args.algorithm, model.agent_count(), &model);
        AdversaryRun run =
            greedy_adversary(*alg, model, initial, args.rounds, args.depth, args.tol, opts);
        csv = execution_csv(*alg, run.exec, &run.brackets);
        summary = execution_summary_json(*alg, run.exec);
        auto lowers = bracket_lowers(run.brackets);
        summary["delta_lb_series"] = lowers;
        summary["lb_contraction"] = contraction_json(contraction_estimate(lowers));
        nlohmann::json bs = nlohmann::json::array();
        for (const auto& b : run.brackets) bs.push_back(bracket_json(b));
        summary["brackets"] = bs;
    } else if (args.mode == "phase") {
        if (args.n < 4) throw validation_error("phase mode needs --n of at least 4");
        auto alg = make_algorithm(args.algorithm, args.n);
        PsiAdversaryRun run = psi_adversary(*alg, args.n, initial, args.phases, args.tol);
        csv = execution_csv(*alg, run.exec);
        summary = execution_summary_json(*alg, run.exec);
        summary["phase_length"] = run.phase_length;
        nlohmann::json choices = nlohmann::json::array();
        for (int u : run.phase_choices) choices.push_back(u + 1);
        summary["phase_choices"] = choices;
        auto lowers = bracket_lowers(run.phase_brackets);
        summary["phase_lb_series"] = lowers;
        summary["phase_lb_contraction"] = contraction_json(contraction_estimate(lowers));
    } else {
        throw validation_error("unknown adversary mode \"" + args.mode + "\"");
    }
    summary["mode"] = args.mode;
    summary["tol"] = args.tol;
    emit(args.out_dir, "trace.csv", csv);
    emit(args.out_dir, "summary.json", summary.dump(2) + "\n");
    if (args.format == "json")
        std::cout << summary.dump(2) << "\n";
    else
        std::cout << csv;
    return 0;
}

struct AsyncArgs {
    int n = 0, f = 0, rounds = 0;
    std::string algorithm = "minrelay", schedule = "worst-case", delay = "const:1";
    std::string initial;
    std::optional<double> horizon;
    SeedFlag seed;
    std::optional<std::string> out_dir;
};

std::unique_ptr<DelayPolicy> make_delay(const std::string& spec, const SeedFlag& seed) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon == std::string::npos ? spec.size() : colon);
    std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "const") return std::make_unique<ConstantDelay>(arg.empty() ? 1.0 : std::stod(arg));
    if (kind == "uniform") {
        double lo = 0.0, hi = 1.0;
        if (!arg.empty()) {
            auto comma = arg.find(',');
            if (comma == std::string::npos) throw validation_error("uniform delay needs lo,hi");
            lo = std::stod(arg.substr(0, comma));
            hi = std::stod(arg.substr(comma + 1));
        }
        return std::make_unique<UniformDelay>(seed.require("for uniform delays"), lo, hi);
    }
    throw validation_error("unknown delay policy \"" + spec + "\"");
}

int run_async(const AsyncArgs& args) {
    Vec initial;
    if (args.initial.empty()) {
        for (int i = 0; i < args.n; ++i) initial.push_back(i);
    } else {
        for (const auto& y : parse_initial(args.initial)) initial.push_back(y[0]);
    }

    if (args.algorithm.rfind("round:", 0) == 0) {
        std::string inner_name = args.algorithm.substr(6);
        auto alg = make_algorithm(inner_name, args.n);
        auto delays = make_delay(args.delay, args.seed);
        std::vector<Vec> outputs0;
        for (double v : initial) outputs0.push_back({v});
        RoundWrapperRun run =
            round_based_wrapper(*alg, args.n, args.f, outputs0, args.rounds, *delays);
        std::string csv = execution_csv(*alg, run.exec);
        nlohmann::json summary = execution_summary_json(*alg, run.exec);
        summary["f"] = args.f;
        summary["induced_model_size"] = run.exec.model.size();
        emit(args.out_dir, "trace.csv", csv);
        emit(args.out_dir, "induced_model.json", serialize_model(run.exec.model) + "\n");
        emit(args.out_dir, "summary.json", summary.dump(2) + "\n");
        std::cout << summary.dump(2) << "\n";
        return 0;
    }
    if (args.algorithm != "minrelay")
        throw validation_error("async algorithms are minrelay or round:<name>");

    CrashSchedule schedule;
    if (args.schedule == "worst-case")
        schedule = worst_case_crash_schedule(args.n, args.f);
    else if (args.schedule == "random")
        schedule = random_crash_schedule(args.n, args.f,
                                         args.seed.require("for random schedules"));
    else
        schedule = parse_schedule(read_file(args.schedule), args.n, args.f);

    auto delays = make_delay(args.delay, args.seed);
    double horizon = args.horizon.value_or(args.f + 2.0);
    AsyncRun run = run_minrelay(args.n, args.f, initial, *delays, schedule, horizon);
    nlohmann::json summary = async_summary_json(run);
    summary["schedule"] = args.schedule;
    summary["correct_agree_at_f_plus_1"] = run.correct_values_equal_at(args.f + 1.0);
    emit(args.out_dir, "events.jsonl", async_log_jsonl(run));
    emit(args.out_dir, "summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return 0;
}

struct ApproxArgs {
    std::string regime, model_path, algorithm, initial, pattern = "iid";
    double delta = 0, eps = 0, tol = 1e-9;
    SeedFlag seed;
    std::optional<std::string> out_dir;
};

int run_approx(const ApproxArgs& args) {
    NetworkModel model = load_model(args.model_path);
    auto initial = parse_initial(args.initial);
    int n = model.agent_count();
    auto inner = make_algorithm(args.algorithm, n, &model);
    ApproxRegime regime = parse_regime(args.regime);
    DecisionAlgorithm alg(inner, args.delta, args.eps, regime, n);
    auto source = make_source(args.pattern, model, args.seed);
    Execution exec = run(alg, initial, *source, alg.decision_round());

    const Configuration& last = exec.config_at(exec.length());
    std::vector<double> decisions;
    for (const auto& state : last.states) decisions.push_back(alg.decision_of(state)[0]);
    double lo0 = initial[0][0], hi0 = initial[0][0];
    for (const auto& y : initial) {
        lo0 = std::min(lo0, y[0]);
        hi0 = std::max(hi0, y[0]);
    }
    double gap = *std::max_element(decisions.begin(), decisions.end()) -
                 *std::min_element(decisions.begin(), decisions.end());
    bool valid = true;
    for (double v : decisions) valid = valid && lo0 <= v && v <= hi0;

    nlohmann::json summary{{"regime", args.regime},
                           {"algorithm", alg.name()},
                           {"n", n},
                           {"delta", args.delta},
                           {"eps", args.eps},
                           {"decision_round", alg.decision_round()},
                           {"decisions", decisions},
                           {"max_gap", gap},
                           {"within_eps", gap <= args.eps},
                           {"valid", valid}};
    emit(args.out_dir, "trace.csv", execution_csv(alg, exec));
    emit(args.out_dir, "summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"consensus laboratory for dynamic directed networks"};
    app.require_subcommand(1);

    std::string model_path, out_dir;
    SimulateArgs sim;
    AdversaryArgs adv;
    AsyncArgs async_args;
    ApproxArgs approx;
    std::optional<std::string> analyze_out;

    auto add_seed = [](CLI::App* cmd, SeedFlag& seed) {
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&seed](const std::uint64_t& v) { seed.value = v; },
            "seed for every random choice");
    };

    CLI::App* analyze_cmd = app.add_subcommand("analyze", "structural report of a network model");
    bool beta_check = false;
    analyze_cmd->add_option("--model", model_path, "model JSON file")->required();
    analyze_cmd->add_flag("--beta-oracle", beta_check,
                          "cross-check the beta classes against the exhaustive partition search");
    analyze_cmd->add_option_function<std::string>(
        "--out-dir", [&analyze_out](const std::string& v) { analyze_out = v; });

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "run an algorithm under a pattern");
    simulate_cmd->add_option("--model", sim.model_path)->required();
    simulate_cmd->add_option("--algorithm", sim.algorithm)->required();
    simulate_cmd->add_option("--initial", sim.initial, "comma-separated initial outputs")
        ->required();
    simulate_cmd->add_option("--rounds", sim.rounds)->required();
    simulate_cmd->add_option("--pattern", sim.pattern, "constant:I | cyclic:I,J,... | iid | phases");
    simulate_cmd->add_option("--tol", sim.tol);
    simulate_cmd->add_option("--depth", sim.depth);
    simulate_cmd->add_flag("--brackets", sim.brackets, "bracket the reachable spread per round");
    simulate_cmd->add_option("--format", sim.format)->check(CLI::IsMember({"csv", "json"}));
    add_seed(simulate_cmd, sim.seed);
    simulate_cmd->add_option_function<std::string>(
        "--out-dir", [&sim](const std::string& v) { sim.out_dir = v; });

    CLI::App* adversary_cmd = app.add_subcommand("adversary", "adversarial pattern search");
    adversary_cmd->add_option("--mode", adv.mode)->check(CLI::IsMember({"greedy", "phase"}));
    adversary_cmd->add_option("--model", adv.model_path);
    adversary_cmd->add_option("--algorithm", adv.algorithm)->required();
    adversary_cmd->add_option("--initial", adv.initial)->required();
    adversary_cmd->add_option("--rounds", adv.rounds);
    adversary_cmd->add_option("--depth", adv.depth);
    adversary_cmd->add_option("--phases", adv.phases);
    adversary_cmd->add_option("--n", adv.n);
    adversary_cmd->add_option("--tol", adv.tol);
    adversary_cmd->add_option("--format", adv.format)->check(CLI::IsMember({"csv", "json"}));
    add_seed(adversary_cmd, adv.seed);
    adversary_cmd->add_option_function<std::string>(
        "--out-dir", [&adv](const std::string& v) { adv.out_dir = v; });

    CLI::App* async_cmd = app.add_subcommand("async", "asynchronous crash-fault simulation");
    async_cmd->add_option("--n", async_args.n)->required();
    async_cmd->add_option("--f", async_args.f)->required();
    async_cmd->add_option("--algorithm", async_args.algorithm, "minrelay | round:<name>");
    async_cmd->add_option("--schedule", async_args.schedule,
                          "worst-case | random | schedule file");
    async_cmd->add_option("--delay", async_args.delay, "const:X | uniform:LO,HI");
    async_cmd->add_option("--initial", async_args.initial);
    async_cmd->add_option("--rounds", async_args.rounds, "rounds for round:<name>");
    async_cmd->add_option_function<double>(
        "--horizon", [&async_args](const double& v) { async_args.horizon = v; });
    add_seed(async_cmd, async_args.seed);
    async_cmd->add_option_function<std::string>(
        "--out-dir", [&async_args](const std::string& v) { async_args.out_dir = v; });

    CLI::App* approx_cmd = app.add_subcommand("approx", "decide within eps of each other");
    approx_cmd->add_option("--regime", approx.regime)->required();
    approx_cmd->add_option("--delta", approx.delta, "bound on the initial spread")->required();
    approx_cmd->add_option("--eps", approx.eps, "decision accuracy")->required();
    approx_cmd->add_option("--model", approx.model_path)->required();
    approx_cmd->add_option("--algorithm", approx.algorithm)->required();
    approx_cmd->add_option("--initial", approx.initial)->required();
    approx_cmd->add_option("--pattern", approx.pattern);
    add_seed(approx_cmd, approx.seed);
    approx_cmd->add_option_function<std::string>(
        "--out-dir", [&approx](const std::string& v) { approx.out_dir = v; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (analyze_cmd->parsed()) return run_analyze(model_path, analyze_out, beta_check);
        if (simulate_cmd->parsed()) return run_simulate(sim);
        if (adversary_cmd->parsed()) return run_adversary(adv);
        if (async_cmd->parsed()) return run_async(async_args);
        if (approx_cmd->parsed()) return run_approx(approx);
    } catch (const resource_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const convergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
