#include "conlab/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "conlab/errors.hpp"

namespace conlab {

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string execution_csv(const Algorithm& alg, const Execution& exec,
                          const std::vector<ValencyBracket>* brackets) {
    if (brackets != nullptr && static_cast<int>(brackets->size()) != exec.length() + 1)
        throw validation_error("need one bracket per configuration");
    std::string csv = "round,graph_id";
    const int d = alg.dimension();
    for (int i = 1; i <= exec.n; ++i) {
        if (d == 1) {
            csv += ",y_" + std::to_string(i);
        } else {
            for (int c = 1; c <= d; ++c)
                csv += ",y_" + std::to_string(i) + "_" + std::to_string(c);
        }
    }
    csv += ",delta,delta_lb,delta_ub,ratio\n";

    double previous_delta = 0;
    for (int t = 0; t <= exec.length(); ++t) {
        const Configuration& config = exec.config_at(t);
        csv += std::to_string(t);
        csv += ",";
        if (t > 0) csv += std::to_string(exec.rounds[t - 1].graph + 1);
        for (const auto& y : outputs(alg, config))
            for (double v : y) csv += "," + format_double(v);
        double delta = output_delta(alg, config);
        csv += "," + format_double(delta);
        csv += ",";
        if (brackets != nullptr) csv += format_double((*brackets)[t].lower);
        csv += ",";
        if (brackets != nullptr) csv += format_double((*brackets)[t].upper);
        csv += ",";
        if (t > 0 && previous_delta > 0) csv += format_double(delta / previous_delta);
        csv += "\n";
        previous_delta = delta;
    }
    return csv;
}

namespace {

nlohmann::json blocks_json(const Partition& partition) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& block : partition.blocks()) {
        nlohmann::json b = nlohmann::json::array();
        for (int g : block) b.push_back(g + 1);
        blocks.push_back(b);
    }
    return blocks;
}

}  // namespace

nlohmann::json report_json(const ModelReport& report) {
    nlohmann::json roots = nlohmann::json::array();
    for (const auto& set : report.root_sets) {
        nlohmann::json r = nlohmann::json::array();
        for (int a : set) r.push_back(a + 1);
        roots.push_back(r);
    }
    nlohmann::json doc{{"n", report.n},
                       {"rooted", report.rooted},
                       {"roots", roots},
                       {"nonsplit", report.nonsplit},
                       {"asymptotic_solvable", report.asymptotic},
                       {"alpha_star_blocks", blocks_json(report.alpha_blocks)},
                       {"beta_blocks", blocks_json(report.beta_blocks)},
                       {"consensus_solvable", report.solvable}};
    if (report.diameter)
        doc["alpha_diameter"] = *report.diameter;
    else
        doc["alpha_diameter"] = nullptr;
    return doc;
}

nlohmann::json bracket_json(const ValencyBracket& bracket, bool with_samples) {
    nlohmann::json doc{{"lower", bracket.lower},
                       {"tol", bracket.tol},
                       {"tol_abs", bracket.tol_abs},
                       {"depth", bracket.depth},
                       {"exhaustive", bracket.exhaustive},
                       {"sample_count", bracket.samples.size()}};
    if (std::isinf(bracket.upper))
        doc["upper"] = nullptr;
    else
        doc["upper"] = bracket.upper;
    if (with_samples) {
        nlohmann::json samples = nlohmann::json::array();
        for (const auto& s : bracket.samples) {
            nlohmann::json prefix = nlohmann::json::array();
            for (int g : s.prefix) prefix.push_back(g + 1);
            samples.push_back({{"value", s.value},
                               {"err", s.err},
                               {"prefix", prefix},
                               {"closing", s.closing + 1}});
        }
        doc["samples"] = samples;
    }
    return doc;
}

nlohmann::json contraction_json(const ContractionEstimate& estimate) {
    auto series = [](const std::vector<double>& xs) {
        nlohmann::json out = nlohmann::json::array();
        for (double x : xs) {
            if (std::isnan(x))
                out.push_back(nullptr);
            else
                out.push_back(x);
        }
        return out;
    };
    nlohmann::json doc{{"ratios", series(estimate.ratios)}, {"roots", series(estimate.roots)}};
    if (!std::isnan(estimate.max_ratio)) doc["max_ratio"] = estimate.max_ratio;
    if (!std::isnan(estimate.final_root)) doc["final_root"] = estimate.final_root;
    return doc;
}

nlohmann::json execution_summary_json(const Algorithm& alg, const Execution& exec) {
    std::vector<double> deltas;
    for (int t = 0; t <= exec.length(); ++t) deltas.push_back(output_delta(alg, exec.config_at(t)));
    nlohmann::json graph_ids = nlohmann::json::array();
    for (int g : exec.graph_indices()) graph_ids.push_back(g + 1);
    return nlohmann::json{{"algorithm", exec.algorithm},
                          {"n", exec.n},
                          {"rounds", exec.length()},
                          {"graph_ids", graph_ids},
                          {"delta_series", deltas},
                          {"contraction", contraction_json(contraction_estimate(deltas))}};
}

namespace {

const char* kind_name(AsyncEventRecord::Kind kind) {
    switch (kind) {
        case AsyncEventRecord::Kind::broadcast: return "broadcast";
        case AsyncEventRecord::Kind::deliver: return "deliver";
        case AsyncEventRecord::Kind::drop: return "drop";
        case AsyncEventRecord::Kind::crash: return "crash";
    }
    return "?";
}

}  // namespace

std::string async_log_jsonl(const AsyncRun& run) {
    std::string out;
    for (const auto& e : run.log) {
        nlohmann::json doc{{"kind", kind_name(e.kind)},
                           {"time", e.time},
                           {"id", e.id},
                           {"agent", e.agent + 1}};
        if (e.peer >= 0) doc["peer"] = e.peer + 1;
        if (e.kind == AsyncEventRecord::Kind::broadcast) doc["clean"] = e.clean;
        if (e.kind != AsyncEventRecord::Kind::crash) doc["payload"] = e.payload;
        out += doc.dump();
        out += "\n";
    }
    return out;
}

nlohmann::json async_summary_json(const AsyncRun& run) {
    nlohmann::json final_sets = nlohmann::json::array();
    nlohmann::json outputs = nlohmann::json::array();
    nlohmann::json crash_times = nlohmann::json::array();
    for (int i = 0; i < run.n; ++i) {
        final_sets.push_back(run.final_states[i].values);
        outputs.push_back(run.final_states[i].y());
        if (run.crash_times[i])
            crash_times.push_back(*run.crash_times[i]);
        else
            crash_times.push_back(nullptr);
    }
    auto agreement = run.agreement_time();
    return nlohmann::json{
        {"n", run.n},
        {"f", run.f},
        {"horizon", run.horizon},
        {"crash_times", crash_times},
        {"final_sets", final_sets},
        {"outputs", outputs},
        {"events", run.log.size()},
        {"correct_agree", run.correct_values_equal_at(run.horizon)},
        {"agreement_time", agreement ? nlohmann::json(*agreement) : nlohmann::json()}};
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw validation_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw validation_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw validation_error("cannot move " + tmp.string() + " into place: " + ec.message());
}

}  // namespace conlab
