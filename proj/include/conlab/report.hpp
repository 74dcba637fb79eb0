#pragma once

#include <string>

#include "conlab/async_sim.hpp"
#include "conlab/engine.hpp"
#include "conlab/model_analysis.hpp"
#include "json.hpp"

namespace conlab {

// Shortest decimal string that round-trips the exact double.
std::string format_double(double v);

// Trace with one row per configuration:
//   round,graph_id,y_1..y_n,delta,delta_lb,delta_ub,ratio
// graph_id is the 1-based index into the execution's model, empty in the
// round-0 row. delta_lb/delta_ub come from `brackets` (one per
// configuration) and stay empty when brackets are not supplied; an
// infinite upper bound prints as "inf". ratio is delta over the previous
// delta, empty when undefined.
std::string execution_csv(const Algorithm& alg, const Execution& exec,
                          const std::vector<ValencyBracket>* brackets = nullptr);

nlohmann::json report_json(const ModelReport& report);
nlohmann::json bracket_json(const ValencyBracket& bracket, bool with_samples = false);
nlohmann::json contraction_json(const ContractionEstimate& estimate);
nlohmann::json execution_summary_json(const Algorithm& alg, const Execution& exec);

// One JSON object per line, events in time order.
std::string async_log_jsonl(const AsyncRun& run);
nlohmann::json async_summary_json(const AsyncRun& run);

// Writes via a temporary file plus rename, so readers never see a torn file.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace conlab
