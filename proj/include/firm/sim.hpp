#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "firm/composition.hpp"
#include "firm/core.hpp"
#include "firm/event_log.hpp"
#include "firm/registry.hpp"
#include "firm/scenario.hpp"

namespace firm {

// Per-request outcome of a run; only completed requests produce one.
struct MetricsRecord {
  long long request = 0;
  std::string client;
  double arrived = 0.0;
  double completion_time = 0.0;  // duration from arrival to the root result
  long long inter_rack_hops = 0;
  std::string result_value;
  std::vector<NodeTiming> node_timings;
};

struct RunTotals {
  long long arrivals = 0;
  long long completed = 0;
  long long failures = 0;
  long long in_flight_at_abort = 0;
  long long admissions = 0;
  long long memo_hits = 0;
  long long demotions = 0;
  long long promotions = 0;
  long long triggers = 0;
};

struct RunResult {
  Mode mode = Mode::base;
  std::uint64_t seed = 0;
  EventLog log;
  std::vector<MetricsRecord> metrics;
  RunTotals totals;
};

// Executes the scenario against the registry until the workload drains.
// Identical (scenario, seed) pairs produce byte-identical event logs.
RunResult run(const Scenario& scenario, const Registry& registry);

// Sample standard deviation over mean, as a percentage.  Needs two values.
double deviation_percent(const std::vector<double>& values);

std::vector<double> completion_times(const std::vector<MetricsRecord>& metrics);
double mean_completion(const std::vector<MetricsRecord>& metrics);
long long total_inter_rack_hops(const std::vector<MetricsRecord>& metrics);

struct CompareRow {
  long long requests = 0;
  Mode mode = Mode::base;
  double mean_completion = 0.0;
  double deviation_pct = 0.0;
  long long inter_rack_hops = 0;
  long long completed = 0;
  long long failures = 0;
};

// Runs the same workload under every mode for each request count, matched on
// the scenario seed.  Rows come out count-major, mode-minor.
std::vector<CompareRow> compare_modes(const Scenario& scenario, const Registry& registry,
                                      const std::vector<long long>& request_counts);

std::string metrics_csv(const std::vector<MetricsRecord>& metrics);
std::string trace_csv(const std::vector<MetricsRecord>& metrics);
std::string compare_csv(const std::vector<CompareRow>& rows);
std::string summary_text(const Scenario& scenario, const RunResult& result);

}  // namespace firm
