#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "firm/core.hpp"
#include "firm/engine.hpp"

namespace firm {

enum class ArrivalKind { poisson, closed };

// One workload configuration: flat key/value settings plus per-deployment
// engine parameter sections.
struct Scenario {
  Mode mode = Mode::base;
  int k = 4;
  long long requests = 1;
  ArrivalKind arrival = ArrivalKind::poisson;
  // Poisson arrivals spread `requests` over this window (rate wins if set).
  double window = 100.0;
  double rate = 0.0;
  int clients = 1;  // client population; closed-loop keeps each one busy
  std::uint64_t seed = 1;
  double frequency = 50.0;  // promoter period, firm mode only
  double threshold = 0.0;   // 0 = per-deployment default of twice the base
  double health_window = 100.0;
  bool memoize = true;
  std::vector<std::string> request_templates;  // '@' expands to the request ordinal

  EngineParams defaults;
  std::map<std::string, EngineParams> deployment_params;

  EngineParams params_for(const std::string& alias) const;
  double threshold_for(const EngineParams& params) const;

  void validate() const;  // throws ValidationError
};

// Parses the scenario file format: `key value` lines, '#' comments, and
// `[deployment ALIAS]` / `[defaults]` sections for engine parameters.
Scenario parse_scenario(const std::string& text);

}  // namespace firm
