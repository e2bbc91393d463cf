#include "firm/scenario.hpp"

#include <sstream>

namespace firm {

EngineParams Scenario::params_for(const std::string& alias) const {
  auto it = deployment_params.find(alias);
  return it != deployment_params.end() ? it->second : defaults;
}

double Scenario::threshold_for(const EngineParams& params) const {
  if (threshold > 0) return threshold;
  const double base = params.kind == EngineKind::mapreduce
                          ? params.base_service_time * params.job_size_factor
                          : params.base_service_time;
  return 2.0 * base;
}

void Scenario::validate() const {
  if (k < 2 || k % 2 != 0) throw ValidationError("k must be even and at least 2");
  if (requests < 0) throw ValidationError("requests must be non-negative");
  if (clients < 1) throw ValidationError("clients must be positive");
  if (arrival == ArrivalKind::poisson && rate <= 0 && window <= 0)
    throw ValidationError("poisson arrivals need a positive window or rate");
  if (frequency <= 0) throw ValidationError("frequency must be positive");
  if (threshold < 0) throw ValidationError("threshold must be non-negative");
  if (health_window <= 0) throw ValidationError("health_window must be positive");
  if (request_templates.empty()) throw ValidationError("scenario declares no request template");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long long to_int(const std::string& value, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("invalid integer for '" + key + "'", line, 1);
}

double to_double(const std::string& value, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError("invalid number for '" + key + "'", line, 1);
}

bool to_bool(const std::string& value, const std::string& key, int line) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ParseError("expected true or false for '" + key + "'", line, 1);
}

void apply_engine_key(EngineParams& params, const std::string& key, const std::string& value,
                      int line) {
  if (key == "capacity") {
    params.capacity = static_cast<int>(to_int(value, key, line));
  } else if (key == "base_time") {
    params.base_service_time = to_double(value, key, line);
  } else if (key == "kind") {
    if (value == "simple") {
      params.kind = EngineKind::simple;
    } else if (value == "mapreduce") {
      params.kind = EngineKind::mapreduce;
    } else {
      throw ParseError("unknown engine kind '" + value + "'", line, 1);
    }
  } else if (key == "job_factor") {
    params.job_size_factor = to_double(value, key, line);
  } else if (key == "fail_prob") {
    params.failure_probability = to_double(value, key, line);
  } else if (key == "host") {
    params.host = static_cast<int>(to_int(value, key, line));
  } else {
    throw ParseError("unknown engine parameter '" + key + "'", line, 1);
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Scenario scenario;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  // "" = global section, "*" = defaults, anything else = deployment alias.
  std::string section;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (auto hash = line.find('#'); hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no, 1);
      std::string header = trim(line.substr(1, line.size() - 2));
      if (header == "defaults") {
        section = "*";
      } else if (header.rfind("deployment ", 0) == 0) {
        section = trim(header.substr(11));
        if (section.empty()) throw ParseError("deployment section needs an alias", line_no, 1);
        scenario.deployment_params.emplace(section, scenario.defaults);
      } else {
        throw ParseError("unknown section '" + header + "'", line_no, 1);
      }
      continue;
    }
    std::size_t gap = line.find_first_of(" \t");
    if (gap == std::string::npos)
      throw ParseError("expected 'key value'", line_no, 1);
    std::string key = line.substr(0, gap);
    std::string value = trim(line.substr(gap + 1));
    if (value.empty()) throw ParseError("missing value for '" + key + "'", line_no, 1);

    if (!section.empty()) {
      EngineParams& params =
          section == "*" ? scenario.defaults : scenario.deployment_params.at(section);
      apply_engine_key(params, key, value, line_no);
      continue;
    }
    if (key == "mode") {
      scenario.mode = parse_mode(value);
    } else if (key == "k") {
      scenario.k = static_cast<int>(to_int(value, key, line_no));
    } else if (key == "requests") {
      scenario.requests = to_int(value, key, line_no);
    } else if (key == "arrival") {
      if (value == "poisson") {
        scenario.arrival = ArrivalKind::poisson;
      } else if (value == "closed") {
        scenario.arrival = ArrivalKind::closed;
      } else {
        throw ParseError("unknown arrival process '" + value + "'", line_no, 1);
      }
    } else if (key == "window") {
      scenario.window = to_double(value, key, line_no);
    } else if (key == "rate") {
      scenario.rate = to_double(value, key, line_no);
    } else if (key == "clients") {
      scenario.clients = static_cast<int>(to_int(value, key, line_no));
    } else if (key == "seed") {
      scenario.seed = static_cast<std::uint64_t>(to_int(value, key, line_no));
    } else if (key == "frequency") {
      scenario.frequency = to_double(value, key, line_no);
    } else if (key == "threshold") {
      scenario.threshold = to_double(value, key, line_no);
    } else if (key == "health_window") {
      scenario.health_window = to_double(value, key, line_no);
    } else if (key == "memoize") {
      scenario.memoize = to_bool(value, key, line_no);
    } else if (key == "request") {
      scenario.request_templates.push_back(value);
    } else {
      throw ParseError("unknown scenario key '" + key + "'", line_no, 1);
    }
  }
  return scenario;
}

}  // namespace firm
