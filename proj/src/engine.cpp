#include "firm/engine.hpp"

#include <utility>

namespace firm {

EngineState::EngineState(std::string service, std::string deployment, int host,
                         EngineParams params)
    : service_(std::move(service)),
      deployment_(std::move(deployment)),
      host_(host),
      params_(params) {
  if (params_.capacity < 1) throw ValidationError("engine capacity must be positive");
  if (params_.base_service_time <= 0)
    throw ValidationError("engine base service time must be positive");
  if (params_.job_size_factor <= 0)
    throw ValidationError("engine job size factor must be positive");
  if (params_.failure_probability < 0 || params_.failure_probability > 1)
    throw ValidationError("engine failure probability must be within [0, 1]");
}

double EngineState::effective_base() const {
  return params_.kind == EngineKind::mapreduce
             ? params_.base_service_time * params_.job_size_factor
             : params_.base_service_time;
}

double EngineState::admit(double now) {
  ++admissions_;
  ++in_flight_;
  check_counters();
  const double over = static_cast<double>(in_flight_ - params_.capacity);
  const double penalty = over > 0 ? over / static_cast<double>(params_.capacity) : 0.0;
  return now + effective_base() * (1.0 + penalty);
}

void EngineState::complete(double now, double service_time, Outcome outcome) {
  if (in_flight_ <= 0)
    throw InvariantViolation("completion on engine '" + deployment_ +
                             "' with nothing in flight");
  --in_flight_;
  if (outcome == Outcome::ok) {
    ++completed_;
    history_.push_back(Sample{now, service_time});
  } else {
    ++failed_;
  }
  check_counters();
}

EngineReport EngineState::health_report(double window, double threshold, double now) const {
  double sum = 0.0;
  long long count = 0;
  for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
    if (it->at < now - window) break;
    sum += it->service_time;
    ++count;
  }
  EngineReport report;
  report.deployment = deployment_;
  // An empty window falls back to the configured base time and the verdict
  // rests on backlog alone, so a quiet engine never looks congested.
  report.mean_service_time =
      count > 0 ? sum / static_cast<double>(count) : params_.base_service_time;
  report.in_flight = in_flight_;
  report.over_threshold = in_flight_ > params_.capacity ||
                          (count > 0 && report.mean_service_time > threshold);
  return report;
}

void EngineState::check_counters() const {
  if (admissions_ != in_flight_ + completed_ + failed_)
    throw InvariantViolation("engine '" + deployment_ + "' lost track of admissions");
}

}  // namespace firm
