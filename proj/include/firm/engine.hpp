#pragma once

#include <string>
#include <vector>

#include "firm/errors.hpp"

namespace firm {

enum class EngineKind { simple, mapreduce };
enum class Outcome { ok, failed };

// Health snapshot an engine hands to the controller.
struct EngineReport {
  std::string deployment;
  double mean_service_time = 0.0;
  long long in_flight = 0;
  bool over_threshold = false;

  bool operator==(const EngineReport&) const = default;
};

// Static engine configuration, normally supplied per deployment by the
// scenario file.
struct EngineParams {
  int capacity = 4;
  double base_service_time = 10.0;
  EngineKind kind = EngineKind::simple;
  double job_size_factor = 1.0;  // stretches the base time of mapreduce engines
  double failure_probability = 0.0;
  int host = -1;  // topology host, -1 = assign round-robin at startup
};

// Execution state of one deployment.  Service time grows linearly once the
// number of requests in flight exceeds the nominal capacity.
class EngineState {
 public:
  EngineState(std::string service, std::string deployment, int host, EngineParams params);

  const std::string& service() const { return service_; }
  const std::string& deployment() const { return deployment_; }
  int host() const { return host_; }
  const EngineParams& params() const { return params_; }

  long long in_flight() const { return in_flight_; }
  long long completed() const { return completed_; }
  long long failed() const { return failed_; }
  long long admissions() const { return admissions_; }

  // Base service time with the job-size stretch applied (mapreduce only).
  double effective_base() const;

  // Admits one request at `now` and returns its predicted completion time:
  // effective base scaled by 1 + max(0, in_flight - capacity) / capacity,
  // where in_flight already counts the admitted request.
  double admit(double now);

  // Retires one in-flight request.  Successful completions feed the
  // service-time history used by health reports.
  void complete(double now, double service_time, Outcome outcome);

  // Mean service time over completions inside [now - window, now]; an empty
  // window reports the effective base.  over_threshold when the mean exceeds
  // the threshold or the backlog exceeds capacity.
  EngineReport health_report(double window, double threshold, double now) const;

 private:
  void check_counters() const;

  struct Sample {
    double at;
    double service_time;
  };

  std::string service_;
  std::string deployment_;
  int host_;
  EngineParams params_;
  long long in_flight_ = 0;
  long long completed_ = 0;
  long long failed_ = 0;
  long long admissions_ = 0;
  std::vector<Sample> history_;
};

}  // namespace firm
