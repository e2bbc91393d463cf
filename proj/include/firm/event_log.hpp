#pragma once

#include <string>
#include <vector>

namespace firm {

enum class EventKind {
  arrival,
  admission,
  completion,
  memo_hit,
  request_done,
  request_failed,
  trigger,
  demotion,
  promotion,
  tick,
  affinity_evict,
};

const char* to_string(EventKind kind);

struct LogRecord {
  long long seq = 0;
  double time = 0.0;
  EventKind kind = EventKind::arrival;
  long long request = -1;
  int node = -1;
  std::string service;
  std::string deployment;
  std::string client;
  std::string detail;
};

// Append-only log of simulation events.  Serialization is byte-stable: the
// same sequence of appends always yields the same CSV.
class EventLog {
 public:
  LogRecord& append(double time, EventKind kind);

  const std::vector<LogRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  std::string to_csv() const;

  // Fixed-width decimal form used for every timestamp the library emits.
  static std::string format_time(double time);

 private:
  std::vector<LogRecord> records_;
};

}  // namespace firm
