#include "firm/event_log.hpp"

#include <cstdio>
#include <sstream>

namespace firm {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::arrival: return "arrival";
    case EventKind::admission: return "admission";
    case EventKind::completion: return "completion";
    case EventKind::memo_hit: return "memo_hit";
    case EventKind::request_done: return "request_done";
    case EventKind::request_failed: return "request_failed";
    case EventKind::trigger: return "trigger";
    case EventKind::demotion: return "demotion";
    case EventKind::promotion: return "promotion";
    case EventKind::tick: return "tick";
    case EventKind::affinity_evict: return "affinity_evict";
  }
  return "unknown";
}

LogRecord& EventLog::append(double time, EventKind kind) {
  LogRecord record;
  record.seq = static_cast<long long>(records_.size());
  record.time = time;
  record.kind = kind;
  records_.push_back(std::move(record));
  return records_.back();
}

std::string EventLog::format_time(double time) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", time);
  return buf;
}

std::string EventLog::to_csv() const {
  std::ostringstream out;
  out << "seq,time,kind,request,node,service,deployment,client,detail\n";
  for (const auto& r : records_) {
    out << r.seq << ',' << format_time(r.time) << ',' << to_string(r.kind) << ',';
    if (r.request >= 0) out << r.request;
    out << ',';
    if (r.node >= 0) out << r.node;
    out << ',' << r.service << ',' << r.deployment << ',' << r.client << ',' << r.detail
        << "\n";
  }
  return out.str();
}

}  // namespace firm
