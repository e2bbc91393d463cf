#include "firm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

#include "firm/engine.hpp"
#include "firm/rng.hpp"
#include "firm/topology.hpp"

namespace firm {

namespace {

std::string expand_template(const std::string& tmpl, long long ordinal) {
  std::string out;
  out.reserve(tmpl.size());
  for (char c : tmpl) {
    if (c == '@') {
      out += std::to_string(ordinal);
    } else {
      out += c;
    }
  }
  return out;
}

struct SimEvent {
  enum Kind { arrival, completion, flush, tick };

  double time = 0.0;
  long long seq = 0;  // insertion order breaks time ties
  Kind kind = arrival;
  long long request = -1;  // arrival ordinal / execution index
  int node = -1;
  Outcome outcome = Outcome::ok;
  double service_time = 0.0;
  std::string client;
  std::string text;
};

struct LaterFirst {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct Execution {
  long long id = 0;
  std::string client;
  double arrived = 0.0;
  CompositionRequest request;
  std::vector<int> anchors;  // hosts already serving this request
  int outstanding = 0;       // admitted, not yet completed
  bool failed = false;
  bool done = false;
};

class Simulation {
 public:
  Simulation(const Scenario& scenario, const Registry& registry)
      : scenario_(scenario),
        topology_(Topology::fat_tree(scenario.k)),
        controller_(registry, &topology_, scenario.mode, &result_.log, scenario.frequency,
                    derive_seed(scenario.seed, 2)),
        workload_rng_(derive_seed(scenario.seed, 0)),
        failure_rng_(derive_seed(scenario.seed, 1)) {
    result_.mode = scenario.mode;
    result_.seed = scenario.seed;
    build_engines();
    schedule_initial_events();
  }

  RunResult take() {
    loop();
    result_.totals.in_flight_at_abort = active_executions_;
    return std::move(result_);
  }

 private:
  void build_engines() {
    const int hosts = topology_.host_count();
    int next_host = 0;
    for (const auto& entry : controller_.registry().services()) {
      if (entry.kind != ServiceKind::simple) continue;
      for (const auto& impl : entry.implementations)
        for (const auto& dep : impl.deployments) {
          EngineParams params = scenario_.params_for(dep.alias);
          int host = params.host;
          if (host >= hosts)
            throw ValidationError("deployment '" + dep.alias + "' pinned to host " +
                                  std::to_string(host) + " outside a k=" +
                                  std::to_string(scenario_.k) + " fat tree");
          if (host < 0) host = next_host++ % hosts;
          params.host = host;
          engines_.emplace(dep.alias, EngineState(entry.name, dep.alias, host, params));
          controller_.register_deployment(entry.name, dep.alias, host);
        }
    }
  }

  void schedule(SimEvent event) {
    event.seq = next_seq_++;
    if (event.kind == SimEvent::arrival) ++pending_arrivals_;
    queue_.push(std::move(event));
  }

  void schedule_initial_events() {
    if (scenario_.arrival == ArrivalKind::poisson) {
      const double rate = scenario_.rate > 0
                              ? scenario_.rate
                              : static_cast<double>(scenario_.requests) / scenario_.window;
      double at = 0.0;
      for (long long i = 0; i < scenario_.requests; ++i) {
        at += workload_rng_.exponential(rate);
        schedule(make_arrival(at, i));
      }
      scheduled_arrivals_ = scenario_.requests;
    } else {
      const long long first_wave =
          std::min<long long>(scenario_.clients, scenario_.requests);
      for (long long i = 0; i < first_wave; ++i) schedule(make_arrival(0.0, i));
      scheduled_arrivals_ = first_wave;
    }
    if (scenario_.mode == Mode::firm) {
      SimEvent tick;
      tick.kind = SimEvent::tick;
      tick.time = scenario_.frequency;
      schedule(std::move(tick));
    }
  }

  SimEvent make_arrival(double at, long long ordinal) {
    SimEvent event;
    event.kind = SimEvent::arrival;
    event.time = at;
    event.request = ordinal;
    event.client = "c" + std::to_string(ordinal % scenario_.clients);
    event.text = expand_template(
        scenario_.request_templates[static_cast<std::size_t>(
            ordinal % static_cast<long long>(scenario_.request_templates.size()))],
        ordinal);
    return event;
  }

  bool finished() const {
    return scheduled_arrivals_ >= scenario_.requests && pending_arrivals_ == 0 &&
           active_executions_ == 0;
  }

  void loop() {
    // Natural drain: once the arrival budget is spent and every execution is
    // terminal, whatever remains in the queue (promoter ticks, stale trigger
    // flushes) is dropped.
    while (!queue_.empty() && !finished()) {
      const SimEvent event = queue_.top();
      queue_.pop();
      switch (event.kind) {
        case SimEvent::arrival: on_arrival(event); break;
        case SimEvent::completion: on_completion(event); break;
        case SimEvent::flush: on_flush(event); break;
        case SimEvent::tick: on_tick(event); break;
      }
    }
  }

  void on_arrival(const SimEvent& event) {
    --pending_arrivals_;
    Execution exec;
    exec.id = event.request;
    exec.client = event.client;
    exec.arrived = event.time;
    exec.request = parse_request(event.text);
    find_endpoints(controller_.registry(), exec.request);
    ++result_.totals.arrivals;
    ++active_executions_;
    auto& rec = result_.log.append(event.time, EventKind::arrival);
    rec.request = exec.id;
    rec.service = exec.request.root().service;
    rec.client = exec.client;
    executions_.push_back(std::move(exec));
    index_of_[executions_.back().id] = executions_.size() - 1;
    dispatch(executions_.back(), event.time);
  }

  void dispatch(Execution& exec, double now) {
    bool progressed = true;
    while (progressed) {
      progressed = false;
      for (int id : ready_set(exec.request)) {
        InvocationNode& node = exec.request.node(id);
        node.started = true;
        node.started_at = now;
        node.fingerprint = input_fingerprint(exec.request, id);
        if (node.composite) {
          // Composites consolidate member results locally, without an engine.
          node.deployment = controller_.registry().composition(node.service).entry_point;
          node.out = make_result(node.service, node.fingerprint, node.deployment, now);
          node.completed_at = now;
          auto& rec = result_.log.append(now, EventKind::completion);
          rec.request = exec.id;
          rec.node = id;
          rec.service = node.service;
          rec.deployment = node.deployment;
          rec.client = exec.client;
          rec.detail = "consolidated";
          progressed = true;
          continue;
        }
        if (scenario_.memoize) {
          if (auto hit = memo_.lookup(node.service, node.fingerprint)) {
            node.out = *hit;  // verbatim, provenance preserved
            node.deployment = hit->deployment;
            node.completed_at = now;
            ++result_.totals.memo_hits;
            auto& rec = result_.log.append(now, EventKind::memo_hit);
            rec.request = exec.id;
            rec.node = id;
            rec.service = node.service;
            rec.deployment = node.deployment;
            rec.client = exec.client;
            progressed = true;
            continue;
          }
          // An identical invocation may already be running; share its result
          // instead of admitting a second copy.
          const MemoKey key{node.service, node.fingerprint};
          auto pending = inflight_.find(key);
          if (pending != inflight_.end()) {
            pending->second.emplace_back(exec.id, id);
            continue;
          }
          inflight_.emplace(key, std::vector<std::pair<long long, int>>{});
        }
        const ResolvedDeployment target =
            controller_.resolve_deployment(node.service, exec.client, exec.anchors);
        node.deployment = target.alias;
        if (std::find(exec.anchors.begin(), exec.anchors.end(), target.host) ==
            exec.anchors.end())
          exec.anchors.push_back(target.host);
        EngineState& engine = engines_.at(target.alias);
        const double done_at = engine.admit(now);
        ++result_.totals.admissions;
        ++exec.outstanding;
        auto& rec = result_.log.append(now, EventKind::admission);
        rec.request = exec.id;
        rec.node = id;
        rec.service = node.service;
        rec.deployment = target.alias;
        rec.client = exec.client;
        SimEvent completion;
        completion.kind = SimEvent::completion;
        completion.time = done_at;
        completion.request = exec.id;
        completion.node = id;
        completion.service_time = done_at - now;
        completion.outcome =
            failure_rng_.uniform01() < engine.params().failure_probability ? Outcome::failed
                                                                           : Outcome::ok;
        schedule(std::move(completion));
        post_report(engine, now);
      }
    }
    check_done(exec, now);
  }

  void on_completion(const SimEvent& event) {
    Execution& exec = execution(event.request);
    InvocationNode& node = exec.request.node(event.node);
    EngineState& engine = engines_.at(node.deployment);
    engine.complete(event.time, event.service_time, event.outcome);
    --exec.outstanding;
    auto& rec = result_.log.append(event.time, EventKind::completion);
    rec.request = exec.id;
    rec.node = node.id;
    rec.service = node.service;
    rec.deployment = node.deployment;
    rec.client = exec.client;
    rec.detail = event.outcome == Outcome::ok ? "ok" : "failed";
    post_report(engine, event.time);
    if (event.outcome == Outcome::failed) {
      node.failed = true;
      if (!exec.failed) {
        exec.failed = true;
        ++result_.totals.failures;
        auto& fail = result_.log.append(event.time, EventKind::request_failed);
        fail.request = exec.id;
        fail.node = node.id;
        fail.service = node.service;
        fail.client = exec.client;
      }
      if (scenario_.memoize) release_waiters(node.service, node.fingerprint, event.time);
      if (exec.outstanding == 0) retire(exec, event.time);
      return;
    }
    node.out = make_result(node.service, node.fingerprint, node.deployment, event.time);
    node.completed_at = event.time;
    if (scenario_.memoize) {
      memo_.store(node.service, node.fingerprint, *node.out);
      settle_waiters(node, event.time);
    }
    if (exec.failed) {
      // The request already failed elsewhere; this branch only drains.
      if (exec.outstanding == 0) retire(exec, event.time);
      return;
    }
    dispatch(exec, event.time);
  }

  void check_done(Execution& exec, double now) {
    if (exec.done || exec.failed) return;
    if (!exec.request.root().out.has_value()) return;
    exec.done = true;
    ++result_.totals.completed;
    MetricsRecord metric;
    metric.request = exec.id;
    metric.client = exec.client;
    metric.arrived = exec.arrived;
    metric.completion_time = now - exec.arrived;
    metric.inter_rack_hops = inter_rack_hops(exec);
    metric.result_value = exec.request.root().out->value;
    metric.node_timings = execution_trace(exec.request);
    result_.metrics.push_back(std::move(metric));
    auto& rec = result_.log.append(now, EventKind::request_done);
    rec.request = exec.id;
    rec.service = exec.request.root().service;
    rec.client = exec.client;
    rec.detail = EventLog::format_time(now - exec.arrived);
    retire(exec, now);
  }

  void retire(Execution& exec, double now) {
    --active_executions_;
    if (scenario_.arrival == ArrivalKind::closed && scheduled_arrivals_ < scenario_.requests) {
      // Zero think time: the client immediately issues its next request.
      const long long ordinal = scheduled_arrivals_++;
      SimEvent next = make_arrival(now, ordinal);
      next.client = exec.client;
      schedule(std::move(next));
    }
  }

  long long inter_rack_hops(const Execution& exec) const {
    long long hops = 0;
    for (const auto& node : exec.request.nodes()) {
      if (node.composite) continue;
      for (const auto& item : node.inputs) {
        if (item.kind != InputItem::child) continue;
        const InvocationNode& child = exec.request.node(item.child_id);
        if (child.composite) continue;
        const PathMetric metric = topology_.shortest_path(controller_.host_of(child.deployment),
                                                          controller_.host_of(node.deployment));
        if (metric.inter_rack) hops += metric.hop_count;
      }
    }
    return hops;
  }

  void post_report(const EngineState& engine, double now) {
    if (scenario_.mode == Mode::base) return;
    const EngineReport report = engine.health_report(
        scenario_.health_window, scenario_.threshold_for(engine.params()), now);
    if (controller_.on_engine_report(engine.service(), report)) {
      // Offenders accumulate until the controller's next cycle; one flow
      // table update per period keeps a freshly promoted deployment from
      // being re-judged on reports that predate its return.
      SimEvent flush;
      flush.kind = SimEvent::flush;
      const double period = scenario_.frequency;
      flush.time = (std::floor(now / period) + 1.0) * period;
      schedule(std::move(flush));
    }
  }

  void on_flush(const SimEvent& event) {
    if (!controller_.has_pending_trigger())
      throw InvariantViolation("trigger flush with nothing pending");
    const UpdateTrigger trigger = controller_.take_pending_trigger();
    ++result_.totals.triggers;
    std::size_t offenders = 0;
    for (const auto& group : trigger.offenders_by_service) offenders += group.offenders.size();
    auto& rec = result_.log.append(event.time, EventKind::trigger);
    rec.detail = "services=" + std::to_string(trigger.offenders_by_service.size()) +
                 ",offenders=" + std::to_string(offenders);
    controller_.apply_trigger(trigger, event.time);
  }

  void on_tick(const SimEvent& event) {
    if (controller_.promoter_tick(event.time).has_value()) ++result_.totals.promotions;
    SimEvent next;
    next.kind = SimEvent::tick;
    next.time = event.time + scenario_.frequency;
    schedule(std::move(next));
  }

  // The producer of a shared invocation finished; each waiter takes the
  // stored token verbatim and resumes.
  void settle_waiters(const InvocationNode& producer, double now) {
    auto it = inflight_.find({producer.service, producer.fingerprint});
    if (it == inflight_.end()) return;
    const std::vector<std::pair<long long, int>> waiters = std::move(it->second);
    inflight_.erase(it);
    for (const auto& [request_id, node_id] : waiters) {
      Execution& waiter = execution(request_id);
      if (waiter.failed) continue;
      InvocationNode& node = waiter.request.node(node_id);
      node.out = *producer.out;
      node.deployment = producer.out->deployment;
      node.completed_at = now;
      ++result_.totals.memo_hits;
      auto& rec = result_.log.append(now, EventKind::memo_hit);
      rec.request = waiter.id;
      rec.node = node_id;
      rec.service = node.service;
      rec.deployment = node.deployment;
      rec.client = waiter.client;
      dispatch(waiter, now);
    }
  }

  // The producer failed, so its waiters go back to the ready set and admit
  // for real on their next dispatch.
  void release_waiters(const std::string& service, const std::string& fingerprint, double now) {
    auto it = inflight_.find({service, fingerprint});
    if (it == inflight_.end()) return;
    const std::vector<std::pair<long long, int>> waiters = std::move(it->second);
    inflight_.erase(it);
    for (const auto& [request_id, node_id] : waiters) {
      Execution& waiter = execution(request_id);
      if (waiter.failed) continue;
      waiter.request.node(node_id).started = false;
      dispatch(waiter, now);
    }
  }

  Execution& execution(long long id) {
    auto it = index_of_.find(id);
    if (it == index_of_.end())
      throw InvariantViolation("event for unknown request " + std::to_string(id));
    return executions_[it->second];
  }

  using MemoKey = std::pair<std::string, std::string>;  // (service, fingerprint)

  Scenario scenario_;
  Topology topology_;
  RunResult result_;
  Controller controller_;
  RandomStream workload_rng_;
  RandomStream failure_rng_;
  std::map<std::string, EngineState> engines_;
  MemoTable memo_;
  // Keys with an admission in flight, each with the nodes waiting to share
  // the producer's result.
  std::map<MemoKey, std::vector<std::pair<long long, int>>> inflight_;
  std::vector<Execution> executions_;
  std::map<long long, std::size_t> index_of_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, LaterFirst> queue_;
  long long next_seq_ = 0;
  long long scheduled_arrivals_ = 0;
  long long pending_arrivals_ = 0;  // arrival events scheduled but not yet handled
  long long active_executions_ = 0;
};

}  // namespace

RunResult run(const Scenario& scenario, const Registry& registry) {
  scenario.validate();
  registry.validate();
  Simulation simulation(scenario, registry);
  RunResult result = simulation.take();
  result.totals.demotions = 0;
  for (const auto& record : result.log.records())
    if (record.kind == EventKind::demotion) ++result.totals.demotions;
  return result;
}

double deviation_percent(const std::vector<double>& values) {
  if (values.size() < 2)
    throw ValidationError("deviation needs at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (mean == 0.0) return 0.0;
  double accum = 0.0;
  for (double v : values) accum += (v - mean) * (v - mean);
  const double stddev = std::sqrt(accum / static_cast<double>(values.size() - 1));
  return stddev / mean * 100.0;
}

std::vector<double> completion_times(const std::vector<MetricsRecord>& metrics) {
  std::vector<double> out;
  out.reserve(metrics.size());
  for (const auto& m : metrics) out.push_back(m.completion_time);
  return out;
}

double mean_completion(const std::vector<MetricsRecord>& metrics) {
  if (metrics.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& m : metrics) sum += m.completion_time;
  return sum / static_cast<double>(metrics.size());
}

long long total_inter_rack_hops(const std::vector<MetricsRecord>& metrics) {
  long long hops = 0;
  for (const auto& m : metrics) hops += m.inter_rack_hops;
  return hops;
}

std::vector<CompareRow> compare_modes(const Scenario& scenario, const Registry& registry,
                                      const std::vector<long long>& request_counts) {
  std::vector<CompareRow> rows;
  for (long long count : request_counts) {
    for (Mode mode : {Mode::base, Mode::affinity, Mode::firm}) {
      Scenario variant = scenario;
      variant.requests = count;
      variant.mode = mode;
      const RunResult result = run(variant, registry);
      CompareRow row;
      row.requests = count;
      row.mode = mode;
      row.mean_completion = mean_completion(result.metrics);
      row.deviation_pct =
          result.metrics.size() >= 2 ? deviation_percent(completion_times(result.metrics)) : 0.0;
      row.inter_rack_hops = total_inter_rack_hops(result.metrics);
      row.completed = result.totals.completed;
      row.failures = result.totals.failures;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string metrics_csv(const std::vector<MetricsRecord>& metrics) {
  std::ostringstream out;
  out << "request,client,arrived,completion_time,inter_rack_hops,result\n";
  for (const auto& m : metrics)
    out << m.request << ',' << m.client << ',' << EventLog::format_time(m.arrived) << ','
        << EventLog::format_time(m.completion_time) << ',' << m.inter_rack_hops << ','
        << m.result_value << "\n";
  return out.str();
}

std::string trace_csv(const std::vector<MetricsRecord>& metrics) {
  std::ostringstream out;
  out << "request,node,service,deployment,started,completed\n";
  for (const auto& m : metrics)
    for (const auto& t : m.node_timings)
      out << m.request << ',' << t.node << ',' << t.service << ',' << t.deployment << ','
          << EventLog::format_time(t.started_at) << ',' << EventLog::format_time(t.completed_at)
          << "\n";
  return out.str();
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "requests,mode,mean_completion,deviation_pct,inter_rack_hops,completed,failures\n";
  for (const auto& row : rows)
    out << row.requests << ',' << to_string(row.mode) << ','
        << EventLog::format_time(row.mean_completion) << ','
        << EventLog::format_time(row.deviation_pct) << ',' << row.inter_rack_hops << ','
        << row.completed << ',' << row.failures << "\n";
  return out.str();
}

std::string summary_text(const Scenario& scenario, const RunResult& result) {
  std::ostringstream out;
  out << "mode " << to_string(result.mode) << ", seed " << result.seed << ", k " << scenario.k
      << "\n";
  out << "arrivals " << result.totals.arrivals << ", completed " << result.totals.completed
      << ", failures " << result.totals.failures << ", in flight at abort "
      << result.totals.in_flight_at_abort << "\n";
  out << "admissions " << result.totals.admissions << ", memo hits " << result.totals.memo_hits
      << ", triggers " << result.totals.triggers << ", demotions " << result.totals.demotions
      << ", promotions " << result.totals.promotions << "\n";
  if (!result.metrics.empty()) {
    out << "mean completion " << EventLog::format_time(mean_completion(result.metrics));
    if (result.metrics.size() >= 2)
      out << ", deviation " << EventLog::format_time(deviation_percent(completion_times(
                 result.metrics))) << "%";
    out << ", inter-rack hops " << total_inter_rack_hops(result.metrics) << "\n";
  }
  return out.str();
}

}  // namespace firm
