#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "firm/composition.hpp"
#include "firm/engine.hpp"
#include "firm/event_log.hpp"
#include "firm/registry.hpp"
#include "firm/rng.hpp"
#include "firm/topology.hpp"

namespace firm {

// Orchestration policy.  `base` resolves round-robin with no affinity and no
// health handling; `affinity` adds sticky clients and registry re-ranking;
// `firm` adds blacklisting, the promoter, and proximity-aware placement.
enum class Mode { base, affinity, firm };

Mode parse_mode(const std::string& text);
const char* to_string(Mode mode);

// One engine-backed invocation a request needs, in dependency-respecting
// order; the deployment is chosen later, at assignment time.
struct EndpointBinding {
  int node = 0;
  std::string service;
  int order = 1;
  bool serialized = true;
  std::vector<int> depends_on;
};

// Links the request if needed and returns one binding per engine-backed node
// (composites consolidate locally and get no binding).
std::vector<EndpointBinding> find_endpoints(const Registry& registry,
                                            CompositionRequest& request);

// Sticky client-to-deployment assignments per service.
class AffinityTable {
 public:
  std::optional<std::string> lookup(const std::string& client,
                                    const std::string& service) const;
  void record(const std::string& client, const std::string& service,
              const std::string& deployment);
  // Drops every entry bound to the deployment; returns how many were dropped.
  int evict_deployment(const std::string& deployment);
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, std::string> entries_;
};

struct Promotion {
  std::string service;
  std::string deployment;
};

// Periodic stochastic promoter: each tick resets its flag, flips a fair
// coin, and on success picks a uniformly random blacklist entry to promote.
class PromoterState {
 public:
  PromoterState(double frequency, std::uint64_t seed);

  double frequency() const { return frequency_; }
  bool flag() const { return flag_; }
  long long ticks() const { return ticks_; }

  std::optional<Promotion> tick(const std::vector<BlacklistEntry>& blacklist);

 private:
  double frequency_;
  bool flag_ = false;
  long long ticks_ = 0;
  RandomStream rng_;
};

// A batch of over-threshold reports flushed at one instant, grouped by
// service.
struct ServiceOffenders {
  std::string service;
  std::vector<std::string> offenders;
  std::vector<EngineReport> reports;
};

struct UpdateTrigger {
  double opened_at = 0.0;
  std::vector<ServiceOffenders> offenders_by_service;
};

struct ResolvedDeployment {
  std::string alias;
  int host = -1;
};

// The orchestration controller: owns the live registry, the flow table, the
// affinity table, and the promoter, and makes every deployment decision.
class Controller {
 public:
  Controller(Registry registry, const Topology* topology, Mode mode, EventLog* log,
             double promoter_frequency, std::uint64_t promoter_seed);

  // Startup registration: deployment alias, owning service, and its host.
  // Flow tables are seeded from the registry's preference order.
  void register_deployment(const std::string& service, const std::string& alias, int host);

  const Registry& registry() const { return registry_; }
  Registry& registry() { return registry_; }
  const FlowTable& flow_table() const { return flow_table_; }
  const AffinityTable& affinity() const { return affinity_; }
  PromoterState& promoter() { return promoter_; }
  Mode mode() const { return mode_; }
  int host_of(const std::string& alias) const;

  // Picks a deployment for the service.  `anchors` are the hosts already
  // serving this request (proximity placement, firm mode only).
  ResolvedDeployment resolve_deployment(const std::string& service, const std::string& client,
                                        const std::vector<int>& anchors);

  // Health intake.  Every report re-ranks the registry; an over-threshold
  // report additionally joins the pending trigger batch.  Returns true when
  // this report opened a new batch (caller schedules the flush).
  bool on_engine_report(const std::string& service, const EngineReport& report);

  bool has_pending_trigger() const { return pending_.has_value(); }
  UpdateTrigger take_pending_trigger();

  // Flushes one trigger: demotes offenders in the flow table, re-ranks the
  // registry, and evicts affinity entries of blacklisted deployments.  A
  // batch naming an unknown service is rejected and logged; the rest of the
  // batch still applies.
  void apply_trigger(const UpdateTrigger& trigger, double now);

  // One promoter iteration at `now`; applies and logs the promotion, if any.
  std::optional<Promotion> promoter_tick(double now);

 private:
  std::vector<std::string> active_candidates(const std::string& service) const;
  std::vector<std::string> leading_tie_group(const std::string& service,
                                             const std::vector<std::string>& candidates) const;

  Registry registry_;
  const Topology* topology_;
  Mode mode_;
  EventLog* log_;
  FlowTable flow_table_;
  AffinityTable affinity_;
  PromoterState promoter_;
  std::map<std::string, int> host_of_;
  std::map<std::string, std::string> service_of_;
  std::map<std::string, long long> round_robin_;
  std::optional<UpdateTrigger> pending_;
};

}  // namespace firm
