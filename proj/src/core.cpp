#include "firm/core.hpp"

#include <algorithm>

namespace firm {

Mode parse_mode(const std::string& text) {
  if (text == "base") return Mode::base;
  if (text == "affinity") return Mode::affinity;
  if (text == "firm") return Mode::firm;
  throw ValidationError("unknown mode '" + text + "' (expected base, affinity, or firm)");
}

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::base: return "base";
    case Mode::affinity: return "affinity";
    case Mode::firm: return "firm";
  }
  return "unknown";
}

std::vector<EndpointBinding> find_endpoints(const Registry& registry,
                                            CompositionRequest& request) {
  link_to_registry(request, registry);
  // Topological order over the dependency graph, smallest node id first, so
  // bindings come out in dependency-respecting order.
  const int n = static_cast<int>(request.nodes().size());
  std::vector<int> pending(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<int>> dependants(static_cast<std::size_t>(n));
  for (const auto& node : request.nodes()) {
    pending[static_cast<std::size_t>(node.id)] = static_cast<int>(node.depends_on.size());
    for (int dep : node.depends_on) dependants[static_cast<std::size_t>(dep)].push_back(node.id);
  }
  std::vector<int> frontier;
  for (int id = n - 1; id >= 0; --id)
    if (pending[static_cast<std::size_t>(id)] == 0) frontier.push_back(id);
  std::vector<EndpointBinding> bindings;
  while (!frontier.empty()) {
    std::sort(frontier.rbegin(), frontier.rend());
    const int id = frontier.back();
    frontier.pop_back();
    const InvocationNode& node = request.node(id);
    if (!node.composite) {
      EndpointBinding binding;
      binding.node = node.id;
      binding.service = node.service;
      binding.order = node.order;
      binding.serialized = node.serialized;
      binding.depends_on = node.depends_on;
      bindings.push_back(std::move(binding));
    }
    for (int dependant : dependants[static_cast<std::size_t>(id)])
      if (--pending[static_cast<std::size_t>(dependant)] == 0) frontier.push_back(dependant);
  }
  return bindings;
}

std::optional<std::string> AffinityTable::lookup(const std::string& client,
                                                 const std::string& service) const {
  auto it = entries_.find({client, service});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void AffinityTable::record(const std::string& client, const std::string& service,
                           const std::string& deployment) {
  entries_[{client, service}] = deployment;
}

int AffinityTable::evict_deployment(const std::string& deployment) {
  int evicted = 0;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second == deployment) {
      it = entries_.erase(it);
      ++evicted;
    } else {
      ++it;
    }
  }
  return evicted;
}

PromoterState::PromoterState(double frequency, std::uint64_t seed)
    : frequency_(frequency), rng_(seed) {
  if (frequency_ <= 0) throw ValidationError("promoter frequency must be positive");
}

std::optional<Promotion> PromoterState::tick(const std::vector<BlacklistEntry>& blacklist) {
  ++ticks_;
  flag_ = false;
  flag_ = rng_.coin();  // the coin decides whether this iteration promotes
  if (!flag_ || blacklist.empty()) return std::nullopt;
  const auto& entry = blacklist[rng_.uniform_below(blacklist.size())];
  return Promotion{entry.service, entry.deployment};
}

Controller::Controller(Registry registry, const Topology* topology, Mode mode, EventLog* log,
                       double promoter_frequency, std::uint64_t promoter_seed)
    : registry_(std::move(registry)),
      topology_(topology),
      mode_(mode),
      log_(log),
      promoter_(promoter_frequency, promoter_seed) {
  // Flow tables mirror the registry: every deployment of every simple
  // service starts active, in preference order.
  for (const auto& entry : registry_.services()) {
    if (entry.kind != ServiceKind::simple) continue;
    std::vector<std::string> deployments;
    for (const auto& impl : entry.implementations)
      for (const auto& dep : impl.deployments) deployments.push_back(dep.alias);
    if (!deployments.empty()) flow_table_.add_service(entry.name, deployments);
  }
}

void Controller::register_deployment(const std::string& service, const std::string& alias,
                                     int host) {
  host_of_[alias] = host;
  service_of_[alias] = service;
}

int Controller::host_of(const std::string& alias) const {
  auto it = host_of_.find(alias);
  if (it == host_of_.end()) throw ValidationError("no engine registered for '" + alias + "'");
  return it->second;
}

std::vector<std::string> Controller::active_candidates(const std::string& service) const {
  // First implementation (in current registry preference order) with at
  // least one flow-active deployment supplies the candidate set.
  for (const auto& impl : registry_.service(service).implementations) {
    std::vector<std::string> candidates;
    for (const auto& dep : impl.deployments)
      if (flow_table_.is_active(service, dep.alias)) candidates.push_back(dep.alias);
    if (!candidates.empty()) return candidates;
  }
  throw InvariantViolation("service '" + service + "' has no active deployment");
}

std::vector<std::string> Controller::leading_tie_group(
    const std::string& service, const std::vector<std::string>& candidates) const {
  // Candidates arrive in registry preference order; keep the prefix whose
  // health records match the front-runner's exactly.  Deployments with
  // indistinguishable records form one group and proximity splits it, while
  // any measured difference, however small, keeps preference order in charge.
  const auto key = [&](const std::string& alias) {
    for (const auto& impl : registry_.service(service).implementations)
      for (const auto& dep : impl.deployments)
        if (dep.alias == alias)
          return std::tuple<int, double, long long>(static_cast<int>(dep.status),
                                                    dep.reported_mean_time,
                                                    dep.reported_in_flight);
    throw InvariantViolation("candidate '" + alias + "' missing from registry");
  };
  std::vector<std::string> tied;
  const auto front_key = key(candidates.front());
  for (const auto& alias : candidates) {
    if (key(alias) != front_key) break;
    tied.push_back(alias);
  }
  return tied;
}

ResolvedDeployment Controller::resolve_deployment(const std::string& service,
                                                  const std::string& client,
                                                  const std::vector<int>& anchors) {
  if (mode_ == Mode::base) {
    const auto& active = flow_table_.active(service);
    if (active.empty()) throw InvariantViolation("service '" + service + "' drained");
    const auto& alias = active[static_cast<std::size_t>(round_robin_[service]++ %
                                                        static_cast<long long>(active.size()))];
    return ResolvedDeployment{alias, host_of(alias)};
  }

  if (auto sticky = affinity_.lookup(client, service)) {
    if (!flow_table_.is_active(service, *sticky))
      throw InvariantViolation("affinity entry for '" + *sticky + "' survived demotion");
    return ResolvedDeployment{*sticky, host_of(*sticky)};
  }

  std::vector<std::string> candidates = active_candidates(service);
  std::string chosen;
  if (mode_ == Mode::firm && topology_ != nullptr) {
    // Registry preference decides; proximity only splits the leading group
    // of deployments whose health records are indistinguishable.
    const std::vector<std::string> tied = leading_tie_group(service, candidates);
    std::vector<int> hosts;
    hosts.reserve(tied.size());
    for (const auto& alias : tied) hosts.push_back(host_of(alias));
    const std::vector<int> ranked = topology_->proximity_rank(anchors, hosts);
    for (std::size_t i = 0; i < hosts.size(); ++i)
      if (hosts[i] == ranked.front()) {
        chosen = tied[i];
        break;
      }
  } else {
    chosen = candidates.front();
  }
  affinity_.record(client, service, chosen);
  return ResolvedDeployment{chosen, host_of(chosen)};
}

bool Controller::on_engine_report(const std::string& service, const EngineReport& report) {
  if (mode_ == Mode::base) return false;
  // Every report lands in the registry, healthy or not; an engine that is
  // always over threshold must not keep an untouched (pristine) record.
  registry_.apply_report(report);
  if (!report.over_threshold) return false;
  if (mode_ == Mode::affinity) {
    // No flow-table demotion in affinity mode; the re-ranked registry alone
    // steers new clients away.
    return false;
  }
  const bool opened = !pending_.has_value();
  if (opened) pending_.emplace();
  auto& groups = pending_->offenders_by_service;
  auto group = std::find_if(groups.begin(), groups.end(),
                            [&](const ServiceOffenders& g) { return g.service == service; });
  if (group == groups.end()) {
    groups.push_back(ServiceOffenders{service, {}, {}});
    group = groups.end() - 1;
  }
  if (std::find(group->offenders.begin(), group->offenders.end(), report.deployment) ==
      group->offenders.end()) {
    group->offenders.push_back(report.deployment);
    group->reports.push_back(report);
  }
  return opened;
}

UpdateTrigger Controller::take_pending_trigger() {
  if (!pending_.has_value()) throw InvariantViolation("no pending update trigger");
  UpdateTrigger trigger = std::move(*pending_);
  pending_.reset();
  return trigger;
}

void Controller::apply_trigger(const UpdateTrigger& trigger, double now) {
  for (const auto& group : trigger.offenders_by_service) {
    if (!flow_table_.has_service(group.service)) {
      if (log_) {
        auto& rec = log_->append(now, EventKind::trigger);
        rec.service = group.service;
        rec.detail = "rejected:unknown-service";
      }
      continue;
    }
    for (const auto& report : group.reports) registry_.apply_report(report);
    const std::vector<std::string> blacklisted =
        flow_table_.demote(group.service, group.offenders, now);
    for (const auto& alias : blacklisted) {
      registry_.set_status(alias, DeploymentStatus::blacklisted);
      if (log_) {
        auto& rec = log_->append(now, EventKind::demotion);
        rec.service = group.service;
        rec.deployment = alias;
      }
      const int evicted = affinity_.evict_deployment(alias);
      if (evicted > 0 && log_) {
        auto& rec = log_->append(now, EventKind::affinity_evict);
        rec.service = group.service;
        rec.deployment = alias;
        rec.detail = std::to_string(evicted);
      }
    }
  }
}

std::optional<Promotion> Controller::promoter_tick(double now) {
  std::optional<Promotion> promotion = promoter_.tick(flow_table_.blacklist());
  if (log_) {
    auto& rec = log_->append(now, EventKind::tick);
    rec.detail = promoter_.flag() ? "flag" : "idle";
  }
  if (!promotion.has_value()) return promotion;
  flow_table_.promote(promotion->service, promotion->deployment);
  // Keep the registry in step: eligible again, but at lowest preference and
  // still marked demoted until a clean health report clears it.  Statuses
  // are otherwise report-owned; promotion only lifts the blacklist.
  registry_.set_status(promotion->deployment, DeploymentStatus::demoted);
  registry_.move_to_back(promotion->deployment);
  if (log_) {
    auto& rec = log_->append(now, EventKind::promotion);
    rec.service = promotion->service;
    rec.deployment = promotion->deployment;
  }
  return promotion;
}

}  // namespace firm
