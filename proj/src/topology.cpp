#include "firm/topology.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace firm {

const char* to_string(NodeTier tier) {
  switch (tier) {
    case NodeTier::host: return "host";
    case NodeTier::edge: return "edge";
    case NodeTier::aggregation: return "aggregation";
    case NodeTier::core: return "core";
  }
  return "unknown";
}

Topology::Topology(int k) : k_(k) {}

Topology Topology::fat_tree(int k) {
  if (k < 2 || k % 2 != 0) throw ValidationError("fat-tree arity must be even and at least 2");
  Topology topo(k);
  const int half = k / 2;
  const int hosts = topo.host_count();
  const int edge_base = hosts;
  const int agg_base = edge_base + k * half;
  const int core_base = agg_base + k * half;

  // Hosts first so host ids are dense, then edge, aggregation, core.
  for (int h = 0; h < hosts; ++h)
    topo.nodes_.push_back(TopologyNode{h, NodeTier::host, h / (half * half), h});
  for (int pod = 0; pod < k; ++pod)
    for (int e = 0; e < half; ++e)
      topo.nodes_.push_back(TopologyNode{edge_base + pod * half + e, NodeTier::edge, pod, e});
  for (int pod = 0; pod < k; ++pod)
    for (int a = 0; a < half; ++a)
      topo.nodes_.push_back(
          TopologyNode{agg_base + pod * half + a, NodeTier::aggregation, pod, a});
  for (int c = 0; c < half * half; ++c)
    topo.nodes_.push_back(TopologyNode{core_base + c, NodeTier::core, -1, c});

  // Host to edge uplinks: k/2 hosts per edge switch.
  for (int h = 0; h < hosts; ++h) topo.links_.push_back(TopologyLink{h, topo.host_edge(h)});
  // Edge to aggregation: full bipartite mesh within the pod.
  for (int pod = 0; pod < k; ++pod)
    for (int e = 0; e < half; ++e)
      for (int a = 0; a < half; ++a)
        topo.links_.push_back(
            TopologyLink{edge_base + pod * half + e, agg_base + pod * half + a});
  // Aggregation to core: aggregation switch a of every pod reaches core
  // group a (cores a*k/2 .. a*k/2 + k/2 - 1).
  for (int pod = 0; pod < k; ++pod)
    for (int a = 0; a < half; ++a)
      for (int c = 0; c < half; ++c)
        topo.links_.push_back(
            TopologyLink{agg_base + pod * half + a, core_base + a * half + c});
  return topo;
}

void Topology::check_host(int host) const {
  if (host < 0 || host >= host_count())
    throw ValidationError("host " + std::to_string(host) + " is outside the topology");
}

int Topology::host_pod(int host) const {
  check_host(host);
  const int half = k_ / 2;
  return host / (half * half);
}

int Topology::host_edge(int host) const {
  check_host(host);
  const int half = k_ / 2;
  return host_count() + host / half;
}

PathMetric Topology::shortest_path(int host_a, int host_b) const {
  check_host(host_a);
  check_host(host_b);
  PathMetric metric;
  if (host_a == host_b) return metric;
  if (host_edge(host_a) == host_edge(host_b)) {
    metric.hop_count = 2;  // up to the shared edge switch and back down
    return metric;
  }
  metric.inter_rack = true;
  if (host_pod(host_a) == host_pod(host_b)) {
    metric.hop_count = 4;  // via an aggregation switch of the pod
    return metric;
  }
  metric.inter_pod = true;
  metric.hop_count = 6;  // edge, aggregation, core and down again
  return metric;
}

std::vector<int> Topology::proximity_rank(const std::vector<int>& anchors,
                                          const std::vector<int>& candidates) const {
  for (int a : anchors) check_host(a);
  std::vector<long long> cost(candidates.size(), 0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    check_host(candidates[i]);
    for (int a : anchors) cost[i] += shortest_path(candidates[i], a).hop_count;
  }
  std::vector<std::size_t> index(candidates.size());
  std::iota(index.begin(), index.end(), 0);
  std::stable_sort(index.begin(), index.end(), [&](std::size_t x, std::size_t y) {
    if (cost[x] != cost[y]) return cost[x] < cost[y];
    if (host_pod(candidates[x]) != host_pod(candidates[y]))
      return host_pod(candidates[x]) < host_pod(candidates[y]);
    return candidates[x] < candidates[y];
  });
  std::vector<int> out;
  out.reserve(candidates.size());
  for (std::size_t i : index) out.push_back(candidates[i]);
  return out;
}

std::string Topology::export_csv() const {
  std::ostringstream out;
  out << "record,id,tier,pod,index\n";
  for (const auto& node : nodes_)
    out << "node," << node.id << ',' << to_string(node.tier) << ',' << node.pod << ','
        << node.index << "\n";
  for (const auto& link : links_) out << "link," << link.a << ',' << link.b << ",,\n";
  return out.str();
}

void FlowTable::add_service(const std::string& service,
                            const std::vector<std::string>& deployments) {
  if (has_service(service)) throw ValidationError("flow table already tracks '" + service + "'");
  if (deployments.empty())
    throw ValidationError("flow table entry for '" + service + "' needs deployments");
  service_order_.push_back(service);
  active_[service] = deployments;
}

bool FlowTable::has_service(const std::string& service) const {
  return active_.count(service) != 0;
}

const std::vector<std::string>& FlowTable::active(const std::string& service) const {
  auto it = active_.find(service);
  if (it == active_.end()) throw ValidationError("flow table does not track '" + service + "'");
  return it->second;
}

std::vector<std::string>& FlowTable::active_mutable(const std::string& service) {
  auto it = active_.find(service);
  if (it == active_.end()) throw ValidationError("flow table does not track '" + service + "'");
  return it->second;
}

bool FlowTable::is_active(const std::string& service, const std::string& deployment) const {
  const auto& list = active(service);
  return std::find(list.begin(), list.end(), deployment) != list.end();
}

bool FlowTable::is_blacklisted(const std::string& service,
                               const std::string& deployment) const {
  for (const auto& entry : blacklist_)
    if (entry.service == service && entry.deployment == deployment) return true;
  return false;
}

std::vector<std::string> FlowTable::demote(const std::string& service,
                                           const std::vector<std::string>& offenders,
                                           double now) {
  auto& list = active_mutable(service);
  std::vector<std::string> blacklisted;
  for (const auto& offender : offenders) {
    auto it = std::find(list.begin(), list.end(), offender);
    if (it == list.end()) {
      if (is_blacklisted(service, offender)) continue;  // repeated report, already out
      throw ValidationError("offender '" + offender + "' is not a deployment of '" + service +
                            "'");
    }
    if (list.size() == 1) {
      // Liveness floor: the last active deployment is never blacklisted, only
      // pushed to the lowest preference slot (a no-op for a single entry).
      std::rotate(it, it + 1, list.end());
      continue;
    }
    const std::string alias = offender;  // `offender` may alias the erased slot
    list.erase(it);
    blacklist_.push_back(BlacklistEntry{service, alias, now});
    blacklisted.push_back(alias);
  }
  return blacklisted;
}

void FlowTable::promote(const std::string& service, const std::string& deployment) {
  auto it = std::find_if(blacklist_.begin(), blacklist_.end(), [&](const BlacklistEntry& e) {
    return e.service == service && e.deployment == deployment;
  });
  if (it == blacklist_.end())
    throw ValidationError("deployment '" + deployment + "' of '" + service +
                          "' is not blacklisted");
  // Copy before erasing: the caller's references may alias the entry itself.
  const std::string owner = service;
  const std::string alias = deployment;
  blacklist_.erase(it);
  active_mutable(owner).push_back(alias);
}

}  // namespace firm
