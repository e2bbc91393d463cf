#pragma once

#include <map>
#include <string>
#include <vector>

#include "firm/errors.hpp"

namespace firm {

enum class NodeTier { host, edge, aggregation, core };

const char* to_string(NodeTier tier);

struct TopologyNode {
  int id;
  NodeTier tier;
  int pod;    // -1 for core switches
  int index;  // position within its tier (and pod, where applicable)
};

struct TopologyLink {
  int a;
  int b;
};

struct PathMetric {
  int hop_count = 0;
  bool inter_rack = false;  // different edge switches
  bool inter_pod = false;

  bool operator==(const PathMetric&) const = default;
};

// Three-tier fat tree of arity k: k pods, each with k/2 edge and k/2
// aggregation switches, k/2 hosts per edge switch, and (k/2)^2 core switches.
// Host ids are dense in [0, k^3/4).
class Topology {
 public:
  static Topology fat_tree(int k);

  int arity() const { return k_; }
  int host_count() const { return k_ * k_ * k_ / 4; }
  int switch_count() const { return 5 * k_ * k_ / 4; }

  const std::vector<TopologyNode>& nodes() const { return nodes_; }
  const std::vector<TopologyLink>& links() const { return links_; }

  int host_pod(int host) const;
  // Node id of the edge switch the host hangs off.
  int host_edge(int host) const;

  // Closed-form shortest path between two hosts; hop counts are 0 (same
  // host), 2 (same edge switch), 4 (same pod), or 6 (across pods).
  PathMetric shortest_path(int host_a, int host_b) const;

  // Orders candidate hosts by total hop count to the anchor set; ties break
  // on (pod, host id).  Duplicates in `candidates` are preserved.
  std::vector<int> proximity_rank(const std::vector<int>& anchors,
                                  const std::vector<int>& candidates) const;

  // Node records followed by link records, machine-readable.
  std::string export_csv() const;

 private:
  explicit Topology(int k);

  void check_host(int host) const;

  int k_;
  std::vector<TopologyNode> nodes_;
  std::vector<TopologyLink> links_;
};

// One blacklisted deployment with the demotion timestamp.
struct BlacklistEntry {
  std::string service;
  std::string deployment;
  double demoted_at = 0.0;

  bool operator==(const BlacklistEntry&) const = default;
};

// Per-service active deployment lists plus the shared blacklist, in demotion
// order.  Every known deployment is in exactly one of the two at all times,
// and no active list ever empties.
class FlowTable {
 public:
  void add_service(const std::string& service, const std::vector<std::string>& deployments);

  bool has_service(const std::string& service) const;
  const std::vector<std::string>& active(const std::string& service) const;
  const std::vector<std::string>& service_order() const { return service_order_; }

  const std::vector<BlacklistEntry>& blacklist() const { return blacklist_; }

  bool is_active(const std::string& service, const std::string& deployment) const;
  bool is_blacklisted(const std::string& service, const std::string& deployment) const;

  // Moves each offender to the blacklist unless it is the service's last
  // active deployment, which is moved to the back of the active list instead.
  // Returns the aliases actually blacklisted.
  std::vector<std::string> demote(const std::string& service,
                                  const std::vector<std::string>& offenders, double now);

  // Removes the entry from the blacklist and re-appends it to the end of the
  // service's active list (lowest preference on re-entry).
  void promote(const std::string& service, const std::string& deployment);

 private:
  std::vector<std::string>& active_mutable(const std::string& service);

  std::vector<std::string> service_order_;
  std::map<std::string, std::vector<std::string>> active_;
  std::vector<BlacklistEntry> blacklist_;
};

}  // namespace firm
