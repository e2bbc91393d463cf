#pragma once

// Shared helpers for the test suites: fixture loading, small registry
// builders, and independent oracles (BFS over the exported graph, brute-force
// proximity ranking) used to cross-check the closed-form implementations.

#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "firm/registry.hpp"
#include "firm/topology.hpp"

namespace support {

inline std::string read_data_file(const std::string& name) {
  const std::string path = std::string(FIRM_DATA_DIR) + "/" + name;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing test fixture: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Registry with one implementation per service and the given deployment
// counts; aliases are "<service>_d<i>" with synthetic addresses.
inline firm::Registry make_registry(
    const std::vector<std::pair<std::string, int>>& services) {
  firm::Registry registry;
  int octet = 1;
  for (const auto& [name, count] : services) {
    firm::ServiceEntry entry;
    entry.name = name;
    firm::Implementation impl;
    impl.impl_name = "main";
    for (int i = 0; i < count; ++i) {
      firm::Deployment dep;
      dep.alias = name + "_d" + std::to_string(i);
      dep.address = "10.1." + std::to_string(octet / 200) + "." + std::to_string(octet % 200);
      ++octet;
      impl.deployments.push_back(dep);
    }
    entry.implementations.push_back(std::move(impl));
    registry.add_service(std::move(entry));
  }
  return registry;
}

inline firm::CompositionMember member(const std::string& service, int order,
                                      bool serialized = true) {
  firm::CompositionMember m;
  m.service = service;
  m.order = order;
  m.serialized = serialized;
  return m;
}

inline firm::CompositionDef make_composition(const std::string& name,
                                             std::vector<firm::CompositionMember> members,
                                             const std::string& entry_point = "10.9.0.1") {
  firm::CompositionDef def;
  def.name = name;
  def.entry_point = entry_point;
  def.members = std::move(members);
  return def;
}

// Breadth-first hop count over the exported node/link lists; knows nothing
// about the fat-tree construction it checks.
inline int bfs_hops(const firm::Topology& topo, int from, int to) {
  std::map<int, std::vector<int>> adjacency;
  for (const auto& link : topo.links()) {
    adjacency[link.a].push_back(link.b);
    adjacency[link.b].push_back(link.a);
  }
  std::map<int, int> dist;
  dist[from] = 0;
  std::queue<int> frontier;
  frontier.push(from);
  while (!frontier.empty()) {
    int node = frontier.front();
    frontier.pop();
    if (node == to) return dist[node];
    for (int next : adjacency[node])
      if (!dist.count(next)) {
        dist[next] = dist[node] + 1;
        frontier.push(next);
      }
  }
  return -1;  // disconnected
}

}  // namespace support
