#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "firm/errors.hpp"

namespace firm {

struct EngineReport;  // engine.hpp

enum class DeploymentStatus { active, demoted, blacklisted };

const char* to_string(DeploymentStatus status);

// One running instance of a service implementation, addressable at a host.
struct Deployment {
  std::string alias;
  std::string address;  // dotted quad
  std::string variant;  // variant block the deployment was declared under, "" if none
  DeploymentStatus status = DeploymentStatus::active;

  // Last health report, used to re-rank deployments within an implementation.
  double reported_mean_time = 0.0;
  long long reported_in_flight = 0;
  bool has_report = false;

  bool operator==(const Deployment&) const = default;
};

// A typed sub-block of an implementation (an API flavour such as a protocol
// revision) with its key/value properties preserved verbatim.
struct ImplementationVariant {
  std::string name;
  std::map<std::string, std::string> properties;

  bool operator==(const ImplementationVariant&) const = default;
};

struct Implementation {
  std::string impl_name;
  std::vector<ImplementationVariant> variants;
  std::map<std::string, std::string> properties;
  // All deployments of this implementation in declaration order, regardless of
  // which variant block they appeared under (Deployment::variant records that).
  std::vector<Deployment> deployments;

  bool operator==(const Implementation&) const = default;
};

enum class ServiceKind { simple, composition_reference };

struct ServiceEntry {
  std::string name;
  ServiceKind kind = ServiceKind::simple;
  std::string description;
  std::map<std::string, std::string> properties;
  std::vector<Implementation> implementations;  // preference order, head preferred

  bool operator==(const ServiceEntry&) const = default;

  int total_deployments() const;
};

struct CompositionMember {
  std::string service;
  int order = 1;
  // true: the member waits for every member of strictly lower order.
  bool serialized = true;
  std::map<std::string, std::string> properties;

  bool operator==(const CompositionMember&) const = default;
};

struct CompositionDef {
  std::string name;
  std::string entry_point;
  std::string description;
  std::vector<CompositionMember> members;

  bool operator==(const CompositionDef&) const = default;
};

// Addressable endpoint produced by a registry lookup.
struct EndpointRef {
  std::string impl_name;
  std::string variant;
  std::string alias;
  std::string address;
  DeploymentStatus status = DeploymentStatus::active;

  bool operator==(const EndpointRef&) const = default;
};

// The service registry: simple services with their implementations and
// deployments, plus composition definitions.  Entry order is preserved;
// deployment order within an implementation is the live preference order.
class Registry {
 public:
  const std::vector<ServiceEntry>& services() const { return services_; }
  const std::vector<CompositionDef>& compositions() const { return compositions_; }
  std::vector<ServiceEntry>& services() { return services_; }

  int top_level_count() const;
  bool has_service(const std::string& name) const;
  bool has_composition(const std::string& name) const;
  const ServiceEntry& service(const std::string& name) const;
  const CompositionDef& composition(const std::string& name) const;

  void add_service(ServiceEntry entry);
  void add_composition(CompositionDef def);

  // Deployments of a service in preference order (implementation-major),
  // excluding blacklisted ones.
  std::vector<EndpointRef> lookup_endpoints(const std::string& service) const;

  // Total deployment count of a simple service, all statuses included.
  int total_deployments(const std::string& service) const;

  // Applies a health report: records the numbers on the deployment, demotes
  // or reactivates it, and stably re-ranks each implementation of the owning
  // service by (status, reported mean time, reported in-flight).  Blacklist
  // status is owned by the flow table and never changed here.
  void apply_report(const EngineReport& report);

  // Flow-table synchronisation hooks, addressed by deployment alias.
  void set_status(const std::string& alias, DeploymentStatus status);
  void move_to_back(const std::string& alias);

  // Structural checks that go beyond syntax: member references resolve and
  // composition definitions do not form reference cycles.
  void validate() const;

  // Canonical form of the dialect; parses back to an equal registry.
  std::string serialize() const;

  // One CSV record per deployment with its current preference index.
  std::string catalog_csv() const;

  bool operator==(const Registry&) const = default;

 private:
  Deployment* find_deployment(const std::string& alias, ServiceEntry** owner = nullptr,
                              Implementation** impl = nullptr);

  std::vector<ServiceEntry> services_;
  std::vector<CompositionDef> compositions_;
};

// Parses the registry dialect.  Throws ParseError with line/column on bad
// syntax, duplicate names, or structurally invalid entries.
Registry parse_registry(const std::string& text);

// Upper bound on alternative resolution paths for a composition: the minimum
// over member services of their total deployment count.  Members that resolve
// to nested compositions contribute that composition's own bound.
int alternative_path_bound(const Registry& registry, const std::string& composition);

}  // namespace firm
