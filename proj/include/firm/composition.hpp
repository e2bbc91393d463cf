#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "firm/errors.hpp"
#include "firm/registry.hpp"

namespace firm {

// Result of a completed invocation.  `value` is a pure function of the
// service name and the input fingerprint; `deployment` and `completed_at`
// are provenance only and excluded from equality-by-value comparisons.
struct ResultToken {
  std::string value;
  std::string fingerprint;
  std::string deployment;
  double completed_at = 0.0;

  bool operator==(const ResultToken&) const = default;
};

struct InputItem {
  enum Kind { literal, child };
  Kind kind = literal;
  std::string text;   // literal payload
  int child_id = -1;  // node id for nested requests

  bool operator==(const InputItem&) const = default;
};

// One invocation in a composition request.  Tree nodes come from the parser;
// member nodes are added when a service resolves to a composition definition.
struct InvocationNode {
  int id = 0;
  std::string service;
  std::vector<InputItem> inputs;
  int parent = -1;

  // Filled by linking.
  bool composite = false;  // resolves to a composition definition, no engine
  bool member = false;     // expanded from a composition member
  int order = 1;
  bool serialized = true;
  std::vector<int> depends_on;  // data and control dependencies, by node id

  // Execution state.
  bool started = false;
  bool failed = false;
  double started_at = 0.0;
  double completed_at = 0.0;
  std::string deployment;
  std::string fingerprint;
  std::optional<ResultToken> out;
};

// Arena of invocation nodes; node 0 is the root of the request.
class CompositionRequest {
 public:
  int add_node(InvocationNode node);

  InvocationNode& node(int id) { return nodes_.at(static_cast<std::size_t>(id)); }
  const InvocationNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<InvocationNode>& nodes() const { return nodes_; }
  std::vector<InvocationNode>& nodes() { return nodes_; }

  const InvocationNode& root() const { return nodes_.at(0); }

  bool linked() const { return linked_; }
  void mark_linked() { linked_ = true; }

 private:
  std::vector<InvocationNode> nodes_;
  bool linked_ = false;
};

// Parses the angle-bracket request syntax:
//   Request := '<' Name ',' Inputs '>'
//   Inputs  := '(' Item (',' Item)* ')' | Literal
//   Item    := Request | Literal
// Nodes are numbered in pre-order; throws ParseError on malformed input.
CompositionRequest parse_request(const std::string& text);

// Resolves every node's service against the registry, expands composition
// members into the arena (order/serialized become control dependencies), and
// verifies the dependency graph is acyclic.
void link_to_registry(CompositionRequest& request, const Registry& registry);

// Ids of nodes whose dependencies all carry results and which have not yet
// started, in ascending id order.
std::vector<int> ready_set(const CompositionRequest& request);

// Canonical fingerprint of a node's inputs: literals verbatim, nested
// requests by their result values, members of a composite by their result
// values.  Requires those results to be present.
std::string input_fingerprint(const CompositionRequest& request, int node);

// Builds the result token for a finished invocation.
ResultToken make_result(const std::string& service, const std::string& fingerprint,
                        const std::string& deployment, double completed_at);

// Memoized results keyed by (service, input fingerprint); lookups return the
// stored token verbatim, provenance included.
class MemoTable {
 public:
  std::optional<ResultToken> lookup(const std::string& service,
                                    const std::string& fingerprint) const;
  void store(const std::string& service, const std::string& fingerprint, ResultToken result);
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, ResultToken> entries_;
};

// Root result of a fully executed request; throws ValidationError naming the
// first incomplete node otherwise.
ResultToken consolidate(const CompositionRequest& request);

struct NodeTiming {
  int node = 0;
  std::string service;
  std::string deployment;
  double started_at = 0.0;
  double completed_at = 0.0;
};

// Per-node timing trace of a finished request, in node id order.
std::vector<NodeTiming> execution_trace(const CompositionRequest& request);

}  // namespace firm
