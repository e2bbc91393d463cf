#include "firm/composition.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <set>

namespace firm {

int CompositionRequest::add_node(InvocationNode node) {
  node.id = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(node));
  return nodes_.back().id;
}

namespace {

// Cursor over the request text that tracks line/column for error reporting.
class RequestCursor {
 public:
  explicit RequestCursor(const std::string& text) : text_(text) {}

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      advance();
  }

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void expect(char c) {
    if (peek() != c)
      throw ParseError(std::string("expected '") + c + "'", line_, column_);
    advance();
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, column_); }

  // Reads a run of characters up to any delimiter and trims it.
  std::string take_atom(const char* what) {
    skip_space();
    std::string out;
    while (pos_ < text_.size() && !is_delim(text_[pos_])) {
      out += text_[pos_];
      advance();
    }
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
    if (out.empty()) fail(std::string("expected ") + what);
    return out;
  }

 private:
  static bool is_delim(char c) {
    return c == '<' || c == '>' || c == '(' || c == ')' || c == ',';
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

int parse_request_node(RequestCursor& cursor, CompositionRequest& request, int parent) {
  cursor.skip_space();
  cursor.expect('<');
  InvocationNode node;
  node.service = cursor.take_atom("service name");
  node.parent = parent;
  const int id = request.add_node(std::move(node));
  cursor.skip_space();
  cursor.expect(',');
  cursor.skip_space();
  if (cursor.peek() == '(') {
    cursor.advance();
    while (true) {
      cursor.skip_space();
      if (cursor.peek() == ')') cursor.fail("expected input item");
      InputItem item;
      if (cursor.peek() == '<') {
        item.kind = InputItem::child;
        item.child_id = parse_request_node(cursor, request, id);
      } else {
        item.kind = InputItem::literal;
        item.text = cursor.take_atom("input literal");
      }
      request.node(id).inputs.push_back(std::move(item));
      cursor.skip_space();
      if (cursor.peek() == ',') {
        cursor.advance();
        continue;
      }
      cursor.expect(')');
      break;
    }
  } else {
    InputItem item;
    item.kind = InputItem::literal;
    item.text = cursor.take_atom("input literal");
    request.node(id).inputs.push_back(std::move(item));
  }
  cursor.skip_space();
  cursor.expect('>');
  return id;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Expands one composite node's members into the arena.  `expanding` guards
// against composition definitions that reference themselves.
void expand_members(CompositionRequest& request, const Registry& registry, int composite_id,
                    std::set<std::string>* expanding);

void resolve_node(CompositionRequest& request, const Registry& registry, int id,
                  std::set<std::string>* expanding) {
  const std::string service = request.node(id).service;
  if (registry.has_composition(service)) {
    request.node(id).composite = true;
    expand_members(request, registry, id, expanding);
  } else if (!registry.has_service(service)) {
    throw ValidationError("request names unknown service '" + service + "'");
  }
}

void expand_members(CompositionRequest& request, const Registry& registry, int composite_id,
                    std::set<std::string>* expanding) {
  const std::string name = request.node(composite_id).service;
  if (expanding->count(name))
    throw ValidationError("composition reference cycle through '" + name + "'");
  expanding->insert(name);
  const CompositionDef& def = registry.composition(name);

  // Members inherit the composite's literal inputs; nested requests stay
  // attached to the composite itself.
  std::vector<InputItem> literals;
  for (const auto& item : request.node(composite_id).inputs)
    if (item.kind == InputItem::literal) literals.push_back(item);

  std::vector<int> member_ids;
  for (const auto& member : def.members) {
    InvocationNode node;
    node.service = member.service;
    node.inputs = literals;
    node.parent = composite_id;
    node.member = true;
    node.order = member.order;
    node.serialized = member.serialized;
    member_ids.push_back(request.add_node(std::move(node)));
  }
  for (std::size_t i = 0; i < member_ids.size(); ++i) {
    const int member_id = member_ids[i];
    // A serialized member waits for every member of strictly lower order.
    if (def.members[i].serialized)
      for (std::size_t j = 0; j < member_ids.size(); ++j)
        if (def.members[j].order < def.members[i].order)
          request.node(member_id).depends_on.push_back(member_ids[j]);
    // The composite consolidates once all members are done.
    request.node(composite_id).depends_on.push_back(member_id);
    resolve_node(request, registry, member_id, expanding);
  }
  expanding->erase(name);
}

}  // namespace

CompositionRequest parse_request(const std::string& text) {
  RequestCursor cursor(text);
  CompositionRequest request;
  parse_request_node(cursor, request, -1);
  cursor.skip_space();
  if (!cursor.done()) cursor.fail("trailing content after request");
  return request;
}

void link_to_registry(CompositionRequest& request, const Registry& registry) {
  if (request.linked()) return;
  const int tree_nodes = static_cast<int>(request.nodes().size());
  // Data dependencies: a node consumes the results of its nested requests.
  for (int id = 0; id < tree_nodes; ++id)
    for (const auto& item : request.node(id).inputs)
      if (item.kind == InputItem::child) request.node(id).depends_on.push_back(item.child_id);
  std::set<std::string> expanding;
  for (int id = 0; id < tree_nodes; ++id) resolve_node(request, registry, id, &expanding);

  // Kahn's check: the dependency graph must drain completely.
  const int n = static_cast<int>(request.nodes().size());
  std::vector<int> pending(static_cast<std::size_t>(n), 0);
  for (const auto& node : request.nodes())
    pending[static_cast<std::size_t>(node.id)] = static_cast<int>(node.depends_on.size());
  std::vector<std::vector<int>> dependants(static_cast<std::size_t>(n));
  for (const auto& node : request.nodes())
    for (int dep : node.depends_on) dependants[static_cast<std::size_t>(dep)].push_back(node.id);
  std::vector<int> queue;
  for (int id = 0; id < n; ++id)
    if (pending[static_cast<std::size_t>(id)] == 0) queue.push_back(id);
  int drained = 0;
  while (!queue.empty()) {
    int id = queue.back();
    queue.pop_back();
    ++drained;
    for (int dependant : dependants[static_cast<std::size_t>(id)])
      if (--pending[static_cast<std::size_t>(dependant)] == 0) queue.push_back(dependant);
  }
  if (drained != n) throw ValidationError("request dependency graph has a cycle");
  request.mark_linked();
}

std::vector<int> ready_set(const CompositionRequest& request) {
  std::vector<int> ready;
  for (const auto& node : request.nodes()) {
    if (node.started || node.failed) continue;
    bool ok = true;
    for (int dep : node.depends_on)
      if (!request.node(dep).out.has_value()) {
        ok = false;
        break;
      }
    if (ok) ready.push_back(node.id);
  }
  return ready;
}

std::string input_fingerprint(const CompositionRequest& request, int id) {
  const InvocationNode& node = request.node(id);
  std::string out = node.service;
  out += '(';
  bool first = true;
  auto sep = [&] {
    if (!first) out += ',';
    first = false;
  };
  for (const auto& item : node.inputs) {
    sep();
    if (item.kind == InputItem::literal) {
      out += "l:";
      out += item.text;
    } else {
      const auto& child = request.node(item.child_id).out;
      if (!child.has_value())
        throw ValidationError("fingerprint requested before inputs completed");
      out += "r:";
      out += child->value;
    }
  }
  if (node.composite) {
    // A composite's result consolidates its members' results as well.
    for (const auto& other : request.nodes())
      if (other.member && other.parent == id) {
        if (!other.out.has_value())
          throw ValidationError("fingerprint requested before members completed");
        sep();
        out += "r:";
        out += other.out->value;
      }
  }
  out += ')';
  return out;
}

ResultToken make_result(const std::string& service, const std::string& fingerprint,
                        const std::string& deployment, double completed_at) {
  ResultToken token;
  token.value = "t" + fnv1a_hex(service + "|" + fingerprint);
  token.fingerprint = fingerprint;
  token.deployment = deployment;
  token.completed_at = completed_at;
  return token;
}

std::optional<ResultToken> MemoTable::lookup(const std::string& service,
                                             const std::string& fingerprint) const {
  auto it = entries_.find({service, fingerprint});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void MemoTable::store(const std::string& service, const std::string& fingerprint,
                      ResultToken result) {
  entries_.insert({{service, fingerprint}, std::move(result)});
}

ResultToken consolidate(const CompositionRequest& request) {
  for (const auto& node : request.nodes())
    if (!node.out.has_value())
      throw ValidationError("incomplete composition: node " + std::to_string(node.id) + " ('" +
                            node.service + "') has no result");
  return *request.root().out;
}

std::vector<NodeTiming> execution_trace(const CompositionRequest& request) {
  std::vector<NodeTiming> trace;
  trace.reserve(request.nodes().size());
  for (const auto& node : request.nodes())
    trace.push_back(NodeTiming{node.id, node.service, node.deployment, node.started_at,
                               node.completed_at});
  return trace;
}

}  // namespace firm
