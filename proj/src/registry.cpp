#include "firm/registry.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "firm/engine.hpp"

namespace firm {

const char* to_string(DeploymentStatus status) {
  switch (status) {
    case DeploymentStatus::active: return "active";
    case DeploymentStatus::demoted: return "demoted";
    case DeploymentStatus::blacklisted: return "blacklisted";
  }
  return "unknown";
}

int ServiceEntry::total_deployments() const {
  int n = 0;
  for (const auto& impl : implementations) n += static_cast<int>(impl.deployments.size());
  return n;
}

namespace {

bool is_dotted_quad(const std::string& word) {
  int part = 0, digits = 0, value = 0;
  for (char c : word) {
    if (c == '.') {
      if (digits == 0) return false;
      ++part;
      digits = 0;
      value = 0;
    } else if (c >= '0' && c <= '9') {
      if (++digits > 3) return false;
      value = value * 10 + (c - '0');
      if (value > 255) return false;
    } else {
      return false;
    }
  }
  return part == 3 && digits > 0;
}

struct Token {
  enum Kind { word, lbrace, rbrace, semicolon, eof };
  Kind kind = eof;
  std::string text;
  int line = 1;
  int column = 1;
};

// Tokenizer for the registry dialect: words, braces, semicolons.  '#' starts
// a comment running to the end of the line.
class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_space_and_comments();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (pos_ >= text_.size()) {
      tok.kind = Token::eof;
      return tok;
    }
    char c = text_[pos_];
    if (c == '{') {
      advance();
      tok.kind = Token::lbrace;
      return tok;
    }
    if (c == '}') {
      advance();
      tok.kind = Token::rbrace;
      return tok;
    }
    if (c == ';') {
      advance();
      tok.kind = Token::semicolon;
      return tok;
    }
    tok.kind = Token::word;
    while (pos_ < text_.size() && !is_delim(text_[pos_]) &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      tok.text += text_[pos_];
      advance();
    }
    return tok;
  }

  // Consumes everything up to the brace matching an already-consumed '{' and
  // returns the raw inner text.  Used for free-text description blocks.
  std::string raw_block(int open_line, int open_column) {
    std::string out;
    int depth = 1;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '{') ++depth;
      if (c == '}' && --depth == 0) {
        advance();
        return trim(out);
      }
      out += c;
      advance();
    }
    throw ParseError("unterminated description block", open_line, open_column);
  }

 private:
  static bool is_delim(char c) { return c == '{' || c == '}' || c == ';' || c == '#'; }

  static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lexer_(text) { shift(); }

  Registry parse_document() {
    Registry registry;
    expect_word("services");
    expect(Token::lbrace, "'{'");
    while (current_.kind != Token::rbrace) {
      expect_word("service");
      parse_service(registry);
    }
    shift();  // closing brace
    if (current_.kind == Token::semicolon) shift();
    if (current_.kind != Token::eof)
      throw ParseError("trailing content after services block", current_.line, current_.column);
    return registry;
  }

 private:
  void shift() { current_ = lexer_.next(); }

  void expect(Token::Kind kind, const char* what) {
    if (current_.kind != kind)
      throw ParseError(std::string("expected ") + what, current_.line, current_.column);
    shift();
  }

  void expect_word(const char* word) {
    if (current_.kind != Token::word || current_.text != word)
      throw ParseError(std::string("expected '") + word + "'", current_.line, current_.column);
    shift();
  }

  std::string take_name(const char* what) {
    if (current_.kind != Token::word)
      throw ParseError(std::string("expected ") + what, current_.line, current_.column);
    std::string name = current_.text;
    shift();
    return name;
  }

  // Reads the remaining words of a statement up to ';' and joins them.
  std::string take_value(const char* what) {
    std::string value;
    while (current_.kind == Token::word) {
      if (!value.empty()) value += ' ';
      value += current_.text;
      shift();
    }
    if (value.empty())
      throw ParseError(std::string("expected ") + what, current_.line, current_.column);
    expect(Token::semicolon, "';'");
    return value;
  }

  void parse_service(Registry& registry) {
    const int at_line = current_.line, at_column = current_.column;
    std::string name = take_name("service name");
    if (registry.has_service(name) || registry.has_composition(name))
      throw ParseError("duplicate service name '" + name + "'", at_line, at_column);
    expect(Token::lbrace, "'{'");

    bool is_composition = false;
    ServiceEntry entry;
    entry.name = name;
    CompositionDef def;
    def.name = name;
    bool saw_members = false;

    while (current_.kind != Token::rbrace) {
      if (current_.kind != Token::word)
        throw ParseError("expected statement", current_.line, current_.column);
      std::string key = current_.text;
      int key_line = current_.line, key_column = current_.column;
      shift();
      if (key == "type") {
        std::string kind = take_value("service type");
        if (kind == "simple") {
          entry.kind = ServiceKind::simple;
        } else if (kind == "composition") {
          is_composition = true;
        } else if (kind == "composition_reference") {
          entry.kind = ServiceKind::composition_reference;
        } else {
          throw ParseError("unknown service type '" + kind + "'", key_line, key_column);
        }
      } else if (key == "entry_point") {
        def.entry_point = take_value("entry point address");
        if (!is_dotted_quad(def.entry_point))
          throw ParseError("entry_point must be a dotted-quad address", key_line, key_column);
      } else if (key == "description") {
        // The one-token lookahead must not run past the '{', or it would eat
        // the first word of the raw text; take the block straight off the
        // lexer instead.
        if (current_.kind != Token::lbrace)
          throw ParseError("expected '{'", current_.line, current_.column);
        const int open_line = current_.line, open_column = current_.column;
        std::string raw = lexer_.raw_block(open_line, open_column);
        shift();
        if (current_.kind == Token::semicolon) shift();
        entry.description = raw;
        def.description = raw;
      } else if (key == "impl") {
        entry.implementations.push_back(parse_impl());
      } else if (key == "services") {
        parse_members(def);
        saw_members = true;
      } else {
        entry.properties[key] = take_value("property value");
      }
    }
    shift();  // closing brace
    if (current_.kind == Token::semicolon) shift();

    if (is_composition) {
      if (def.entry_point.empty())
        throw ParseError("composition '" + name + "' is missing entry_point", at_line, at_column);
      if (!saw_members || def.members.empty())
        throw ParseError("composition '" + name + "' declares no member services", at_line,
                         at_column);
      registry.add_composition(std::move(def));
    } else {
      if (entry.kind == ServiceKind::simple && entry.implementations.empty())
        throw ParseError("service '" + name + "' declares no implementations", at_line,
                         at_column);
      registry.add_service(std::move(entry));
    }
  }

  Implementation parse_impl() {
    Implementation impl;
    const int at_line = current_.line, at_column = current_.column;
    impl.impl_name = take_name("implementation name");
    expect(Token::lbrace, "'{'");
    parse_impl_body(impl, "");
    if (current_.kind == Token::semicolon) shift();
    if (impl.deployments.empty())
      throw ParseError("implementation '" + impl.impl_name + "' declares no deployments",
                       at_line, at_column);
    return impl;
  }

  // Body shared between an implementation block and a variant sub-block:
  // deployment statements (alias + dotted quad), properties, and (at the
  // top level only) nested 'type NAME { ... }' variant blocks.
  void parse_impl_body(Implementation& impl, const std::string& variant) {
    while (current_.kind != Token::rbrace) {
      if (current_.kind != Token::word)
        throw ParseError("expected statement", current_.line, current_.column);
      std::string key = current_.text;
      int key_line = current_.line, key_column = current_.column;
      shift();
      if (key == "type" && variant.empty()) {
        std::string name = take_name("variant name");
        if (current_.kind == Token::lbrace) {
          shift();
          impl.variants.push_back(ImplementationVariant{name, {}});
          parse_impl_body(impl, name);
          if (current_.kind == Token::semicolon) shift();
          continue;
        }
        // 'type x;' at implementation level is an ordinary property.
        expect(Token::semicolon, "';'");
        impl.properties[key] = name;
        continue;
      }
      std::string value = take_value("statement value");
      if (value.find(' ') == std::string::npos && is_dotted_quad(value)) {
        for (const auto& dep : impl.deployments)
          if (dep.alias == key)
            throw ParseError("duplicate deployment alias '" + key + "'", key_line, key_column);
        Deployment dep;
        dep.alias = key;
        dep.address = value;
        dep.variant = variant;
        impl.deployments.push_back(std::move(dep));
      } else if (variant.empty()) {
        impl.properties[key] = value;
      } else {
        impl.variants.back().properties[key] = value;
      }
    }
    shift();  // closing brace
  }

  void parse_members(CompositionDef& def) {
    expect(Token::lbrace, "'{'");
    while (current_.kind != Token::rbrace) {
      CompositionMember member;
      const int at_line = current_.line, at_column = current_.column;
      member.service = take_name("member service name");
      expect(Token::lbrace, "'{'");
      while (current_.kind != Token::rbrace) {
        if (current_.kind != Token::word)
          throw ParseError("expected member property", current_.line, current_.column);
        std::string key = current_.text;
        int key_line = current_.line, key_column = current_.column;
        shift();
        std::string value = take_value("property value");
        if (key == "order") {
          try {
            member.order = std::stoi(value);
          } catch (const std::exception&) {
            member.order = 0;
          }
          if (member.order < 1 || std::to_string(member.order) != value)
            throw ParseError("member order must be a positive integer", key_line, key_column);
        } else if (key == "serialized") {
          if (value == "true") {
            member.serialized = true;
          } else if (value == "false") {
            member.serialized = false;
          } else {
            throw ParseError("serialized must be true or false", key_line, key_column);
          }
        } else {
          member.properties[key] = value;
        }
      }
      shift();  // member closing brace
      if (current_.kind == Token::semicolon) shift();
      for (const auto& other : def.members)
        if (other.service == member.service)
          throw ParseError("duplicate member '" + member.service + "'", at_line, at_column);
      def.members.push_back(std::move(member));
    }
    shift();  // members closing brace
    if (current_.kind == Token::semicolon) shift();
  }

  Lexer lexer_;
  Token current_;
};

int status_rank(DeploymentStatus status) {
  switch (status) {
    case DeploymentStatus::active: return 0;
    case DeploymentStatus::demoted: return 1;
    case DeploymentStatus::blacklisted: return 2;
  }
  return 3;
}

}  // namespace

Registry parse_registry(const std::string& text) {
  Parser parser(text);
  return parser.parse_document();
}

int Registry::top_level_count() const {
  return static_cast<int>(services_.size() + compositions_.size());
}

bool Registry::has_service(const std::string& name) const {
  for (const auto& s : services_)
    if (s.name == name) return true;
  return false;
}

bool Registry::has_composition(const std::string& name) const {
  for (const auto& c : compositions_)
    if (c.name == name) return true;
  return false;
}

const ServiceEntry& Registry::service(const std::string& name) const {
  for (const auto& s : services_)
    if (s.name == name) return s;
  throw ValidationError("unknown service '" + name + "'");
}

const CompositionDef& Registry::composition(const std::string& name) const {
  for (const auto& c : compositions_)
    if (c.name == name) return c;
  throw ValidationError("unknown composition '" + name + "'");
}

void Registry::add_service(ServiceEntry entry) {
  if (has_service(entry.name) || has_composition(entry.name))
    throw ValidationError("duplicate registry entry '" + entry.name + "'");
  services_.push_back(std::move(entry));
}

void Registry::add_composition(CompositionDef def) {
  if (has_service(def.name) || has_composition(def.name))
    throw ValidationError("duplicate registry entry '" + def.name + "'");
  compositions_.push_back(std::move(def));
}

std::vector<EndpointRef> Registry::lookup_endpoints(const std::string& name) const {
  const ServiceEntry& entry = service(name);
  if (entry.kind == ServiceKind::composition_reference)
    throw ValidationError("service '" + name + "' is a composition reference, not addressable");
  std::vector<EndpointRef> out;
  for (const auto& impl : entry.implementations)
    for (const auto& dep : impl.deployments) {
      if (dep.status == DeploymentStatus::blacklisted) continue;
      out.push_back(EndpointRef{impl.impl_name, dep.variant, dep.alias, dep.address, dep.status});
    }
  return out;
}

int Registry::total_deployments(const std::string& name) const {
  return service(name).total_deployments();
}

Deployment* Registry::find_deployment(const std::string& alias, ServiceEntry** owner,
                                      Implementation** impl) {
  for (auto& s : services_)
    for (auto& i : s.implementations)
      for (auto& d : i.deployments)
        if (d.alias == alias) {
          if (owner) *owner = &s;
          if (impl) *impl = &i;
          return &d;
        }
  return nullptr;
}

void Registry::apply_report(const EngineReport& report) {
  ServiceEntry* owner = nullptr;
  Deployment* dep = find_deployment(report.deployment, &owner);
  if (!dep) throw ValidationError("report for unknown deployment '" + report.deployment + "'");
  dep->reported_mean_time = report.mean_service_time;
  dep->reported_in_flight = report.in_flight;
  dep->has_report = true;
  if (dep->status != DeploymentStatus::blacklisted)
    dep->status = report.over_threshold ? DeploymentStatus::demoted : DeploymentStatus::active;
  // Healthy deployments float to the head of their implementation; ties keep
  // the current order (stable), so an empty or equal report changes nothing.
  // Reported backlog is the last tiebreak, giving equally-fast deployments
  // gentle backpressure without letting it override measured service times.
  for (auto& impl : owner->implementations) {
    std::stable_sort(impl.deployments.begin(), impl.deployments.end(),
                     [](const Deployment& a, const Deployment& b) {
                       if (status_rank(a.status) != status_rank(b.status))
                         return status_rank(a.status) < status_rank(b.status);
                       if (a.reported_mean_time != b.reported_mean_time)
                         return a.reported_mean_time < b.reported_mean_time;
                       return a.reported_in_flight < b.reported_in_flight;
                     });
  }
}

void Registry::set_status(const std::string& alias, DeploymentStatus status) {
  Deployment* dep = find_deployment(alias);
  if (!dep) throw ValidationError("unknown deployment '" + alias + "'");
  dep->status = status;
}

void Registry::move_to_back(const std::string& alias) {
  Implementation* impl = nullptr;
  Deployment* dep = find_deployment(alias, nullptr, &impl);
  if (!dep) throw ValidationError("unknown deployment '" + alias + "'");
  auto it = impl->deployments.begin() + (dep - impl->deployments.data());
  std::rotate(it, it + 1, impl->deployments.end());
}

void Registry::validate() const {
  // Member references must resolve to a simple service or another composition.
  for (const auto& def : compositions_)
    for (const auto& member : def.members)
      if (!has_service(member.service) && !has_composition(member.service))
        throw ValidationError("composition '" + def.name + "' references unknown service '" +
                              member.service + "'");
  // Composition-to-composition references must not form a cycle.
  for (const auto& def : compositions_) {
    std::vector<std::string> path;
    std::set<std::string> on_path;
    std::vector<std::pair<std::string, std::size_t>> stack{{def.name, 0}};
    on_path.insert(def.name);
    while (!stack.empty()) {
      auto& [name, next] = stack.back();
      const CompositionDef& current = composition(name);
      if (next >= current.members.size()) {
        on_path.erase(name);
        stack.pop_back();
        continue;
      }
      const std::string& target = current.members[next++].service;
      if (!has_composition(target)) continue;
      if (on_path.count(target))
        throw ValidationError("composition reference cycle through '" + target + "'");
      stack.emplace_back(target, 0);
      on_path.insert(target);
    }
  }
}

namespace {

void emit_properties(std::ostringstream& out, const std::map<std::string, std::string>& props,
                     const std::string& indent) {
  for (const auto& [key, value] : props) out << indent << key << ' ' << value << ";\n";
}

}  // namespace

std::string Registry::serialize() const {
  std::ostringstream out;
  out << "services {\n";
  for (const auto& entry : services_) {
    out << "    service " << entry.name << " {\n";
    out << "        type simple;\n";
    if (!entry.description.empty())
      out << "        description { " << entry.description << " };\n";
    emit_properties(out, entry.properties, "        ");
    for (const auto& impl : entry.implementations) {
      out << "        impl " << impl.impl_name << " {\n";
      emit_properties(out, impl.properties, "            ");
      for (const auto& dep : impl.deployments)
        if (dep.variant.empty())
          out << "            " << dep.alias << ' ' << dep.address << ";\n";
      for (const auto& variant : impl.variants) {
        out << "            type " << variant.name << " {\n";
        emit_properties(out, variant.properties, "                ");
        for (const auto& dep : impl.deployments)
          if (dep.variant == variant.name)
            out << "                " << dep.alias << ' ' << dep.address << ";\n";
        out << "            }\n";
      }
      out << "        }\n";
    }
    out << "    }\n";
  }
  for (const auto& def : compositions_) {
    out << "    service " << def.name << " {\n";
    out << "        type composition;\n";
    out << "        entry_point " << def.entry_point << ";\n";
    if (!def.description.empty()) out << "        description { " << def.description << " };\n";
    out << "        services {\n";
    for (const auto& member : def.members) {
      out << "            " << member.service << " {\n";
      out << "                order " << member.order << ";\n";
      out << "                serialized " << (member.serialized ? "true" : "false") << ";\n";
      emit_properties(out, member.properties, "                ");
      out << "            }\n";
    }
    out << "        }\n";
    out << "    }\n";
  }
  out << "}\n";
  return out.str();
}

std::string Registry::catalog_csv() const {
  std::ostringstream out;
  out << "service,impl,variant,alias,address,status,preference\n";
  for (const auto& entry : services_) {
    int preference = 0;
    for (const auto& impl : entry.implementations)
      for (const auto& dep : impl.deployments)
        out << entry.name << ',' << impl.impl_name << ',' << dep.variant << ',' << dep.alias
            << ',' << dep.address << ',' << to_string(dep.status) << ',' << preference++ << "\n";
  }
  return out.str();
}

namespace {

int bound_of(const Registry& registry, const std::string& name, std::set<std::string>& on_path) {
  const CompositionDef& def = registry.composition(name);
  if (on_path.count(name))
    throw ValidationError("composition reference cycle through '" + name + "'");
  on_path.insert(name);
  int bound = -1;
  for (const auto& member : def.members) {
    int total;
    if (registry.has_composition(member.service)) {
      total = bound_of(registry, member.service, on_path);
    } else {
      total = registry.total_deployments(member.service);
    }
    if (bound < 0 || total < bound) bound = total;
  }
  on_path.erase(name);
  return bound;
}

}  // namespace

int alternative_path_bound(const Registry& registry, const std::string& composition) {
  std::set<std::string> on_path;
  return bound_of(registry, composition, on_path);
}

}  // namespace firm
