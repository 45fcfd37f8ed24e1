// Copyright 2026 The synthparse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "synthparse/executor.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "synthparse/errors.h"
#include "synthparse/sexpr.h"

namespace synthparse {

// ------------------------------------------------------------------ values

std::optional<Rational> Value::numeric() const {
  if (const auto* n = number()) return n->value;
  if (const auto* e = entity()) return e->payload;
  return std::nullopt;
}

std::string Value::to_string() const {
  if (const auto* e = entity()) return e->id;
  if (const auto* n = number()) {
    return n->unit.empty() ? fmt::format("(number {})", n->value.to_string())
                           : fmt::format("(number {} {})", n->value.to_string(),
                                         n->unit);
  }
  std::string out;
  sexpr::append_quoted(out, text()->text);
  return out;
}

bool operator==(const Value& a, const Value& b) {
  return (a <=> b) == std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  if (a.v_.index() != b.v_.index()) return a.v_.index() <=> b.v_.index();
  if (const auto* ea = a.entity()) return ea->id <=> b.entity()->id;
  if (const auto* na = a.number()) return na->value <=> b.number()->value;
  return a.text()->text <=> b.text()->text;
}

Denotation::Denotation(std::vector<Value> values) : values_(std::move(values)) {
  std::sort(values_.begin(), values_.end());
  values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
}

bool Denotation::contains(const Value& v) const {
  return std::binary_search(values_.begin(), values_.end(), v);
}

std::string Denotation::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (i) out += ", ";
    out += values_[i].to_string();
  }
  return out + "}";
}

bool denotation_equal(const Denotation& a, const Denotation& b) {
  return a == b;
}

std::string_view to_string(ExecErrorReason reason) {
  switch (reason) {
    case ExecErrorReason::kUnknownProperty:
      return "unknown-property";
    case ExecErrorReason::kComparatorTypeMismatch:
      return "comparator-type-mismatch";
    case ExecErrorReason::kSuperlativeOverNonnumeric:
      return "superlative-over-nonnumeric";
    case ExecErrorReason::kEmptySuperlativeInput:
      return "empty-superlative-input";
    case ExecErrorReason::kUnboundHead:
      return "unbound-head";
    case ExecErrorReason::kMalformedProgram:
      return "malformed-program";
  }
  return "unknown";
}

std::string ExecResult::to_string() const {
  if (ok()) return value().to_string();
  return fmt::format("error({}: {})", synthparse::to_string(error().reason),
                     error().detail);
}

// ---------------------------------------------------------------- database

namespace {

const std::vector<Value> kNoValues;
const std::vector<std::string> kNoSubjects;

}  // namespace

bool Database::has_type(std::string_view type) const {
  return schema_.find(std::string(type)) != schema_.end();
}

bool Database::has_property(std::string_view property) const {
  return property_names_.find(property) != property_names_.end();
}

const EntityValue* Database::find_entity(std::string_view id) const {
  auto it = entities_.find(id);
  return it == entities_.end() ? nullptr : &it->second;
}

std::vector<EntityValue> Database::instances_of(std::string_view type) const {
  std::vector<EntityValue> out;
  auto it = instances_.find(type);
  if (it == instances_.end()) return out;
  for (const auto& id : it->second) out.push_back(entities_.find(id)->second);
  return out;
}

std::size_t Database::count_of_type(std::string_view type) const {
  auto it = instances_.find(type);
  return it == instances_.end() ? 0 : it->second.size();
}

const std::vector<Value>& Database::objects(const std::string& subject,
                                            const std::string& property) const {
  auto it = forward_.find({subject, property});
  return it == forward_.end() ? kNoValues : it->second;
}

const std::vector<std::string>& Database::subjects(
    const Value& object, const std::string& property) const {
  auto it = backward_.find({object.to_string(), property});
  return it == backward_.end() ? kNoSubjects : it->second;
}

void DatabaseBuilder::add_type(std::string name,
                               std::vector<PropertySpec> properties) {
  if (name == "type") throw SchemaError("'type' is a reserved type name");
  if (db_.schema_.count(name)) {
    throw SchemaError(fmt::format("type '{}' declared twice", name));
  }
  for (const auto& p : properties) {
    if (p.name.empty() || p.name[0] == '!' || p.name == "type") {
      throw SchemaError(fmt::format("invalid property name '{}'", p.name));
    }
    db_.property_names_.insert(p.name);
  }
  db_.schema_.emplace(std::move(name), std::move(properties));
}

void DatabaseBuilder::add_entity(std::string id, std::string type,
                                 std::optional<Rational> payload) {
  if (!db_.has_type(type)) {
    throw SchemaError(
        fmt::format("entity {} has undeclared type '{}'", id, type));
  }
  EntityRef ref;
  try {
    ref = parse_entity_id(id);
  } catch (const ProgramError& e) {
    throw SchemaError(e.what());
  }
  if (ref.is_type_ref() || ref.entity_type != type) {
    throw SchemaError(fmt::format(
        "entity id {} does not follow fb:en.{}.<name>", id, type));
  }
  if (db_.entities_.count(id)) {
    throw SchemaError(fmt::format("entity {} declared twice", id));
  }
  db_.instances_[type].push_back(id);
  db_.entities_.emplace(id, EntityValue{id, std::move(type), payload});
}

void DatabaseBuilder::add_triple(std::string subject, std::string property,
                                 Value object) {
  const auto describe = [&] {
    return fmt::format("(triple {} {} {})", subject, property,
                       object.to_string());
  };
  const EntityValue* subj = db_.find_entity(subject);
  if (subj == nullptr) {
    throw SchemaError(fmt::format("{}: unknown subject entity", describe()));
  }
  const auto& props = db_.schema_.at(subj->entity_type);
  auto spec = std::find_if(props.begin(), props.end(),
                           [&](const PropertySpec& p) { return p.name == property; });
  if (spec == props.end()) {
    throw SchemaError(fmt::format("{}: property '{}' is not declared for type '{}'",
                                  describe(), property, subj->entity_type));
  }
  switch (spec->kind) {
    case ValueKind::kNumber:
      if (!object.number()) {
        throw SchemaError(fmt::format("{}: expected a number", describe()));
      }
      break;
    case ValueKind::kText:
      if (!object.text()) {
        throw SchemaError(fmt::format("{}: expected text", describe()));
      }
      break;
    case ValueKind::kEntity: {
      if (!object.entity()) {
        throw SchemaError(fmt::format("{}: expected an entity of type '{}'",
                                      describe(), spec->entity_type));
      }
      const EntityValue* obj = db_.find_entity(object.entity()->id);
      if (obj == nullptr) {
        throw SchemaError(fmt::format("{}: unknown object entity", describe()));
      }
      if (obj->entity_type != spec->entity_type) {
        throw SchemaError(fmt::format("{}: object has type '{}', expected '{}'",
                                      describe(), obj->entity_type,
                                      spec->entity_type));
      }
      object = Value(*obj);
      break;
    }
  }
  db_.forward_[{subject, property}].push_back(object);
  db_.backward_[{object.to_string(), property}].push_back(subject);
  db_.triples_.push_back(Triple{std::move(subject), std::move(property),
                                std::move(object)});
}

Database DatabaseBuilder::build() {
  for (const auto& [type, props] : db_.schema_) {
    for (const auto& p : props) {
      if (p.kind == ValueKind::kEntity && !db_.has_type(p.entity_type)) {
        throw SchemaError(fmt::format("property {} of type {} refers to undeclared type '{}'",
                                      p.name, type, p.entity_type));
      }
    }
  }
  return std::move(db_);
}

namespace {

[[noreturn]] void fail_at(const sexpr::Node& node, const std::string& msg) {
  throw ParseError(msg, node.line, node.column);
}

const std::string& atom_of(const sexpr::Node& node, const char* what) {
  if (!node.is_atom()) fail_at(node, fmt::format("expected {}", what));
  return node.text;
}

NumberValue parse_number_form(const sexpr::Node& node) {
  if (!node.is_form("number") || node.children.size() < 2 ||
      node.children.size() > 3) {
    fail_at(node, "expected (number N [unit])");
  }
  NumberValue n;
  try {
    n.value = Rational::parse(atom_of(node.children[1], "number"));
  } catch (const ParseError& e) {
    fail_at(node.children[1], e.detail());
  }
  if (node.children.size() == 3) n.unit = atom_of(node.children[2], "unit");
  return n;
}

template <typename Fn>
void with_record(const sexpr::Node& rec, Fn&& fn) {
  try {
    fn();
  } catch (const SchemaError& e) {
    throw SchemaError(fmt::format("line {}: {}", rec.line, e.what()));
  }
}

}  // namespace

Database load_database(std::string_view text) {
  const auto records = sexpr::parse_all(text);
  DatabaseBuilder builder;
  for (const auto& rec : records) {
    if (!rec.is_form("type")) continue;
    if (rec.children.size() < 2) fail_at(rec, "expected (type <name> (<prop> <kind>)...)");
    std::vector<PropertySpec> props;
    for (std::size_t i = 2; i < rec.children.size(); ++i) {
      const auto& pn = rec.children[i];
      if (!pn.is_list() || pn.children.size() != 2) {
        fail_at(pn, "expected (<prop> <valuekind>)");
      }
      PropertySpec spec;
      spec.name = atom_of(pn.children[0], "property name");
      const std::string& kind = atom_of(pn.children[1], "value kind");
      if (kind == "number") {
        spec.kind = ValueKind::kNumber;
      } else if (kind == "text") {
        spec.kind = ValueKind::kText;
      } else {
        spec.kind = ValueKind::kEntity;
        spec.entity_type = kind;
      }
      props.push_back(std::move(spec));
    }
    with_record(rec, [&] {
      builder.add_type(atom_of(rec.children[1], "type name"), std::move(props));
    });
  }
  for (const auto& rec : records) {
    if (!rec.is_form("entity")) continue;
    if (rec.children.size() != 3 && rec.children.size() != 4) {
      fail_at(rec, "expected (entity <id> <type> [(number N)])");
    }
    std::optional<Rational> payload;
    if (rec.children.size() == 4) payload = parse_number_form(rec.children[3]).value;
    with_record(rec, [&] {
      builder.add_entity(atom_of(rec.children[1], "entity id"),
                         atom_of(rec.children[2], "entity type"), payload);
    });
  }
  for (const auto& rec : records) {
    if (rec.is_form("type") || rec.is_form("entity")) continue;
    if (!rec.is_form("triple")) {
      fail_at(rec, "expected (type ...), (entity ...) or (triple ...)");
    }
    if (rec.children.size() != 4) fail_at(rec, "expected (triple <subj> <prop> <obj>)");
    const auto& obj = rec.children[3];
    std::optional<Value> object;
    if (obj.is_string()) {
      object = Value(TextValue{obj.text});
    } else if (obj.is_list()) {
      object = Value(parse_number_form(obj));
    } else {
      object = Value(EntityValue{obj.text, "", std::nullopt});
    }
    with_record(rec, [&] {
      builder.add_triple(atom_of(rec.children[1], "subject"),
                         atom_of(rec.children[2], "property"), *object);
    });
  }
  return builder.build();
}

Database load_database_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open database file '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return load_database(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.detail()), e.line(),
                     e.column());
  } catch (const SchemaError& e) {
    throw SchemaError(fmt::format("{}: {}", path, e.what()));
  }
}

// ---------------------------------------------------------------- executor

namespace {

constexpr std::string_view kTypeEntityType = "type";

using Values = std::vector<Value>;

class Evaluator {
 public:
  explicit Evaluator(const Database& db) : db_(db) {}

  ExecResult eval(const Program& p) {
    const auto& v = p.node().value;
    if (const auto* e = std::get_if<EntityRef>(&v)) return Denotation({entity_value(*e)});
    if (const auto* n = std::get_if<NumberLit>(&v)) {
      return Denotation({Value(NumberValue{n->value, ""})});
    }
    if (const auto* s = std::get_if<StringLit>(&v)) {
      return Denotation({Value(TextValue{s->text})});
    }
    if (std::holds_alternative<Var>(v)) {
      return error(ExecErrorReason::kMalformedProgram,
                   "free variable " + std::get<Var>(v).name);
    }
    if (std::holds_alternative<Lambda>(v)) {
      return error(ExecErrorReason::kMalformedProgram, "unapplied lambda");
    }
    const auto& call = std::get<Call>(v);
    const std::string& head = call.head;
    if (head == "listValue") return list_value(call);
    if (head == "singleton") return singleton(call);
    if (head == "getProperty") return get_property(call);
    if (head == "filter") return filter(call);
    if (head == "superlative") return superlative(call);
    if (head == "countSuperlative") return count_superlative(call);
    if (head == "count") return count(call);
    return error(ExecErrorReason::kUnboundHead, "unknown head " + head);
  }

 private:
  static ExecutionError error(ExecErrorReason reason, std::string detail) {
    return ExecutionError{reason, std::move(detail)};
  }

  static ExecResult arity(const Call& call, std::size_t expected) {
    return error(ExecErrorReason::kMalformedProgram,
                 fmt::format("{} expects {} argument(s), got {}", call.head,
                             expected, call.args.size()));
  }

  Value entity_value(const EntityRef& e) const {
    if (e.is_type_ref()) {
      return Value(EntityValue{e.id, std::string(kTypeEntityType), std::nullopt});
    }
    if (const EntityValue* known = db_.find_entity(e.id)) return Value(*known);
    return Value(EntityValue{e.id, e.entity_type, std::nullopt});
  }

  static const std::string* string_arg(const Program& p) {
    const auto* s = p.as<StringLit>();
    return s == nullptr ? nullptr : &s->text;
  }

  // Values reachable from `subject` through `relation` (which may be
  // inverted with '!' or be the special `type` / `!type`).
  std::variant<Values, ExecutionError> traverse(const Value& subject,
                                                const std::string& relation) {
    Values out;
    if (relation == "!type") {
      const auto* e = subject.entity();
      if (e && e->entity_type == kTypeEntityType) {
        const EntityRef ref = parse_entity_id(e->id);
        for (auto& inst : db_.instances_of(ref.entity_type)) out.emplace_back(inst);
      }
      return out;
    }
    if (relation == "type") {
      if (const auto* e = subject.entity(); e && e->entity_type != kTypeEntityType) {
        out.emplace_back(EntityValue{"fb:en." + e->entity_type,
                                     std::string(kTypeEntityType), std::nullopt});
      }
      return out;
    }
    const bool inverse = !relation.empty() && relation[0] == '!';
    const std::string property = inverse ? relation.substr(1) : relation;
    if (!db_.has_property(property)) {
      return error(ExecErrorReason::kUnknownProperty, "unknown property " + relation);
    }
    if (inverse) {
      for (const auto& id : db_.subjects(subject, property)) {
        out.emplace_back(*db_.find_entity(id));
      }
    } else if (const auto* e = subject.entity()) {
      out = db_.objects(e->id, property);
    }
    return out;
  }

  ExecResult list_value(const Call& call) {
    if (call.args.size() != 1) return arity(call, 1);
    return eval(call.args[0]);
  }

  ExecResult singleton(const Call& call) {
    if (call.args.size() != 1) return arity(call, 1);
    const auto* e = call.args[0].as<EntityRef>();
    if (e == nullptr) {
      return error(ExecErrorReason::kMalformedProgram,
                   "singleton expects an entity or type reference");
    }
    if (e->is_type_ref() && !db_.has_type(e->entity_type)) {
      return error(ExecErrorReason::kUnknownProperty,
                   "unknown type " + e->entity_type);
    }
    return Denotation({entity_value(*e)});
  }

  ExecResult get_property(const Call& call) {
    if (call.args.size() != 2) return arity(call, 2);
    const std::string* rel = string_arg(call.args[1]);
    if (rel == nullptr) {
      return error(ExecErrorReason::kMalformedProgram,
                   "getProperty expects (string <relation>)");
    }
    ExecResult subjects = eval(call.args[0]);
    if (!subjects.ok()) return subjects;
    Values out;
    for (const auto& s : subjects.value().values()) {
      auto step = traverse(s, *rel);
      if (auto* err = std::get_if<ExecutionError>(&step)) return *err;
      auto& vals = std::get<Values>(step);
      out.insert(out.end(), vals.begin(), vals.end());
    }
    return Denotation(std::move(out));
  }

  static bool loosely_equal(const Value& a, const Value& b) {
    if (a == b) return true;
    if (a.number() || b.number()) {
      const auto na = a.numeric();
      const auto nb = b.numeric();
      return na && nb && *na == *nb;
    }
    return false;
  }

  ExecResult filter(const Call& call) {
    if (call.args.size() != 4) return arity(call, 4);
    const std::string* rel = string_arg(call.args[1]);
    const std::string* cmp = string_arg(call.args[2]);
    if (rel == nullptr || cmp == nullptr) {
      return error(ExecErrorReason::kMalformedProgram,
                   "filter expects (string <relation>) (string <comparator>)");
    }
    const std::string& op = *cmp;
    const bool ordered = op == "<" || op == ">" || op == "<=" || op == ">=";
    if (!ordered && op != "=" && op != "!=") {
      return error(ExecErrorReason::kMalformedProgram, "unknown comparator " + op);
    }
    ExecResult subjects = eval(call.args[0]);
    if (!subjects.ok()) return subjects;
    ExecResult objects = eval(call.args[3]);
    if (!objects.ok()) return objects;

    std::vector<Rational> bounds;
    if (ordered) {
      for (const auto& o : objects.value().values()) {
        const auto n = o.numeric();
        if (!n) {
          return error(ExecErrorReason::kComparatorTypeMismatch,
                       fmt::format("{} against non-numeric {}", op, o.to_string()));
        }
        bounds.push_back(*n);
      }
    }
    Values out;
    for (const auto& s : subjects.value().values()) {
      auto step = traverse(s, *rel);
      if (auto* err = std::get_if<ExecutionError>(&step)) return *err;
      const auto& vals = std::get<Values>(step);
      if (vals.empty()) continue;
      bool keep = false;
      if (ordered) {
        for (const auto& v : vals) {
          const auto n = v.numeric();
          if (!n) {
            return error(ExecErrorReason::kComparatorTypeMismatch,
                         fmt::format("{} over non-numeric {}", op, v.to_string()));
          }
          for (const auto& b : bounds) {
            if ((op == "<" && *n < b) || (op == ">" && *n > b) ||
                (op == "<=" && *n <= b) || (op == ">=" && *n >= b)) {
              keep = true;
            }
          }
        }
      } else {
        bool equal = false;
        for (const auto& v : vals) {
          for (const auto& o : objects.value().values()) {
            if (loosely_equal(v, o)) equal = true;
          }
        }
        keep = op == "=" ? equal : !equal;
      }
      if (keep) out.push_back(s);
    }
    return Denotation(std::move(out));
  }

  static std::optional<bool> mode_is_max(const std::string* mode) {
    if (mode == nullptr) return std::nullopt;
    if (*mode == "max") return true;
    if (*mode == "min") return false;
    return std::nullopt;
  }

  ExecResult superlative(const Call& call) {
    if (call.args.size() != 3) return arity(call, 3);
    const auto is_max = mode_is_max(string_arg(call.args[1]));
    const std::string* rel = string_arg(call.args[2]);
    if (!is_max || rel == nullptr) {
      return error(ExecErrorReason::kMalformedProgram,
                   "superlative expects (string max|min) (string <relation>)");
    }
    ExecResult subjects = eval(call.args[0]);
    if (!subjects.ok()) return subjects;
    if (subjects.value().empty()) {
      return error(ExecErrorReason::kEmptySuperlativeInput, "superlative over empty set");
    }
    std::optional<Rational> best;
    Values winners;
    for (const auto& s : subjects.value().values()) {
      auto step = traverse(s, *rel);
      if (auto* err = std::get_if<ExecutionError>(&step)) return *err;
      std::optional<Rational> key;
      for (const auto& v : std::get<Values>(step)) {
        const auto n = v.numeric();
        if (!n) {
          return error(ExecErrorReason::kSuperlativeOverNonnumeric,
                       fmt::format("{} is not numeric", v.to_string()));
        }
        if (!key || (*is_max ? *n > *key : *n < *key)) key = n;
      }
      if (!key) continue;
      if (!best || (*is_max ? *key > *best : *key < *best)) {
        best = key;
        winners.clear();
      }
      if (*key == *best) winners.push_back(s);
    }
    return Denotation(std::move(winners));
  }

  ExecResult count_superlative(const Call& call) {
    if (call.args.size() != 3 && call.args.size() != 4) return arity(call, 4);
    const auto is_max = mode_is_max(string_arg(call.args[1]));
    const std::string* rel = string_arg(call.args[2]);
    if (!is_max || rel == nullptr) {
      return error(ExecErrorReason::kMalformedProgram,
                   "countSuperlative expects (string max|min) (string <relation>)");
    }
    ExecResult subjects = eval(call.args[0]);
    if (!subjects.ok()) return subjects;
    std::optional<Denotation> restrict_to;
    if (call.args.size() == 4) {
      ExecResult c = eval(call.args[3]);
      if (!c.ok()) return c;
      restrict_to = c.value();
    }
    if (subjects.value().empty()) {
      return error(ExecErrorReason::kEmptySuperlativeInput,
                   "countSuperlative over empty set");
    }
    std::optional<std::size_t> best;
    Values winners;
    for (const auto& s : subjects.value().values()) {
      auto step = traverse(s, *rel);
      if (auto* err = std::get_if<ExecutionError>(&step)) return *err;
      const Denotation reached(std::get<Values>(step));
      std::size_t n = 0;
      for (const auto& v : reached.values()) {
        if (!restrict_to || restrict_to->contains(v)) ++n;
      }
      if (!best || (*is_max ? n > *best : n < *best)) {
        best = n;
        winners.clear();
      }
      if (n == *best) winners.push_back(s);
    }
    return Denotation(std::move(winners));
  }

  ExecResult count(const Call& call) {
    if (call.args.size() != 1) return arity(call, 1);
    ExecResult set = eval(call.args[0]);
    if (!set.ok()) return set;
    const auto n = static_cast<std::int64_t>(set.value().size());
    return Denotation({Value(NumberValue{Rational(n), ""})});
  }

  const Database& db_;
};

}  // namespace

ExecResult execute(const Program& p, const Database& db) {
  return Evaluator(db).eval(p);
}

}  // namespace synthparse
