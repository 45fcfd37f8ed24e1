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

#ifndef SYNTHPARSE_EXECUTOR_H_
#define SYNTHPARSE_EXECUTOR_H_

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "synthparse/program.h"

namespace synthparse {

struct EntityValue {
  std::string id;
  std::string entity_type;
  // Numeric payload used by ordered comparisons (e.g. year entities).
  std::optional<Rational> payload;
};

struct NumberValue {
  Rational value;
  std::string unit;
};

struct TextValue {
  std::string text;
};

class Value {
 public:
  using Variant = std::variant<EntityValue, NumberValue, TextValue>;

  Value(EntityValue v) : v_(std::move(v)) {}  // NOLINT
  Value(NumberValue v) : v_(std::move(v)) {}  // NOLINT
  Value(TextValue v) : v_(std::move(v)) {}    // NOLINT

  const Variant& get() const { return v_; }
  const EntityValue* entity() const { return std::get_if<EntityValue>(&v_); }
  const NumberValue* number() const { return std::get_if<NumberValue>(&v_); }
  const TextValue* text() const { return std::get_if<TextValue>(&v_); }

  // Numeric view: the number itself or an entity's payload.
  std::optional<Rational> numeric() const;

  std::string to_string() const;

  // Identity: entities by id, numbers by exact value, text by content.
  friend bool operator==(const Value& a, const Value& b);
  friend std::strong_ordering operator<=>(const Value& a, const Value& b);

 private:
  Variant v_;
};

// A set of values. Construction sorts and removes duplicates, so equality
// ignores order and multiplicity.
class Denotation {
 public:
  Denotation() = default;
  explicit Denotation(std::vector<Value> values);

  const std::vector<Value>& values() const { return values_; }
  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }
  bool contains(const Value& v) const;
  std::string to_string() const;

  friend bool operator==(const Denotation&, const Denotation&) = default;

 private:
  std::vector<Value> values_;
};

bool denotation_equal(const Denotation& a, const Denotation& b);

enum class ValueKind { kEntity, kNumber, kText };

struct PropertySpec {
  std::string name;
  ValueKind kind = ValueKind::kEntity;
  std::string entity_type;  // for kEntity
};

struct Triple {
  std::string subject;
  std::string property;
  Value object;
};

// Typed in-memory knowledge base. Immutable after construction; inverse
// properties (`!prop`, `!type`) are answered from indexes, never stored.
class Database {
 public:
  Database() = default;

  const std::map<std::string, std::vector<PropertySpec>>& schema() const {
    return schema_;
  }
  const std::map<std::string, EntityValue, std::less<>>& entities() const {
    return entities_;
  }
  const std::vector<Triple>& triples() const { return triples_; }

  bool has_type(std::string_view type) const;
  bool has_property(std::string_view property) const;
  const EntityValue* find_entity(std::string_view id) const;
  std::vector<EntityValue> instances_of(std::string_view type) const;
  std::size_t count_of_type(std::string_view type) const;

  // Objects of (subject, property, *).
  const std::vector<Value>& objects(const std::string& subject,
                                    const std::string& property) const;
  // Subjects of (*, property, object).
  const std::vector<std::string>& subjects(const Value& object,
                                           const std::string& property) const;

 private:
  friend class DatabaseBuilder;

  std::map<std::string, std::vector<PropertySpec>> schema_;
  std::set<std::string, std::less<>> property_names_;
  std::map<std::string, EntityValue, std::less<>> entities_;
  std::map<std::string, std::vector<std::string>, std::less<>> instances_;
  std::vector<Triple> triples_;
  std::map<std::pair<std::string, std::string>, std::vector<Value>> forward_;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>>
      backward_;
};

class DatabaseBuilder {
 public:
  void add_type(std::string name, std::vector<PropertySpec> properties);
  void add_entity(std::string id, std::string type,
                  std::optional<Rational> payload = std::nullopt);
  // `object` is validated against the declared property kind.
  void add_triple(std::string subject, std::string property, Value object);
  Database build();

 private:
  Database db_;
};

// Reads `(type ...)`, `(entity ...)` and `(triple ...)` records.
// Throws ParseError or SchemaError naming the offending record.
Database load_database(std::string_view text);
Database load_database_file(const std::string& path);

enum class ExecErrorReason {
  kUnknownProperty,
  kComparatorTypeMismatch,
  kSuperlativeOverNonnumeric,
  kEmptySuperlativeInput,
  kUnboundHead,
  kMalformedProgram,
};

std::string_view to_string(ExecErrorReason reason);

struct ExecutionError {
  ExecErrorReason reason;
  std::string detail;

  friend bool operator==(const ExecutionError& a, const ExecutionError& b) {
    return a.reason == b.reason;
  }
};

// Either a denotation or an execution error; errors are ordinary values.
class ExecResult {
 public:
  ExecResult(Denotation d) : v_(std::move(d)) {}      // NOLINT
  ExecResult(ExecutionError e) : v_(std::move(e)) {}  // NOLINT

  bool ok() const { return v_.index() == 0; }
  const Denotation& value() const { return std::get<Denotation>(v_); }
  const ExecutionError& error() const { return std::get<ExecutionError>(v_); }
  std::string to_string() const;

  friend bool operator==(const ExecResult&, const ExecResult&) = default;

 private:
  std::variant<Denotation, ExecutionError> v_;
};

// Evaluates a closed program. Supported heads: listValue, singleton,
// getProperty, filter, superlative, countSuperlative, count.
ExecResult execute(const Program& p, const Database& db);

}  // namespace synthparse

#endif  // SYNTHPARSE_EXECUTOR_H_
