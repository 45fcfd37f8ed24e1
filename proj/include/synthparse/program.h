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

#ifndef SYNTHPARSE_PROGRAM_H_
#define SYNTHPARSE_PROGRAM_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "synthparse/sexpr.h"

namespace synthparse {

// Exact rational number, always normalized (gcd 1, positive denominator).
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t numerator, std::int64_t denominator = 1);

  // Accepts "12", "-3", "7/2" and decimals like "2.5".
  static Rational parse(std::string_view text);

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }
  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  std::string to_string() const;

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a,
                                          const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

struct ProgramNode;

// Immutable λ-calculus s-expression. Copies share structure.
//
// Equality is α-equivalence: programs that differ only in the names of
// lambda-bound variables compare equal and render identically.
class Program {
 public:
  static Program call(std::string head, std::vector<Program> args);
  static Program string(std::string text);
  static Program number(Rational value);
  // `id` must follow fb:en.<type>.<name> (an entity) or fb:en.<type> (a
  // reference to the type itself, as in `(call singleton fb:en.paper)`).
  static Program entity(std::string id);
  static Program var(std::string name);
  static Program lambda(std::string param, Program body);

  const ProgramNode& node() const { return *node_; }

  template <typename T>
  const T* as() const;

  friend bool operator==(const Program& a, const Program& b);

 private:
  explicit Program(std::shared_ptr<const ProgramNode> node)
      : node_(std::move(node)) {}

  std::shared_ptr<const ProgramNode> node_;
};

struct Call {
  std::string head;
  std::vector<Program> args;
};

struct StringLit {
  std::string text;
};

struct NumberLit {
  Rational value;
};

struct EntityRef {
  std::string id;
  std::string entity_type;
  std::string name;  // empty for a type reference

  bool is_type_ref() const { return name.empty(); }
};

struct Var {
  std::string name;
};

struct Lambda {
  std::string param;
  Program body;
};

struct ProgramNode {
  std::variant<Call, StringLit, NumberLit, EntityRef, Var, Lambda> value;
};

template <typename T>
const T* Program::as() const {
  return std::get_if<T>(&node_->value);
}

// Splits an fb:en.* identifier. Throws ProgramError on other forms.
EntityRef parse_entity_id(std::string_view id);

// Typed-slot canonical form of a program: entities replaced by `<type><k>`.
struct TemplateKey {
  std::string value;

  friend bool operator==(const TemplateKey&, const TemplateKey&) = default;
  friend auto operator<=>(const TemplateKey&, const TemplateKey&) = default;
};

// Single-line rendering. Lambda binders are renamed to their nesting level
// (`$0`, `$1`, ...) so α-equivalent programs render identically. Grammar
// template slots (variables named `#k`) render as bare `#k`.
std::string render(const Program& p);

// Inverse of render. Throws ParseError on malformed input.
Program parse_program(std::string_view text);

// Builds a program from an already-read s-expression. With `allow_slots`,
// bare `#k` atoms become template slots.
Program program_from_sexpr(const sexpr::Node& node, bool allow_slots = false);

// Capture-avoiding application of a lambda to an argument. Throws
// ProgramError when `fn` is not a lambda.
Program beta_reduce(const Program& fn, const Program& arg);

// Throws ProgramError on open terms.
TemplateKey template_key(const Program& p);

// Number of AST nodes.
std::size_t program_size(const Program& p);

std::set<std::string> free_variables(const Program& p);
inline bool is_closed(const Program& p) { return free_variables(p).empty(); }

// Template slots are variables named "#0", "#1", ...
bool is_slot_name(std::string_view name);
std::string slot_name(std::size_t index);

// Replaces every slot `#k` with `children[k]`. Children are expected to be
// closed, so no capture can occur.
Program fill_slots(const Program& skeleton, std::span<const Program> children);

// Slot indices in left-to-right occurrence order (with repeats).
std::vector<std::size_t> slot_occurrences(const Program& skeleton);

}  // namespace synthparse

template <>
struct std::hash<synthparse::TemplateKey> {
  std::size_t operator()(const synthparse::TemplateKey& key) const noexcept {
    return std::hash<std::string>{}(key.value);
  }
};

#endif  // SYNTHPARSE_PROGRAM_H_
