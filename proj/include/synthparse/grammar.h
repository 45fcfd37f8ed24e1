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

#ifndef SYNTHPARSE_GRAMMAR_H_
#define SYNTHPARSE_GRAMMAR_H_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synthparse/program.h"

namespace synthparse {

enum class ProductionKind {
  kGeneral,
  kLexicon,
  kIdiomaticMultihop,
  kIdiomaticComparative,
  kIdiomaticSuperlative,
  kIdiomaticMacro,
};

std::string_view to_string(ProductionKind kind);
std::optional<ProductionKind> production_kind_from_string(std::string_view s);

// One right-hand-side item: a category reference or a run of terminals.
struct RhsItem {
  std::string category;             // set for category items
  std::vector<std::string> tokens;  // set for terminal items

  bool is_category() const { return !category.empty(); }
};

// Program-side half of a production.
class SemanticFn {
 public:
  enum class Kind { kIdentity, kConstant, kBeta, kTemplate };

  static SemanticFn identity();
  static SemanticFn constant(Program value);
  // Applies child `fn_index` (a lambda) to child `arg_index`.
  static SemanticFn beta(std::size_t fn_index = 0, std::size_t arg_index = 1);
  // `skeleton` holds `#k` slots; slots listed in `shared` may repeat.
  static SemanticFn make_template(Program skeleton,
                                  std::set<std::size_t> shared = {});

  Kind kind() const { return kind_; }
  std::size_t arity() const;
  const std::optional<Program>& program() const { return program_; }
  std::size_t fn_index() const { return fn_index_; }
  std::size_t arg_index() const { return arg_index_; }
  const std::set<std::size_t>& shared() const { return shared_; }

  // Builds the parent program from child programs (one per category item,
  // in rhs order). Throws ProgramError when a β-reduction target is not a
  // lambda.
  Program apply(std::span<const Program> children) const;

  // Problems with slot usage; empty when the function is well formed.
  std::vector<std::string> check() const;

  void render_to(std::string& out) const;

 private:
  Kind kind_ = Kind::kIdentity;
  std::optional<Program> program_;
  std::size_t fn_index_ = 0;
  std::size_t arg_index_ = 1;
  std::set<std::size_t> shared_;
};

struct Production {
  std::string id;
  ProductionKind kind = ProductionKind::kGeneral;
  std::string lhs;
  std::vector<RhsItem> rhs;
  SemanticFn semantic_fn;

  std::size_t category_count() const;
  std::vector<std::string> child_categories() const;
};

// Context-dependent filter applied after enumeration. The only predicate is
// distinct-entities: conjoined `=` filters over `relation` must bind
// pairwise distinct entities once at least `arity` of them are chained.
struct ConstraintRule {
  std::string predicate = "distinct-entities";
  std::string relation;
  std::size_t arity = 2;
};

class Grammar {
 public:
  static constexpr std::string_view kStart = "ROOT";

  Grammar() = default;
  Grammar(std::set<std::string> declared_categories,
          std::vector<Production> productions,
          std::vector<ConstraintRule> constraints = {});

  const std::set<std::string>& categories() const { return categories_; }
  const std::vector<Production>& productions() const { return productions_; }
  const std::vector<ConstraintRule>& constraints() const {
    return constraints_;
  }
  std::string_view start() const { return kStart; }

  // Production indices with the given lhs, in file order.
  std::span<const std::size_t> productions_for(std::string_view lhs) const;

  // Relation names (`(string rel)` constants, without a leading '!') that
  // appear in lexicon or idiomatic productions.
  std::set<std::string> lexicon_relations() const;

 private:
  std::set<std::string> categories_;
  std::vector<Production> productions_;
  std::vector<ConstraintRule> constraints_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_lhs_;
};

// Reads the line-oriented s-expression grammar format. Records:
//   (rule <id> <kind> (<LHS>) (<rhs-item>...) <semfn>)
//   (categories <Name>...)
//   (constraint distinct-entities <relation> <arity>)
// Throws ParseError (syntax, with line/column) or GrammarError.
Grammar load_grammar(std::string_view text);
Grammar load_grammar_file(const std::string& path);

std::string render_grammar(const Grammar& g);

struct Diagnostic {
  enum class Kind { kUnreachable, kUnproductive, kArity };
  Kind kind;
  std::string subject;
  std::string message;

  // "unreachable: Y", "unproductive: X", "arity: <production>: ..."
  std::string to_string() const;
};

std::vector<Diagnostic> validate_grammar(const Grammar& g);

// A program recovered by the chart parser, with the fewest production
// applications over all of its derivations.
struct Parse {
  Program program;
  std::size_t depth;
};

// Every program derivable from ROOT for exactly `tokens` using at most
// `max_depth` production applications. Deduplicated by rendered program and
// sorted by (depth, rendering).
std::vector<Parse> parse_chart(const Grammar& g,
                               std::span<const std::string> tokens,
                               std::size_t max_depth);

std::vector<Program> parse_utterance(const Grammar& g,
                                     std::span<const std::string> tokens,
                                     std::size_t max_depth);

// Lowercased whitespace tokenization used for terminals and utterances.
std::vector<std::string> tokenize(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);

}  // namespace synthparse

#endif  // SYNTHPARSE_GRAMMAR_H_
