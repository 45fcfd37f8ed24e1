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

#include "synthparse/grammar.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "synthparse/errors.h"
#include "synthparse/sexpr.h"

namespace synthparse {

namespace {

constexpr std::pair<ProductionKind, std::string_view> kKindNames[] = {
    {ProductionKind::kGeneral, "general"},
    {ProductionKind::kLexicon, "lexicon"},
    {ProductionKind::kIdiomaticMultihop, "idiomatic-multihop"},
    {ProductionKind::kIdiomaticComparative, "idiomatic-comparative"},
    {ProductionKind::kIdiomaticSuperlative, "idiomatic-superlative"},
    {ProductionKind::kIdiomaticMacro, "idiomatic-macro"},
};

}  // namespace

std::string_view to_string(ProductionKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "general";
}

std::optional<ProductionKind> production_kind_from_string(std::string_view s) {
  for (const auto& [k, name] : kKindNames) {
    if (name == s) return k;
  }
  return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// ------------------------------------------------------------- SemanticFn

SemanticFn SemanticFn::identity() { return SemanticFn(); }

SemanticFn SemanticFn::constant(Program value) {
  SemanticFn fn;
  fn.kind_ = Kind::kConstant;
  fn.program_ = std::move(value);
  return fn;
}

SemanticFn SemanticFn::beta(std::size_t fn_index, std::size_t arg_index) {
  SemanticFn fn;
  fn.kind_ = Kind::kBeta;
  fn.fn_index_ = fn_index;
  fn.arg_index_ = arg_index;
  return fn;
}

SemanticFn SemanticFn::make_template(Program skeleton,
                                     std::set<std::size_t> shared) {
  SemanticFn fn;
  fn.kind_ = Kind::kTemplate;
  fn.program_ = std::move(skeleton);
  fn.shared_ = std::move(shared);
  return fn;
}

std::size_t SemanticFn::arity() const {
  switch (kind_) {
    case Kind::kIdentity:
      return 1;
    case Kind::kConstant:
      return 0;
    case Kind::kBeta:
      return std::max(fn_index_, arg_index_) + 1;
    case Kind::kTemplate: {
      const auto slots = slot_occurrences(*program_);
      return slots.empty() ? 0 : *std::max_element(slots.begin(), slots.end()) + 1;
    }
  }
  return 0;
}

std::vector<std::string> SemanticFn::check() const {
  std::vector<std::string> problems;
  if (kind_ == Kind::kBeta && fn_index_ == arg_index_) {
    problems.push_back("beta function and argument are the same child");
  }
  if (kind_ == Kind::kConstant && !slot_occurrences(*program_).empty()) {
    problems.push_back("constant contains template slots");
  }
  if (kind_ == Kind::kTemplate) {
    std::map<std::size_t, int> uses;
    for (std::size_t s : slot_occurrences(*program_)) ++uses[s];
    const std::size_t n = arity();
    for (std::size_t i = 0; i < n; ++i) {
      const int count = uses.count(i) ? uses[i] : 0;
      if (count == 0) problems.push_back(fmt::format("slot #{} is never used", i));
      if (count > 1 && shared_.count(i) == 0) {
        problems.push_back(
            fmt::format("slot #{} used {} times but not declared shared", i,
                        count));
      }
    }
    for (std::size_t s : shared_) {
      if (s >= n) {
        problems.push_back(fmt::format("shared slot #{} is out of range", s));
      }
    }
  }
  return problems;
}

Program SemanticFn::apply(std::span<const Program> children) const {
  switch (kind_) {
    case Kind::kIdentity:
      return children[0];
    case Kind::kConstant:
      return *program_;
    case Kind::kBeta:
      return beta_reduce(children[fn_index_], children[arg_index_]);
    case Kind::kTemplate:
      return fill_slots(*program_, children);
  }
  throw ProgramError("unknown semantic function");
}

void SemanticFn::render_to(std::string& out) const {
  switch (kind_) {
    case Kind::kIdentity:
      out += "(identity)";
      break;
    case Kind::kConstant:
      out += "(constant " + render(*program_) + ")";
      break;
    case Kind::kBeta:
      if (fn_index_ == 0 && arg_index_ == 1) {
        out += "(beta)";
      } else {
        out += fmt::format("(beta {} {})", fn_index_, arg_index_);
      }
      break;
    case Kind::kTemplate:
      out += "(template " + render(*program_);
      if (!shared_.empty()) {
        out += " (shared";
        for (std::size_t s : shared_) out += fmt::format(" #{}", s);
        out += ")";
      }
      out += ")";
      break;
  }
}

// ------------------------------------------------------------- Production

std::size_t Production::category_count() const {
  return static_cast<std::size_t>(std::count_if(
      rhs.begin(), rhs.end(), [](const RhsItem& i) { return i.is_category(); }));
}

std::vector<std::string> Production::child_categories() const {
  std::vector<std::string> out;
  for (const auto& item : rhs) {
    if (item.is_category()) out.push_back(item.category);
  }
  return out;
}

// ---------------------------------------------------------------- Grammar

Grammar::Grammar(std::set<std::string> declared_categories,
                 std::vector<Production> productions,
                 std::vector<ConstraintRule> constraints)
    : categories_(std::move(declared_categories)),
      productions_(std::move(productions)),
      constraints_(std::move(constraints)) {
  for (std::size_t i = 0; i < productions_.size(); ++i) {
    categories_.insert(productions_[i].lhs);
    by_lhs_[productions_[i].lhs].push_back(i);
  }
}

std::span<const std::size_t> Grammar::productions_for(
    std::string_view lhs) const {
  auto it = by_lhs_.find(lhs);
  if (it == by_lhs_.end()) return {};
  return it->second;
}

std::set<std::string> Grammar::lexicon_relations() const {
  std::set<std::string> out;
  for (const auto& p : productions_) {
    if (p.kind == ProductionKind::kGeneral) continue;
    if (p.semantic_fn.kind() != SemanticFn::Kind::kConstant) continue;
    if (const auto* s = p.semantic_fn.program()->as<StringLit>()) {
      std::string rel = s->text;
      if (!rel.empty() && rel[0] == '!') rel.erase(0, 1);
      out.insert(rel);
    }
  }
  return out;
}

// ---------------------------------------------------------------- loading

namespace {

[[noreturn]] void fail_at(const sexpr::Node& node, const std::string& msg) {
  throw ParseError(msg, node.line, node.column);
}

std::string atom(const sexpr::Node& node, const char* what) {
  if (!node.is_atom()) fail_at(node, fmt::format("expected {}", what));
  return node.text;
}

std::size_t parse_index(const sexpr::Node& node) {
  std::string text = atom(node, "index");
  if (!text.empty() && text[0] == '#') text.erase(0, 1);
  if (text.empty() ||
      !std::all_of(text.begin(), text.end(),
                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    fail_at(node, fmt::format("expected child index, got '{}'", node.text));
  }
  return std::stoul(text);
}

SemanticFn parse_semfn(const sexpr::Node& node) {
  if (!node.is_list() || node.children.empty() ||
      !node.children.front().is_atom()) {
    fail_at(node, "expected semantic function");
  }
  const std::string& head = node.children.front().text;
  const auto& kids = node.children;
  if (head == "identity") {
    if (kids.size() != 1) fail_at(node, "(identity) takes no arguments");
    return SemanticFn::identity();
  }
  if (head == "constant") {
    if (kids.size() != 2) fail_at(node, "(constant <sexpr>) takes one program");
    return SemanticFn::constant(program_from_sexpr(kids[1], false));
  }
  if (head == "beta") {
    if (kids.size() == 1) return SemanticFn::beta();
    if (kids.size() != 3) fail_at(node, "(beta [<fn> <arg>])");
    return SemanticFn::beta(parse_index(kids[1]), parse_index(kids[2]));
  }
  if (head == "template") {
    if (kids.size() != 2 && kids.size() != 3) {
      fail_at(node, "(template <sexpr> [(shared #k...)])");
    }
    std::set<std::size_t> shared;
    if (kids.size() == 3) {
      if (!kids[2].is_form("shared")) fail_at(kids[2], "expected (shared #k...)");
      for (std::size_t i = 1; i < kids[2].children.size(); ++i) {
        shared.insert(parse_index(kids[2].children[i]));
      }
    }
    return SemanticFn::make_template(program_from_sexpr(kids[1], true),
                                     std::move(shared));
  }
  fail_at(node, fmt::format("unknown semantic function '{}'", head));
}

struct PendingRef {
  std::string category;
  int line;
  int column;
};

}  // namespace

Grammar load_grammar(std::string_view text) {
  const std::vector<sexpr::Node> records = sexpr::parse_all(text);
  std::set<std::string> declared;
  std::vector<Production> productions;
  std::vector<ConstraintRule> constraints;
  std::vector<std::pair<ConstraintRule, const sexpr::Node*>> constraint_nodes;
  std::vector<PendingRef> refs;
  std::unordered_set<std::string> ids;

  for (const auto& rec : records) {
    if (rec.is_form("categories")) {
      for (std::size_t i = 1; i < rec.children.size(); ++i) {
        declared.insert(atom(rec.children[i], "category name"));
      }
      continue;
    }
    if (rec.is_form("constraint")) {
      if (rec.children.size() != 4) {
        fail_at(rec, "(constraint distinct-entities <relation> <arity>)");
      }
      ConstraintRule rule;
      rule.predicate = atom(rec.children[1], "constraint predicate");
      if (rule.predicate != "distinct-entities") {
        fail_at(rec.children[1],
                fmt::format("unknown constraint '{}'", rule.predicate));
      }
      rule.relation = atom(rec.children[2], "relation");
      rule.arity = parse_index(rec.children[3]);
      if (rule.arity < 2) fail_at(rec.children[3], "arity must be at least 2");
      constraint_nodes.emplace_back(rule, &rec);
      continue;
    }
    if (!rec.is_form("rule")) {
      fail_at(rec, "expected (rule ...), (categories ...) or (constraint ...)");
    }
    if (rec.children.size() != 6) {
      fail_at(rec, "expected (rule <id> <kind> (<LHS>) (<rhs>...) <semfn>)");
    }
    Production p;
    p.id = atom(rec.children[1], "rule id");
    if (!ids.insert(p.id).second) {
      throw GrammarError(fmt::format("{}:{}: duplicate production id '{}'",
                                     rec.line, rec.column, p.id));
    }
    const auto& kind_node = rec.children[2];
    const auto kind = production_kind_from_string(atom(kind_node, "rule kind"));
    if (!kind) fail_at(kind_node, fmt::format("unknown rule kind '{}'", kind_node.text));
    p.kind = *kind;

    const auto& lhs_node = rec.children[3];
    if (!lhs_node.is_list() || lhs_node.children.size() != 1) {
      fail_at(lhs_node, "expected (<LHS>)");
    }
    p.lhs = atom(lhs_node.children[0], "lhs category");
    if (!p.lhs.empty() && p.lhs[0] == '$') p.lhs.erase(0, 1);

    const auto& rhs_node = rec.children[4];
    if (!rhs_node.is_list()) fail_at(rhs_node, "expected (<rhs-item>...)");
    if (rhs_node.children.empty()) fail_at(rhs_node, "empty right-hand side");
    for (const auto& item : rhs_node.children) {
      RhsItem r;
      if (item.is_string()) {
        r.tokens = tokenize(item.text);
        if (r.tokens.empty()) fail_at(item, "empty terminal");
      } else if (item.is_atom() && item.text.size() > 1 && item.text[0] == '$') {
        r.category = item.text.substr(1);
        refs.push_back({r.category, item.line, item.column});
      } else {
        fail_at(item, "rhs item must be $Category or \"terminal words\"");
      }
      p.rhs.push_back(std::move(r));
    }

    p.semantic_fn = parse_semfn(rec.children[5]);
    const std::size_t children = p.category_count();
    if (p.semantic_fn.arity() != children) {
      throw GrammarError(fmt::format(
          "{}:{}: semantic function arity {} does not match {} category "
          "item(s) in rule '{}'",
          rec.line, rec.column, p.semantic_fn.arity(), children, p.id));
    }
    if (const auto problems = p.semantic_fn.check(); !problems.empty()) {
      throw GrammarError(fmt::format("{}:{}: rule '{}': {}", rec.line,
                                     rec.column, p.id, problems.front()));
    }
    productions.push_back(std::move(p));
  }

  for (const auto& p : productions) declared.insert(p.lhs);
  for (const auto& ref : refs) {
    if (declared.count(ref.category) == 0) {
      throw GrammarError(fmt::format("{}:{}: reference to undeclared category '{}'",
                                     ref.line, ref.column, ref.category));
    }
  }
  if (declared.count(std::string(Grammar::kStart)) == 0) {
    throw GrammarError("grammar has no ROOT category");
  }

  Grammar probe(declared, productions);
  const auto relations = probe.lexicon_relations();
  for (auto& [rule, node] : constraint_nodes) {
    if (relations.count(rule.relation) == 0) {
      throw GrammarError(fmt::format(
          "{}:{}: constraint over unknown relation '{}'", node->line,
          node->column, rule.relation));
    }
    constraints.push_back(rule);
  }
  return Grammar(std::move(declared), std::move(productions),
                 std::move(constraints));
}

Grammar load_grammar_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open grammar file '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return load_grammar(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.detail()), e.line(),
                     e.column());
  } catch (const GrammarError& e) {
    throw GrammarError(fmt::format("{}:{}", path, e.what()));
  }
}

std::string render_grammar(const Grammar& g) {
  std::string out = "(categories";
  for (const auto& c : g.categories()) out += " " + c;
  out += ")\n";
  for (const auto& p : g.productions()) {
    out += fmt::format("(rule {} {} ({}) (", p.id, to_string(p.kind), p.lhs);
    for (std::size_t i = 0; i < p.rhs.size(); ++i) {
      if (i) out.push_back(' ');
      if (p.rhs[i].is_category()) {
        out += "$" + p.rhs[i].category;
      } else {
        sexpr::append_quoted(out, join_tokens(p.rhs[i].tokens));
      }
    }
    out += ") ";
    p.semantic_fn.render_to(out);
    out += ")\n";
  }
  for (const auto& c : g.constraints()) {
    out += fmt::format("(constraint {} {} {})\n", c.predicate, c.relation,
                       c.arity);
  }
  return out;
}

// ------------------------------------------------------------- validation

std::string Diagnostic::to_string() const {
  switch (kind) {
    case Kind::kUnreachable:
      return "unreachable: " + subject;
    case Kind::kUnproductive:
      return "unproductive: " + subject;
    case Kind::kArity:
      return "arity: " + subject + ": " + message;
  }
  return message;
}

std::vector<Diagnostic> validate_grammar(const Grammar& g) {
  std::vector<Diagnostic> out;
  const std::string start(g.start());

  std::set<std::string> reachable;
  std::vector<std::string> stack;
  if (g.categories().count(start)) {
    reachable.insert(start);
    stack.push_back(start);
  }
  while (!stack.empty()) {
    const std::string cat = stack.back();
    stack.pop_back();
    for (std::size_t idx : g.productions_for(cat)) {
      for (const auto& child : g.productions()[idx].child_categories()) {
        if (reachable.insert(child).second) stack.push_back(child);
      }
    }
  }

  std::set<std::string> productive;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& p : g.productions()) {
      if (productive.count(p.lhs)) continue;
      const auto kids = p.child_categories();
      if (std::all_of(kids.begin(), kids.end(), [&](const std::string& c) {
            return productive.count(c) > 0;
          })) {
        productive.insert(p.lhs);
        changed = true;
      }
    }
  }

  for (const auto& c : g.categories()) {
    if (!reachable.count(c)) {
      out.push_back({Diagnostic::Kind::kUnreachable, c,
                     "not reachable from " + start});
    }
  }
  for (const auto& c : g.categories()) {
    if (!productive.count(c)) {
      out.push_back({Diagnostic::Kind::kUnproductive, c,
                     "derives no terminal string"});
    }
  }
  for (const auto& p : g.productions()) {
    if (p.semantic_fn.arity() != p.category_count()) {
      out.push_back({Diagnostic::Kind::kArity, p.id,
                     fmt::format("semantic function arity {} vs {} children",
                                 p.semantic_fn.arity(), p.category_count())});
    }
    for (const auto& problem : p.semantic_fn.check()) {
      out.push_back({Diagnostic::Kind::kArity, p.id, problem});
    }
  }
  return out;
}

// ----------------------------------------------------------- chart parser

namespace {

struct Cell {
  std::vector<Program> programs;
  std::unordered_set<std::string> seen;

  void add(Program p) {
    if (seen.insert(render(p)).second) programs.push_back(std::move(p));
  }
};

class ChartParser {
 public:
  ChartParser(const Grammar& g, std::span<const std::string> tokens,
              std::size_t max_depth)
      : grammar_(g), max_depth_(max_depth) {
    for (const auto& t : tokens) {
      auto lowered = tokenize(t);
      tokens_.insert(tokens_.end(), lowered.begin(), lowered.end());
    }
    std::size_t id = 0;
    for (const auto& c : g.categories()) category_ids_[c] = id++;
    const std::size_t n = tokens_.size();
    cells_.resize(category_ids_.size() * (n + 1) * (n + 1) * (max_depth_ + 1));
  }

  std::vector<Parse> run() {
    const std::size_t n = tokens_.size();
    if (n == 0 || max_depth_ == 0) return {};
    for (std::size_t len = 1; len <= n; ++len) {
      for (std::size_t i = 0; i + len <= n; ++i) {
        const std::size_t j = i + len;
        for (std::size_t size = 1; size <= max_depth_; ++size) {
          for (const auto& p : grammar_.productions()) {
            Cell& target = cell(category_ids_.at(p.lhs), i, j, size);
            std::vector<const Cell*> chosen;
            match(p, 0, i, j, size - 1, chosen, target);
          }
        }
      }
    }
    std::map<std::string, Parse> best;
    const auto root = category_ids_.find(std::string(grammar_.start()));
    if (root == category_ids_.end()) return {};
    for (std::size_t size = 1; size <= max_depth_; ++size) {
      for (const auto& prog : cell(root->second, 0, n, size).programs) {
        best.try_emplace(render(prog), Parse{prog, size});
      }
    }
    std::vector<std::pair<std::string, Parse>> ordered(best.begin(), best.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) {
                       return a.second.depth < b.second.depth;
                     });
    std::vector<Parse> out;
    out.reserve(ordered.size());
    for (auto& [_, parse] : ordered) out.push_back(std::move(parse));
    return out;
  }

 private:
  Cell& cell(std::size_t cat, std::size_t i, std::size_t j, std::size_t size) {
    const std::size_t n = tokens_.size() + 1;
    return cells_[((cat * n + i) * n + j) * (max_depth_ + 1) + size];
  }

  // Minimum number of tokens the items from `k` on can cover.
  static std::size_t min_tokens(const Production& p, std::size_t k) {
    std::size_t total = 0;
    for (; k < p.rhs.size(); ++k) {
      total += p.rhs[k].is_category() ? 1 : p.rhs[k].tokens.size();
    }
    return total;
  }

  void match(const Production& p, std::size_t k, std::size_t pos,
             std::size_t end, std::size_t budget,
             std::vector<const Cell*>& chosen, Cell& target) {
    if (k == p.rhs.size()) {
      if (pos == end && budget == 0) emit(p, chosen, target);
      return;
    }
    if (pos + min_tokens(p, k) > end) return;
    const RhsItem& item = p.rhs[k];
    if (!item.is_category()) {
      for (std::size_t t = 0; t < item.tokens.size(); ++t) {
        if (tokens_[pos + t] != item.tokens[t]) return;
      }
      match(p, k + 1, pos + item.tokens.size(), end, budget, chosen, target);
      return;
    }
    const std::size_t cat = category_ids_.at(item.category);
    const std::size_t rest = min_tokens(p, k + 1);
    for (std::size_t stop = pos + 1; stop + rest <= end; ++stop) {
      for (std::size_t size = 1; size <= budget; ++size) {
        const Cell& child = cell(cat, pos, stop, size);
        if (child.programs.empty()) continue;
        chosen.push_back(&child);
        match(p, k + 1, stop, end, budget - size, chosen, target);
        chosen.pop_back();
      }
    }
  }

  void emit(const Production& p, const std::vector<const Cell*>& chosen,
            Cell& target) {
    std::vector<Program> args;
    args.reserve(chosen.size());
    product(p, chosen, 0, args, target);
  }

  void product(const Production& p, const std::vector<const Cell*>& chosen,
               std::size_t k, std::vector<Program>& args, Cell& target) {
    if (k == chosen.size()) {
      try {
        target.add(p.semantic_fn.apply(args));
      } catch (const ProgramError&) {
        // Ill-typed composition (e.g. β-reducing a non-lambda): no parse.
      }
      return;
    }
    for (const auto& prog : chosen[k]->programs) {
      args.push_back(prog);
      product(p, chosen, k + 1, args, target);
      args.pop_back();
    }
  }

  const Grammar& grammar_;
  std::size_t max_depth_;
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t> category_ids_;
  std::vector<Cell> cells_;
};

}  // namespace

std::vector<Parse> parse_chart(const Grammar& g,
                               std::span<const std::string> tokens,
                               std::size_t max_depth) {
  if (max_depth < 1) throw UsageError("parse max_depth must be at least 1");
  return ChartParser(g, tokens, max_depth).run();
}

std::vector<Program> parse_utterance(const Grammar& g,
                                     std::span<const std::string> tokens,
                                     std::size_t max_depth) {
  std::vector<Program> out;
  for (auto& parse : parse_chart(g, tokens, max_depth)) {
    out.push_back(std::move(parse.program));
  }
  return out;
}

}  // namespace synthparse
