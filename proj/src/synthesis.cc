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

#include "synthparse/synthesis.h"

#include <set>
#include <unordered_set>

#include <fmt/format.h>

namespace synthparse {

namespace {

struct Derivation {
  std::vector<std::string> tokens;
  Program program;
};

struct Cell {
  std::vector<Derivation> items;
  std::unordered_set<std::string> seen;
};

class Enumerator {
 public:
  Enumerator(const Grammar& g, const EnumerationOptions& options,
             EnumerationStats& stats)
      : grammar_(g), options_(options), stats_(stats) {
    std::size_t id = 0;
    for (const auto& c : g.categories()) category_ids_[c] = id++;
    cells_.resize(category_ids_.size() * (options.max_depth + 1));
  }

  Dataset run() {
    for (size_ = 1; size_ <= options_.max_depth; ++size_) {
      for (const auto& p : grammar_.productions()) expand(p);
    }
    Dataset out;
    out.tag = DatasetTag::kCanonical;
    const auto root = category_ids_.find(std::string(grammar_.start()));
    if (root == category_ids_.end()) return out;
    std::unordered_set<std::string> seen;
    for (std::size_t size = 1; size <= options_.max_depth; ++size) {
      for (const auto& d : cell(root->second, size).items) {
        std::string key = join_tokens(d.tokens) + '\t' + render(d.program);
        if (!seen.insert(std::move(key)).second) {
          ++stats_.duplicates;
          continue;
        }
        out.examples.push_back(
            make_example(fmt::format("can-{:06d}", out.examples.size()),
                         d.tokens, d.program, size));
      }
    }
    return out;
  }

 private:
  Cell& cell(std::size_t cat, std::size_t size) {
    return cells_[cat * (options_.max_depth + 1) + size];
  }

  void expand(const Production& p) {
    current_ = &p;
    target_ = category_ids_.at(p.lhs);
    is_root_ = p.lhs == grammar_.start();
    children_.clear();
    for (const auto& item : p.rhs) {
      if (item.is_category()) {
        children_.push_back(category_ids_.at(item.category));
      }
    }
    parts_.assign(children_.size(), 0);
    if (children_.empty()) {
      if (size_ == 1) emit({});
      return;
    }
    compose(0, size_ - 1);
  }

  // Splits `remaining` over children [index, k) with every part >= 1, in
  // lexicographic order of the size vector.
  void compose(std::size_t index, std::size_t remaining) {
    const std::size_t left = children_.size() - index;
    if (left == 1) {
      if (remaining < 1) return;
      parts_[index] = remaining;
      std::vector<const Derivation*> chosen;
      product(0, chosen);
      return;
    }
    for (std::size_t s = 1; s + (left - 1) <= remaining; ++s) {
      parts_[index] = s;
      compose(index + 1, remaining - s);
    }
  }

  void product(std::size_t index, std::vector<const Derivation*>& chosen) {
    if (index == children_.size()) {
      emit(chosen);
      return;
    }
    for (const auto& d : cell(children_[index], parts_[index]).items) {
      chosen.push_back(&d);
      product(index + 1, chosen);
      chosen.pop_back();
    }
  }

  void emit(const std::vector<const Derivation*>& chosen) {
    std::vector<std::string> tokens;
    std::vector<Program> args;
    args.reserve(chosen.size());
    std::size_t next = 0;
    for (const auto& item : current_->rhs) {
      if (item.is_category()) {
        const Derivation* d = chosen[next++];
        tokens.insert(tokens.end(), d->tokens.begin(), d->tokens.end());
        args.push_back(d->program);
      } else {
        tokens.insert(tokens.end(), item.tokens.begin(), item.tokens.end());
      }
    }
    std::optional<Program> program;
    try {
      program = current_->semantic_fn.apply(args);
    } catch (const ProgramError&) {
      ++stats_.ill_typed;
      return;
    }
    if (is_root_ && !is_closed(*program)) {
      ++stats_.ill_typed;
      return;
    }
    if (++built_ > options_.max_examples) {
      throw SynthesisLimitError(fmt::format(
          "enumeration exceeded the cap of {} derivations at depth {}",
          options_.max_examples, options_.max_depth));
    }
    if (is_root_) ++stats_.derivations;
    Cell& c = cell(target_, size_);
    std::string key = join_tokens(tokens) + '\t' + render(*program);
    if (!c.seen.insert(std::move(key)).second) {
      if (is_root_) ++stats_.duplicates;
      return;
    }
    c.items.push_back(Derivation{std::move(tokens), std::move(*program)});
  }

  const Grammar& grammar_;
  const EnumerationOptions& options_;
  EnumerationStats& stats_;
  std::map<std::string, std::size_t> category_ids_;
  std::vector<Cell> cells_;
  std::size_t built_ = 0;

  std::size_t size_ = 0;
  const Production* current_ = nullptr;
  std::size_t target_ = 0;
  bool is_root_ = false;
  std::vector<std::size_t> children_;
  std::vector<std::size_t> parts_;
};

// `(call filter base (string rel) (string =) obj)` over `relation`.
const Call* equality_filter(const Program& p, std::string_view relation) {
  const Call* c = p.as<Call>();
  if (c == nullptr || c->head != "filter" || c->args.size() != 4) return nullptr;
  const StringLit* rel = c->args[1].as<StringLit>();
  const StringLit* op = c->args[2].as<StringLit>();
  if (rel == nullptr || op == nullptr) return nullptr;
  if (rel->text != relation || op->text != "=") return nullptr;
  return c;
}

bool walk(const Program& p, const ConstraintRule& rule, bool in_chain) {
  if (const Call* c = p.as<Call>()) {
    if (!in_chain && equality_filter(p, rule.relation) != nullptr) {
      std::vector<std::string> bound;
      const Program* cur = &p;
      std::vector<const Program*> objects;
      while (const Call* f = equality_filter(*cur, rule.relation)) {
        objects.push_back(&f->args[3]);
        if (const EntityRef* e = f->args[3].as<EntityRef>()) {
          bound.push_back(e->id);
        } else {
          bound.push_back(render(f->args[3]));
        }
        cur = &f->args[0];
      }
      if (bound.size() >= rule.arity) {
        const std::set<std::string> distinct(bound.begin(), bound.end());
        if (distinct.size() != bound.size()) return true;
      }
      for (const Program* o : objects) {
        if (walk(*o, rule, false)) return true;
      }
      return walk(*cur, rule, false);
    }
    for (const auto& a : c->args) {
      if (walk(a, rule, false)) return true;
    }
    return false;
  }
  if (const Lambda* l = p.as<Lambda>()) return walk(l->body, rule, false);
  return false;
}

}  // namespace

Dataset enumerate(const Grammar& g, const EnumerationOptions& options,
                  EnumerationStats* stats) {
  if (options.max_depth < 1) {
    throw UsageError("max_depth must be at least 1");
  }
  EnumerationStats local;
  Enumerator e(g, options, stats ? *stats : local);
  return e.run();
}

bool violates(const Program& p, const ConstraintRule& rule) {
  return walk(p, rule, false);
}

Dataset apply_constraints(const Dataset& d,
                          std::span<const ConstraintRule> rules) {
  Dataset out;
  out.tag = d.tag;
  for (const auto& e : d.examples) {
    bool ok = true;
    for (const auto& r : rules) {
      if (violates(e.program, r)) {
        ok = false;
        break;
      }
    }
    if (ok) out.examples.push_back(e);
  }
  return out;
}

Dataset apply_constraints(const Dataset& d,
                          std::span<const ConstraintRule> rules,
                          const Grammar& lexicon) {
  const std::set<std::string> relations = lexicon.lexicon_relations();
  for (const auto& r : rules) {
    if (r.predicate != "distinct-entities") {
      throw UsageError(fmt::format("unknown constraint predicate '{}'",
                                   r.predicate));
    }
    if (!relations.contains(r.relation)) {
      throw UsageError(fmt::format(
          "constraint relation '{}' does not appear in the lexicon",
          r.relation));
    }
  }
  return apply_constraints(d, rules);
}

std::map<std::size_t, Dataset> bucket_by_depth(const Dataset& d) {
  std::map<std::size_t, Dataset> out;
  for (const auto& e : d.examples) {
    Dataset& bucket = out[e.depth];
    bucket.tag = d.tag;
    bucket.examples.push_back(e);
  }
  return out;
}

}  // namespace synthparse
