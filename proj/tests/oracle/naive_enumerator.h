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

#ifndef SYNTHPARSE_TESTS_ORACLE_NAIVE_ENUMERATOR_H_
#define SYNTHPARSE_TESTS_ORACLE_NAIVE_ENUMERATOR_H_

// Top-down recursive enumerator for tests. Programs are assembled as
// strings: templates by token substitution of `#k`, beta reduction by
// replacing `(var <param>)` in the lambda body. No memoization, no cells.

#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "synthparse/grammar.h"
#include "synthparse/program.h"

namespace synthparse::oracle {

struct NaiveItem {
  std::string utterance;
  std::string program;
};

class NaiveEnumerator {
 public:
  explicit NaiveEnumerator(const Grammar& g) : g_(g) {}

  // Every (utterance, program) pair derivable from ROOT with at most
  // `max_depth` production applications.
  std::set<std::pair<std::string, std::string>> all(std::size_t max_depth) const {
    std::set<std::pair<std::string, std::string>> out;
    for (std::size_t n = 1; n <= max_depth; ++n) {
      for (const auto& item : exactly("ROOT", n)) {
        // Normalize through the library's canonical rendering.
        Program p = parse_program(item.program);
        if (!is_closed(p)) continue;
        out.emplace(item.utterance, render(p));
      }
    }
    return out;
  }

  std::vector<NaiveItem> exactly(const std::string& cat, std::size_t n) const {
    std::vector<NaiveItem> out;
    if (n == 0) return out;
    for (const auto& p : g_.productions()) {
      if (p.lhs != cat) continue;
      std::vector<std::string> kids;
      for (const auto& item : p.rhs) {
        if (item.is_category()) kids.push_back(item.category);
      }
      std::vector<std::size_t> sizes(kids.size(), 0);
      split(p, kids, sizes, 0, n - 1, out);
    }
    return out;
  }

 private:
  void split(const Production& p, const std::vector<std::string>& kids,
             std::vector<std::size_t>& sizes, std::size_t i, std::size_t left,
             std::vector<NaiveItem>& out) const {
    if (i == kids.size()) {
      if (left != 0) return;
      std::vector<NaiveItem> chosen;
      combine(p, kids, sizes, 0, chosen, out);
      return;
    }
    for (std::size_t s = 1; s <= left; ++s) {
      sizes[i] = s;
      split(p, kids, sizes, i + 1, left - s, out);
    }
  }

  void combine(const Production& p, const std::vector<std::string>& kids,
               const std::vector<std::size_t>& sizes, std::size_t i,
               std::vector<NaiveItem>& chosen, std::vector<NaiveItem>& out) const {
    if (i == kids.size()) {
      NaiveItem item;
      std::size_t next = 0;
      for (const auto& r : p.rhs) {
        const std::string piece =
            r.is_category() ? chosen[next++].utterance : join_tokens(r.tokens);
        if (!item.utterance.empty()) item.utterance += ' ';
        item.utterance += piece;
      }
      std::vector<std::string> programs;
      for (const auto& c : chosen) programs.push_back(c.program);
      if (build(p.semantic_fn, programs, item.program)) out.push_back(item);
      return;
    }
    for (const auto& c : exactly(kids[i], sizes[i])) {
      chosen.push_back(c);
      combine(p, kids, sizes, i + 1, chosen, out);
      chosen.pop_back();
    }
  }

  static std::string substitute(const std::string& text, const std::string& from,
                                const std::string& to) {
    std::string out;
    std::size_t pos = 0;
    for (;;) {
      const std::size_t hit = text.find(from, pos);
      if (hit == std::string::npos) break;
      out.append(text, pos, hit - pos);
      out += to;
      pos = hit + from.size();
    }
    out.append(text, pos, std::string::npos);
    return out;
  }

  static bool build(const SemanticFn& fn, const std::vector<std::string>& kids,
                    std::string& out) {
    switch (fn.kind()) {
      case SemanticFn::Kind::kIdentity:
        out = kids.at(0);
        return true;
      case SemanticFn::Kind::kConstant:
        out = render(*fn.program());
        return true;
      case SemanticFn::Kind::kTemplate: {
        // Rendered skeleton; slots appear as standalone `#k` tokens.
        std::string text = render(*fn.program());
        std::string result;
        std::size_t i = 0;
        while (i < text.size()) {
          if (text[i] == '#' && (i == 0 || text[i - 1] == ' ' || text[i - 1] == '(')) {
            std::size_t j = i + 1;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            result += kids.at(std::stoul(text.substr(i + 1, j - i - 1)));
            i = j;
          } else {
            result += text[i++];
          }
        }
        out = result;
        return true;
      }
      case SemanticFn::Kind::kBeta: {
        const std::string& f = kids.at(fn.fn_index());
        const std::string& arg = kids.at(fn.arg_index());
        const std::string head = "(lambda ";
        if (f.rfind(head, 0) != 0) return false;
        const std::size_t sp = f.find(' ', head.size());
        const std::string param = f.substr(head.size(), sp - head.size());
        const std::string body = f.substr(sp + 1, f.size() - sp - 2);
        out = substitute(body, "(var " + param + ")", arg);
        return true;
      }
    }
    return false;
  }

  const Grammar& g_;
};

// Derivation counts from the recurrence
//   N(c, n) = sum over productions c -> ... with k child categories of
//             sum over compositions n-1 = s1+...+sk of prod N(child_i, s_i).
inline std::uint64_t count_derivations(const Grammar& g, std::size_t max_depth) {
  std::map<std::pair<std::string, std::size_t>, std::uint64_t> table;
  for (std::size_t n = 1; n <= max_depth; ++n) {
    for (const auto& p : g.productions()) {
      std::vector<std::string> kids;
      for (const auto& item : p.rhs) {
        if (item.is_category()) kids.push_back(item.category);
      }
      // ways[j][s]: number of ways the first j children use s applications.
      std::vector<std::vector<std::uint64_t>> ways(
          kids.size() + 1, std::vector<std::uint64_t>(n, 0));
      ways[0][0] = 1;
      for (std::size_t j = 0; j < kids.size(); ++j) {
        for (std::size_t s = 0; s < n; ++s) {
          if (ways[j][s] == 0) continue;
          for (std::size_t t = 1; s + t < n; ++t) {
            auto it = table.find({kids[j], t});
            if (it != table.end()) ways[j + 1][s + t] += ways[j][s] * it->second;
          }
        }
      }
      const std::uint64_t total = ways[kids.size()][n - 1];
      if (total) table[{p.lhs, n}] += total;
    }
  }
  std::uint64_t sum = 0;
  for (std::size_t n = 1; n <= max_depth; ++n) {
    auto it = table.find({std::string(Grammar::kStart), n});
    if (it != table.end()) sum += it->second;
  }
  return sum;
}

}  // namespace synthparse::oracle

#endif  // SYNTHPARSE_TESTS_ORACLE_NAIVE_ENUMERATOR_H_
