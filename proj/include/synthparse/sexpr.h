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

#ifndef SYNTHPARSE_SEXPR_H_
#define SYNTHPARSE_SEXPR_H_

#include <string>
#include <string_view>
#include <vector>

namespace synthparse::sexpr {

// Generic s-expression tree shared by the grammar, database and program
// readers. Comments run from ';' to end of line.
struct Node {
  enum class Kind { kAtom, kString, kList };

  Kind kind = Kind::kAtom;
  std::string text;  // atom text or unescaped string contents
  std::vector<Node> children;
  int line = 0;
  int column = 0;

  bool is_atom() const { return kind == Kind::kAtom; }
  bool is_string() const { return kind == Kind::kString; }
  bool is_list() const { return kind == Kind::kList; }
  bool is_atom(std::string_view value) const {
    return kind == Kind::kAtom && text == value;
  }
  // "(head ...)" with an atom head.
  bool is_form(std::string_view head) const {
    return is_list() && !children.empty() && children.front().is_atom(head);
  }
};

// Parses every top-level expression in `text`. Throws ParseError.
std::vector<Node> parse_all(std::string_view text);

// Parses exactly one expression; trailing content is an error.
Node parse_one(std::string_view text);

// True when `text` can be written as a bare atom and read back unchanged.
bool is_bare_atom(std::string_view text);

// Appends `text` as a bare atom when possible, otherwise double-quoted.
void append_atom_or_string(std::string& out, std::string_view text);

// Appends `text` double-quoted with '\\' and '"' escaped.
void append_quoted(std::string& out, std::string_view text);

}  // namespace synthparse::sexpr

#endif  // SYNTHPARSE_SEXPR_H_
