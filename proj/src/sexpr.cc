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

#include "synthparse/sexpr.h"

#include <fmt/format.h>

#include "synthparse/errors.h"

namespace synthparse {

ParseError::ParseError(const std::string& message, int line, int column)
    : Error(line > 0 ? fmt::format("{}:{}: {}", line, column, message)
                     : message),
      detail_(message),
      line_(line),
      column_(column) {}

namespace sexpr {
namespace {

bool is_delimiter(char c) {
  return c == '(' || c == ')' || c == '"' || c == ';' || c == ' ' ||
         c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  Node read() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    Node node;
    node.line = line_;
    node.column = column_;
    const char c = text_[pos_];
    if (c == '(') {
      advance();
      node.kind = Node::Kind::kList;
      for (;;) {
        skip_space();
        if (pos_ >= text_.size()) {
          throw ParseError("unbalanced parentheses: missing ')'", node.line,
                           node.column);
        }
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        node.children.push_back(read());
      }
    } else if (c == ')') {
      fail("unbalanced parentheses: unexpected ')'");
    } else if (c == '"') {
      node.kind = Node::Kind::kString;
      advance();
      for (;;) {
        if (pos_ >= text_.size()) {
          throw ParseError("unterminated string", node.line, node.column);
        }
        char ch = text_[pos_];
        advance();
        if (ch == '"') break;
        if (ch == '\\') {
          if (pos_ >= text_.size()) fail("dangling escape");
          ch = text_[pos_];
          advance();
          if (ch == 'n') ch = '\n';
          else if (ch == 't') ch = '\t';
          else if (ch != '\\' && ch != '"') fail("unknown escape");
        }
        node.text.push_back(ch);
      }
    } else {
      node.kind = Node::Kind::kAtom;
      while (pos_ < text_.size() && !is_delimiter(text_[pos_])) {
        node.text.push_back(text_[pos_]);
        advance();
      }
    }
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, line_, column_);
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

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                 c == '\f' || c == '\v') {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

}  // namespace

std::vector<Node> parse_all(std::string_view text) {
  Reader reader(text);
  std::vector<Node> out;
  while (!reader.at_end()) out.push_back(reader.read());
  return out;
}

Node parse_one(std::string_view text) {
  Reader reader(text);
  if (reader.at_end()) throw ParseError("empty input", 1, 1);
  Node node = reader.read();
  if (!reader.at_end()) {
    throw ParseError("trailing content after expression", 0, 0);
  }
  return node;
}

bool is_bare_atom(std::string_view text) {
  if (text.empty()) return false;
  for (char c : text) {
    if (is_delimiter(c) || c == '\\') return false;
  }
  return true;
}

void append_quoted(std::string& out, std::string_view text) {
  out.push_back('"');
  for (char c : text) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
}

void append_atom_or_string(std::string& out, std::string_view text) {
  if (is_bare_atom(text)) {
    out += text;
  } else {
    append_quoted(out, text);
  }
}

}  // namespace sexpr
}  // namespace synthparse
