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

#include "synthparse/program.h"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "synthparse/errors.h"

namespace synthparse {

// ---------------------------------------------------------------- Rational

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) throw ProgramError("rational with zero denominator");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  const std::int64_t g = std::gcd(numerator, denominator);
  num_ = g == 0 ? 0 : numerator / g;
  den_ = g == 0 ? 1 : denominator / g;
}

namespace {

std::int64_t parse_int64(std::string_view text, std::string_view whole) {
  std::int64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw ParseError(fmt::format("invalid number '{}'", whole), 0, 0);
  }
  return value;
}

}  // namespace

Rational Rational::parse(std::string_view text) {
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    return Rational(parse_int64(text.substr(0, slash), text),
                    parse_int64(text.substr(slash + 1), text));
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const std::string_view frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 18 ||
        !std::all_of(frac.begin(), frac.end(),
                     [](char c) { return c >= '0' && c <= '9'; })) {
      throw ParseError(fmt::format("invalid number '{}'", text), 0, 0);
    }
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::string joined(text.substr(0, dot));
    joined += frac;
    return Rational(parse_int64(joined, text), scale);
  }
  return Rational(parse_int64(text, text), 1);
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return fmt::format("{}/{}", num_, den_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
  const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

// ------------------------------------------------------------ construction

EntityRef parse_entity_id(std::string_view id) {
  constexpr std::string_view kPrefix = "fb:en.";
  if (id.substr(0, kPrefix.size()) != kPrefix || id.size() == kPrefix.size()) {
    throw ProgramError(fmt::format("malformed entity id '{}'", id));
  }
  const std::string_view rest = id.substr(kPrefix.size());
  EntityRef ref;
  ref.id = std::string(id);
  const auto dot = rest.find('.');
  if (dot == std::string_view::npos) {
    ref.entity_type = std::string(rest);
  } else {
    ref.entity_type = std::string(rest.substr(0, dot));
    ref.name = std::string(rest.substr(dot + 1));
    if (ref.name.empty()) {
      throw ProgramError(fmt::format("malformed entity id '{}'", id));
    }
  }
  if (ref.entity_type.empty()) {
    throw ProgramError(fmt::format("malformed entity id '{}'", id));
  }
  return ref;
}

Program Program::call(std::string head, std::vector<Program> args) {
  if (head.empty()) throw ProgramError("call with empty head");
  return Program(std::make_shared<const ProgramNode>(
      ProgramNode{Call{std::move(head), std::move(args)}}));
}

Program Program::string(std::string text) {
  return Program(std::make_shared<const ProgramNode>(
      ProgramNode{StringLit{std::move(text)}}));
}

Program Program::number(Rational value) {
  return Program(
      std::make_shared<const ProgramNode>(ProgramNode{NumberLit{value}}));
}

Program Program::entity(std::string id) {
  return Program(std::make_shared<const ProgramNode>(
      ProgramNode{parse_entity_id(id)}));
}

Program Program::var(std::string name) {
  if (!sexpr::is_bare_atom(name)) {
    throw ProgramError(fmt::format("invalid variable name '{}'", name));
  }
  return Program(
      std::make_shared<const ProgramNode>(ProgramNode{Var{std::move(name)}}));
}

Program Program::lambda(std::string param, Program body) {
  if (!sexpr::is_bare_atom(param) || is_slot_name(param)) {
    throw ProgramError(fmt::format("invalid lambda parameter '{}'", param));
  }
  return Program(std::make_shared<const ProgramNode>(
      ProgramNode{Lambda{std::move(param), std::move(body)}}));
}

bool is_slot_name(std::string_view name) {
  return name.size() >= 2 && name[0] == '#' &&
         std::all_of(name.begin() + 1, name.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

std::string slot_name(std::size_t index) { return fmt::format("#{}", index); }

// ---------------------------------------------------------------- equality

namespace {

using Binders = std::vector<std::string>;

// Innermost binder level of `name`, or -1 when free.
int binder_level(const Binders& binders, const std::string& name) {
  for (std::size_t i = binders.size(); i-- > 0;) {
    if (binders[i] == name) return static_cast<int>(i);
  }
  return -1;
}

bool alpha_equal(const Program& a, const Program& b, Binders& ba,
                 Binders& bb) {
  if (&a.node() == &b.node() && ba.empty() && bb.empty()) return true;
  const auto& va = a.node().value;
  const auto& vb = b.node().value;
  if (va.index() != vb.index()) return false;
  if (const auto* ca = std::get_if<Call>(&va)) {
    const auto& cb = std::get<Call>(vb);
    if (ca->head != cb.head || ca->args.size() != cb.args.size()) return false;
    for (std::size_t i = 0; i < ca->args.size(); ++i) {
      if (!alpha_equal(ca->args[i], cb.args[i], ba, bb)) return false;
    }
    return true;
  }
  if (const auto* sa = std::get_if<StringLit>(&va)) {
    return sa->text == std::get<StringLit>(vb).text;
  }
  if (const auto* na = std::get_if<NumberLit>(&va)) {
    return na->value == std::get<NumberLit>(vb).value;
  }
  if (const auto* ea = std::get_if<EntityRef>(&va)) {
    return ea->id == std::get<EntityRef>(vb).id;
  }
  if (const auto* xa = std::get_if<Var>(&va)) {
    const auto& xb = std::get<Var>(vb);
    const int la = binder_level(ba, xa->name);
    const int lb = binder_level(bb, xb.name);
    if (la < 0 && lb < 0) return xa->name == xb.name;
    return la == lb;
  }
  const auto& la = std::get<Lambda>(va);
  const auto& lb = std::get<Lambda>(vb);
  ba.push_back(la.param);
  bb.push_back(lb.param);
  const bool eq = alpha_equal(la.body, lb.body, ba, bb);
  ba.pop_back();
  bb.pop_back();
  return eq;
}

}  // namespace

bool operator==(const Program& a, const Program& b) {
  Binders ba, bb;
  return alpha_equal(a, b, ba, bb);
}

// --------------------------------------------------------------- rendering

namespace {

struct RenderContext {
  Binders binders;
  // When set, entity references are written through this callback.
  std::function<void(std::string&, const EntityRef&)> entity_writer;
};

void render_into(std::string& out, const Program& p, RenderContext& ctx) {
  const auto& v = p.node().value;
  if (const auto* c = std::get_if<Call>(&v)) {
    out += "(call ";
    sexpr::append_atom_or_string(out, c->head);
    for (const auto& arg : c->args) {
      out.push_back(' ');
      render_into(out, arg, ctx);
    }
    out.push_back(')');
  } else if (const auto* s = std::get_if<StringLit>(&v)) {
    out += "(string ";
    sexpr::append_atom_or_string(out, s->text);
    out.push_back(')');
  } else if (const auto* n = std::get_if<NumberLit>(&v)) {
    out += "(number ";
    out += n->value.to_string();
    out.push_back(')');
  } else if (const auto* e = std::get_if<EntityRef>(&v)) {
    if (ctx.entity_writer) {
      ctx.entity_writer(out, *e);
    } else {
      out += e->id;
    }
  } else if (const auto* x = std::get_if<Var>(&v)) {
    const int level = binder_level(ctx.binders, x->name);
    if (level >= 0) {
      out += fmt::format("(var ${})", level);
    } else if (is_slot_name(x->name)) {
      out += x->name;
    } else {
      out += "(var ";
      out += x->name;
      out.push_back(')');
    }
  } else {
    const auto& l = std::get<Lambda>(v);
    out += fmt::format("(lambda ${} ", ctx.binders.size());
    ctx.binders.push_back(l.param);
    render_into(out, l.body, ctx);
    ctx.binders.pop_back();
    out.push_back(')');
  }
}

}  // namespace

std::string render(const Program& p) {
  std::string out;
  RenderContext ctx;
  render_into(out, p, ctx);
  return out;
}

// ----------------------------------------------------------------- parsing

namespace {

[[noreturn]] void fail_at(const sexpr::Node& node, const std::string& msg) {
  throw ParseError(msg, node.line, node.column);
}

std::string atom_text(const sexpr::Node& node, const char* what) {
  if (node.is_list()) fail_at(node, fmt::format("expected {}", what));
  return node.text;
}

Program from_sexpr(const sexpr::Node& node, bool allow_slots,
                   Binders& binders) {
  if (node.is_atom()) {
    if (node.text.rfind("fb:en.", 0) == 0) {
      try {
        return Program::entity(node.text);
      } catch (const ProgramError& e) {
        fail_at(node, e.what());
      }
    }
    if (allow_slots && is_slot_name(node.text)) return Program::var(node.text);
    fail_at(node, fmt::format("unknown atom form '{}'", node.text));
  }
  if (node.is_string()) {
    fail_at(node, "unknown atom form: bare quoted string");
  }
  if (node.children.empty() || !node.children.front().is_atom()) {
    fail_at(node, "unknown atom form: expected (call|string|number|var|lambda ...)");
  }
  const std::string& head = node.children.front().text;
  const auto& kids = node.children;
  if (head == "call") {
    if (kids.size() < 2) fail_at(node, "call without head");
    std::vector<Program> args;
    args.reserve(kids.size() - 2);
    for (std::size_t i = 2; i < kids.size(); ++i) {
      args.push_back(from_sexpr(kids[i], allow_slots, binders));
    }
    return Program::call(atom_text(kids[1], "call head"), std::move(args));
  }
  if (head == "string") {
    if (kids.size() != 2) fail_at(node, "string takes exactly one value");
    return Program::string(atom_text(kids[1], "string value"));
  }
  if (head == "number") {
    if (kids.size() != 2 || !kids[1].is_atom()) {
      fail_at(node, "number takes exactly one numeric atom");
    }
    try {
      return Program::number(Rational::parse(kids[1].text));
    } catch (const Error& e) {
      fail_at(kids[1], e.what());
    }
  }
  if (head == "var") {
    if (kids.size() != 2 || !kids[1].is_atom()) {
      fail_at(node, "var takes exactly one name");
    }
    const std::string& name = kids[1].text;
    if (!name.empty() && name[0] == '$' && binder_level(binders, name) < 0) {
      fail_at(kids[1], fmt::format("reserved variable '{}' is unbound", name));
    }
    if (is_slot_name(name)) fail_at(kids[1], "slot names are not variables");
    return Program::var(name);
  }
  if (head == "lambda") {
    if (kids.size() != 3 || !kids[1].is_atom()) {
      fail_at(node, "lambda takes a parameter name and a body");
    }
    binders.push_back(kids[1].text);
    Program body = from_sexpr(kids[2], allow_slots, binders);
    binders.pop_back();
    try {
      return Program::lambda(kids[1].text, std::move(body));
    } catch (const ProgramError& e) {
      fail_at(kids[1], e.what());
    }
  }
  fail_at(node, fmt::format("unknown atom form '({} ...)'", head));
}

}  // namespace

Program program_from_sexpr(const sexpr::Node& node, bool allow_slots) {
  Binders binders;
  return from_sexpr(node, allow_slots, binders);
}

Program parse_program(std::string_view text) {
  return program_from_sexpr(sexpr::parse_one(text), false);
}

// -------------------------------------------------------- free variables

namespace {

void collect_free(const Program& p, Binders& binders,
                  std::set<std::string>& out) {
  const auto& v = p.node().value;
  if (const auto* c = std::get_if<Call>(&v)) {
    for (const auto& arg : c->args) collect_free(arg, binders, out);
  } else if (const auto* x = std::get_if<Var>(&v)) {
    if (binder_level(binders, x->name) < 0) out.insert(x->name);
  } else if (const auto* l = std::get_if<Lambda>(&v)) {
    binders.push_back(l->param);
    collect_free(l->body, binders, out);
    binders.pop_back();
  }
}

}  // namespace

std::set<std::string> free_variables(const Program& p) {
  std::set<std::string> out;
  Binders binders;
  collect_free(p, binders, out);
  return out;
}

// ----------------------------------------------------------- substitution

namespace {

bool occurs_free(const Program& p, const std::string& name) {
  return free_variables(p).count(name) > 0;
}

Program substitute(const Program& p, const std::string& name,
                   const Program& value,
                   const std::set<std::string>& value_free) {
  const auto& v = p.node().value;
  if (const auto* c = std::get_if<Call>(&v)) {
    std::vector<Program> args;
    args.reserve(c->args.size());
    for (const auto& arg : c->args) {
      args.push_back(substitute(arg, name, value, value_free));
    }
    return Program::call(c->head, std::move(args));
  }
  if (const auto* x = std::get_if<Var>(&v)) {
    return x->name == name ? value : p;
  }
  if (const auto* l = std::get_if<Lambda>(&v)) {
    if (l->param == name) return p;  // shadowed
    if (!occurs_free(l->body, name)) return p;
    if (value_free.count(l->param) == 0) {
      return Program::lambda(
          l->param, substitute(l->body, name, value, value_free));
    }
    // Rename the binder so it cannot capture a free variable of `value`.
    const std::set<std::string> body_free = free_variables(l->body);
    std::string fresh;
    for (int i = 0;; ++i) {
      fresh = fmt::format("{}_{}", l->param, i);
      if (value_free.count(fresh) == 0 && body_free.count(fresh) == 0 &&
          fresh != name) {
        break;
      }
    }
    const Program renamed =
        substitute(l->body, l->param, Program::var(fresh), {fresh});
    return Program::lambda(fresh,
                           substitute(renamed, name, value, value_free));
  }
  return p;
}

}  // namespace

Program beta_reduce(const Program& fn, const Program& arg) {
  const auto* l = fn.as<Lambda>();
  if (l == nullptr) {
    throw ProgramError(
        fmt::format("beta reduction of a non-lambda: {}", render(fn)));
  }
  return substitute(l->body, l->param, arg, free_variables(arg));
}

Program fill_slots(const Program& skeleton,
                   std::span<const Program> children) {
  const auto& v = skeleton.node().value;
  if (const auto* c = std::get_if<Call>(&v)) {
    std::vector<Program> args;
    args.reserve(c->args.size());
    for (const auto& arg : c->args) args.push_back(fill_slots(arg, children));
    return Program::call(c->head, std::move(args));
  }
  if (const auto* x = std::get_if<Var>(&v)) {
    if (!is_slot_name(x->name)) return skeleton;
    const std::size_t index = std::stoul(x->name.substr(1));
    if (index >= children.size()) {
      throw ProgramError(fmt::format("slot {} has no child", x->name));
    }
    return children[index];
  }
  if (const auto* l = std::get_if<Lambda>(&v)) {
    return Program::lambda(l->param, fill_slots(l->body, children));
  }
  return skeleton;
}

std::vector<std::size_t> slot_occurrences(const Program& skeleton) {
  std::vector<std::size_t> out;
  std::function<void(const Program&)> walk = [&](const Program& p) {
    const auto& v = p.node().value;
    if (const auto* c = std::get_if<Call>(&v)) {
      for (const auto& arg : c->args) walk(arg);
    } else if (const auto* x = std::get_if<Var>(&v)) {
      if (is_slot_name(x->name)) out.push_back(std::stoul(x->name.substr(1)));
    } else if (const auto* l = std::get_if<Lambda>(&v)) {
      walk(l->body);
    }
  };
  walk(skeleton);
  return out;
}

// ------------------------------------------------------------- measures

TemplateKey template_key(const Program& p) {
  if (const auto open = free_variables(p); !open.empty()) {
    throw ProgramError(fmt::format(
        "template key of an open term (free variable '{}')", *open.begin()));
  }
  std::map<std::string, std::string> slots;         // entity id -> token
  std::map<std::string, std::size_t> next_by_type;  // type -> next index
  RenderContext ctx;
  ctx.entity_writer = [&](std::string& out, const EntityRef& e) {
    if (e.is_type_ref()) {
      out += e.id;
      return;
    }
    auto it = slots.find(e.id);
    if (it == slots.end()) {
      const std::size_t k = next_by_type[e.entity_type]++;
      it = slots.emplace(e.id, fmt::format("{}{}", e.entity_type, k)).first;
    }
    out += it->second;
  };
  TemplateKey key;
  render_into(key.value, p, ctx);
  return key;
}

std::size_t program_size(const Program& p) {
  const auto& v = p.node().value;
  if (const auto* c = std::get_if<Call>(&v)) {
    std::size_t n = 1;
    for (const auto& arg : c->args) n += program_size(arg);
    return n;
  }
  if (const auto* l = std::get_if<Lambda>(&v)) return 1 + program_size(l->body);
  return 1;
}

}  // namespace synthparse
