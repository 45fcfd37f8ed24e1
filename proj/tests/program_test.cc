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

#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "synthparse/errors.h"
#include "synthparse/program.h"
#include "synthparse/sexpr.h"

namespace synthparse {
namespace {

TEST(RationalTest, Normalizes) {
  EXPECT_EQ(Rational(4, 8), Rational(1, 2));
  EXPECT_EQ(Rational(3, -6).to_string(), "-1/2");
  EXPECT_EQ(Rational::parse("2.5"), Rational(5, 2));
  EXPECT_EQ(Rational::parse("7/2").to_string(), "7/2");
  EXPECT_EQ(Rational::parse("-12").to_string(), "-12");
  EXPECT_LT(Rational(1, 3), Rational(1, 2));
  EXPECT_THROW(Rational(1, 0), ProgramError);
  EXPECT_THROW(Rational::parse("x"), ParseError);
}

TEST(ProgramTest, RendersCanonically) {
  const Program p = parse_program(
      "(call listValue (call filter (call getProperty (call singleton "
      "fb:en.paper) (string !type)) (string paper.venue) (string =) "
      "fb:en.venue.acl))");
  EXPECT_EQ(render(p),
            "(call listValue (call filter (call getProperty (call singleton "
            "fb:en.paper) (string !type)) (string paper.venue) (string =) "
            "fb:en.venue.acl))");
  EXPECT_EQ(render(parse_program("(number 4/2)")), "(number 2)");
  EXPECT_EQ(render(parse_program("(string \"two words\")")),
            "(string \"two words\")");
}

TEST(ProgramTest, AlphaEquivalence) {
  const Program a = parse_program("(lambda x (call f (var x)))");
  const Program b = parse_program("(lambda y (call f (var y)))");
  const Program c = parse_program("(lambda y (call f (var z)))");
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(render(a), render(b));
  EXPECT_EQ(render(a), "(lambda $0 (call f (var $0)))");
  EXPECT_EQ(render(parse_program("(lambda x (lambda x (var x)))")),
            "(lambda $0 (lambda $1 (var $1)))");
}

TEST(ProgramTest, ParseErrors) {
  EXPECT_THROW(parse_program("(call"), ParseError);
  EXPECT_THROW(parse_program("(foo 1)"), ParseError);
  EXPECT_THROW(parse_program("bare"), ParseError);
  EXPECT_THROW(parse_program("(string a b)"), ParseError);
  EXPECT_THROW(parse_program("(var $3)"), ParseError);
  EXPECT_THROW(parse_program("fb:en."), ParseError);
}

TEST(ProgramTest, BetaReduction) {
  const Program cp = parse_program(
      "(lambda x (call filter (var x) (string paper.venue) (string =) "
      "fb:en.venue.acl))");
  const Program np =
      parse_program("(call getProperty (call singleton fb:en.paper) (string !type))");
  EXPECT_EQ(render(beta_reduce(cp, np)),
            "(call filter (call getProperty (call singleton fb:en.paper) "
            "(string !type)) (string paper.venue) (string =) fb:en.venue.acl)");
  EXPECT_THROW(beta_reduce(np, cp), ProgramError);
}

TEST(ProgramTest, BetaAvoidsCapture) {
  const Program fn = parse_program("(lambda x (lambda y (call f (var x) (var y))))");
  const Program reduced = beta_reduce(fn, Program::var("y"));
  EXPECT_EQ(render(reduced), "(lambda $0 (call f (var y) (var $0)))");
  EXPECT_EQ(free_variables(reduced), std::set<std::string>{"y"});
}

TEST(ProgramTest, ShadowedParameterIsUntouched) {
  const Program fn = parse_program("(lambda x (lambda x (var x)))");
  EXPECT_EQ(beta_reduce(fn, parse_program("(string a)")),
            parse_program("(lambda z (var z))"));
}

TEST(ProgramTest, SizeCountsNodes) {
  EXPECT_EQ(program_size(parse_program("(string a)")), 1u);
  EXPECT_EQ(program_size(parse_program("(call f (string a) (number 1))")), 3u);
  EXPECT_EQ(program_size(parse_program("(lambda x (call f (var x)))")), 3u);
}

TEST(ProgramTest, TemplateKeySlotsEntitiesPerType) {
  const Program p = parse_program(
      "(call f fb:en.venue.acl fb:en.venue.naacl fb:en.venue.acl "
      "fb:en.year.2014 (call singleton fb:en.venue))");
  EXPECT_EQ(template_key(p).value,
            "(call f venue0 venue1 venue0 year0 (call singleton fb:en.venue))");
  EXPECT_THROW(template_key(Program::var("x")), ProgramError);
}

TEST(ProgramTest, TemplateKeyInvariantUnderEntityRenaming) {
  const Program a = parse_program(
      "(call filter (call singleton fb:en.paper) (string paper.venue) (string =) "
      "fb:en.venue.acl)");
  const Program b = parse_program(
      "(call filter (call singleton fb:en.paper) (string paper.venue) (string =) "
      "fb:en.venue.naacl)");
  const Program c = parse_program(
      "(call filter (call singleton fb:en.paper) (string paper.venue) (string =) "
      "fb:en.year.2014)");
  EXPECT_EQ(template_key(a), template_key(b));
  EXPECT_NE(template_key(a), template_key(c));
}

TEST(ProgramTest, SlotsFillAndList) {
  Program skel = program_from_sexpr(
      sexpr::parse_one("(call f #1 (lambda x (call g (var x) #0)) #1)"), true);
  EXPECT_EQ(slot_occurrences(skel), (std::vector<std::size_t>{1, 0, 1}));
  EXPECT_EQ(render(skel), "(call f #1 (lambda $0 (call g (var $0) #0)) #1)");
  const std::vector<Program> kids = {parse_program("(string a)"),
                                     parse_program("(number 3)")};
  EXPECT_EQ(render(fill_slots(skel, kids)),
            "(call f (number 3) (lambda $0 (call g (var $0) (string a))) (number 3))");
}

// Random closed programs over a small vocabulary.
class RandomProgram {
 public:
  explicit RandomProgram(unsigned seed) : rng_(seed) {}

  Program make(int depth) {
    std::vector<std::string> scope;
    return gen(depth, scope);
  }

 private:
  Program gen(int depth, std::vector<std::string>& scope) {
    const int choice = pick(depth <= 0 ? 4 : 7);
    switch (choice) {
      case 0:
        return Program::string(pick_of({"paper.venue", "!type", "=", "two words", "<"}));
      case 1:
        return Program::number(Rational(pick(41) - 20, 1 + pick(5)));
      case 2:
        return Program::entity(
            pick_of({"fb:en.venue.acl", "fb:en.year.2014", "fb:en.paper", "fb:en.author.a_b"}));
      case 3:
        if (!scope.empty()) return Program::var(scope[pick(scope.size())]);
        return Program::string("leaf");
      case 4:
      case 5: {
        std::vector<Program> args;
        const int n = pick(4);
        for (int i = 0; i < n; ++i) args.push_back(gen(depth - 1, scope));
        return Program::call(pick_of({"filter", "count", "listValue", "f"}),
                             std::move(args));
      }
      default: {
        const std::string param = pick_of({"x", "y", "z"});
        scope.push_back(param);
        Program body = gen(depth - 1, scope);
        scope.pop_back();
        return Program::lambda(param, std::move(body));
      }
    }
  }

  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  std::string pick_of(std::initializer_list<const char*> options) {
    return *(options.begin() + pick(options.size()));
  }

  std::mt19937 rng_;
};

TEST(ProgramProperty, RenderParseRoundTrip) {
  RandomProgram gen(7);
  for (int i = 0; i < 1000; ++i) {
    const Program p = gen.make(5);
    const std::string text = render(p);
    const Program back = parse_program(text);
    ASSERT_EQ(back, p) << text;
    ASSERT_EQ(render(back), text);
  }
}

TEST(ProgramProperty, ReductionOrderDoesNotMatter) {
  // (\x.\y.M) a b reduced outer-first equals reducing the inner redex
  // under the outer binder first.
  RandomProgram gen(11);
  const Program m = parse_program(
      "(call f (var x) (lambda z (call g (var y) (var z))) (var y) (var x))");
  for (int i = 0; i < 200; ++i) {
    const Program a = gen.make(3);
    const Program b = gen.make(3);
    const Program curried =
        Program::lambda("x", Program::lambda("y", m));
    const Program outer = beta_reduce(beta_reduce(curried, a), b);
    const Program inner_first =
        beta_reduce(Program::lambda("x", beta_reduce(Program::lambda("y", m), b)), a);
    ASSERT_EQ(outer, inner_first) << render(a) << " / " << render(b);
    ASSERT_TRUE(is_closed(outer));
  }
}

}  // namespace
}  // namespace synthparse
