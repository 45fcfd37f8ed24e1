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

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracle/naive_interpreter.h"
#include "synthparse/errors.h"
#include "synthparse/executor.h"
#include "synthparse/synthesis.h"
#include "test_util.h"

namespace synthparse {
namespace {

using testing::demo_db;
using testing::demo_grammar;

// Author X: two acl papers and one naacl paper; author Y: one naacl paper.
constexpr const char* kFixture = R"(
(type paper (paper.venue venue) (paper.author author) (paper.year year)
            (paper.pages number))
(type author (author.cites author))
(type venue)
(type year)
(entity fb:en.paper.a paper)
(entity fb:en.paper.b paper)
(entity fb:en.paper.c paper)
(entity fb:en.paper.d paper)
(entity fb:en.author.x author)
(entity fb:en.author.y author)
(entity fb:en.venue.acl venue)
(entity fb:en.venue.naacl venue)
(entity fb:en.venue.emnlp venue)
(entity fb:en.year.2014 year (number 2014))
(entity fb:en.year.2021 year (number 2021))
(triple fb:en.paper.a paper.venue fb:en.venue.acl)
(triple fb:en.paper.b paper.venue fb:en.venue.acl)
(triple fb:en.paper.c paper.venue fb:en.venue.naacl)
(triple fb:en.paper.d paper.venue fb:en.venue.naacl)
(triple fb:en.paper.a paper.author fb:en.author.x)
(triple fb:en.paper.b paper.author fb:en.author.x)
(triple fb:en.paper.c paper.author fb:en.author.x)
(triple fb:en.paper.d paper.author fb:en.author.y)
(triple fb:en.paper.a paper.year fb:en.year.2014)
(triple fb:en.paper.b paper.year fb:en.year.2021)
(triple fb:en.paper.c paper.year fb:en.year.2021)
(triple fb:en.paper.a paper.pages (number 8))
(triple fb:en.paper.b paper.pages (number 4))
(triple fb:en.author.y author.cites fb:en.author.x)
)";

const Database& fixture() {
  static const Database db = load_database(kFixture);
  return db;
}

std::string run(const std::string& program, const Database& db = fixture()) {
  return execute(parse_program(program), db).to_string();
}

const char* const kPapers = "(call getProperty (call singleton fb:en.paper) (string !type))";

std::string with_papers(const std::string& tail) {
  return "(call filter " + std::string(kPapers) + " " + tail + ")";
}

TEST(DatabaseTest, LoadErrors) {
  EXPECT_THROW(load_database("(entity fb:en.paper.a paper)"), SchemaError);
  EXPECT_THROW(load_database("(type paper (paper.venue venue))\n(type venue)\n"
                             "(entity fb:en.paper.a paper)\n"
                             "(triple fb:en.paper.a paper.venue (number 3))"),
               SchemaError);
  EXPECT_THROW(load_database("(type paper"), ParseError);
  EXPECT_THROW(load_database_file("/nonexistent.db"), Error);
}

TEST(DatabaseTest, Indexes) {
  const Database& db = fixture();
  EXPECT_EQ(db.count_of_type("paper"), 4u);
  EXPECT_TRUE(db.has_property("paper.venue"));
  EXPECT_FALSE(db.has_property("paper.city"));
  EXPECT_EQ(db.objects("fb:en.paper.a", "paper.venue").size(), 1u);
  EXPECT_EQ(db.subjects(Value(*db.find_entity("fb:en.venue.acl")), "paper.venue").size(),
            2u);
}

TEST(ExecutorTest, TypeAndProperty) {
  EXPECT_EQ(run(kPapers), "{fb:en.paper.a, fb:en.paper.b, fb:en.paper.c, fb:en.paper.d}");
  EXPECT_EQ(run("(call getProperty fb:en.paper.a (string paper.venue))"), "{fb:en.venue.acl}");
  EXPECT_EQ(run("(call getProperty fb:en.venue.naacl (string !paper.venue))"),
            "{fb:en.paper.c, fb:en.paper.d}");
  EXPECT_EQ(run("(call getProperty fb:en.paper.a (string type))"), "{fb:en.paper}");
  EXPECT_EQ(run("(call count " + std::string(kPapers) + ")"), "{(number 4)}");
  EXPECT_EQ(run("(call listValue (string \"a b\"))"), "{\"a b\"}");
}

TEST(ExecutorTest, Filters) {
  EXPECT_EQ(run(with_papers("(string paper.venue) (string =) fb:en.venue.acl")),
            "{fb:en.paper.a, fb:en.paper.b}");
  // Complement among subjects that have the property (d has no year).
  EXPECT_EQ(run(with_papers("(string paper.year) (string !=) fb:en.year.2014")),
            "{fb:en.paper.b, fb:en.paper.c}");
  EXPECT_EQ(run(with_papers("(string paper.year) (string <) fb:en.year.2021")),
            "{fb:en.paper.a}");
  EXPECT_EQ(run(with_papers("(string paper.year) (string >=) (number 2021)")),
            "{fb:en.paper.b, fb:en.paper.c}");
  EXPECT_EQ(run(with_papers("(string paper.pages) (string =) (number 8)")),
            "{fb:en.paper.a}");
}

TEST(ExecutorTest, Superlatives) {
  EXPECT_EQ(run("(call superlative " + std::string(kPapers) +
                " (string max) (string paper.year))"),
            "{fb:en.paper.b, fb:en.paper.c}");
  EXPECT_EQ(run("(call superlative " + std::string(kPapers) +
                " (string min) (string paper.pages))"),
            "{fb:en.paper.b}");
  EXPECT_EQ(run("(call countSuperlative "
                "(call getProperty (call singleton fb:en.venue) (string !type)) "
                "(string max) (string !paper.venue) "
                "(call getProperty fb:en.author.x (string !paper.author)))"),
            "{fb:en.venue.acl}");
  // Without the restriction acl and naacl tie with two papers each.
  EXPECT_EQ(run("(call countSuperlative "
                "(call getProperty (call singleton fb:en.venue) (string !type)) "
                "(string max) (string !paper.venue))"),
            "{fb:en.venue.acl, fb:en.venue.naacl}");
  EXPECT_EQ(run("(call countSuperlative "
                "(call getProperty (call singleton fb:en.venue) (string !type)) "
                "(string min) (string !paper.venue))"),
            "{fb:en.venue.emnlp}");
}

ExecErrorReason reason(const std::string& program, const Database& db = fixture()) {
  const ExecResult r = execute(parse_program(program), db);
  EXPECT_FALSE(r.ok()) << program;
  return r.ok() ? ExecErrorReason::kMalformedProgram : r.error().reason;
}

TEST(ExecutorTest, ErrorsAreValues) {
  EXPECT_EQ(reason("(call getProperty fb:en.paper.a (string paper.city))"),
            ExecErrorReason::kUnknownProperty);
  EXPECT_EQ(reason(with_papers("(string paper.venue) (string <) fb:en.venue.acl")),
            ExecErrorReason::kComparatorTypeMismatch);
  EXPECT_EQ(reason("(call superlative " + std::string(kPapers) +
                   " (string max) (string paper.venue))"),
            ExecErrorReason::kSuperlativeOverNonnumeric);
  EXPECT_EQ(reason("(call superlative " +
                   with_papers("(string paper.venue) (string =) fb:en.venue.emnlp") +
                   " (string max) (string paper.year))"),
            ExecErrorReason::kEmptySuperlativeInput);
  EXPECT_EQ(reason("(call frobnicate (string a))"), ExecErrorReason::kUnboundHead);
  EXPECT_EQ(reason("(call count)"), ExecErrorReason::kMalformedProgram);
  EXPECT_EQ(reason("(lambda x (var x))"), ExecErrorReason::kMalformedProgram);
  EXPECT_EQ(reason("(call singleton fb:en.city)"), ExecErrorReason::kUnknownProperty);
  // Errors propagate through enclosing calls.
  EXPECT_EQ(reason("(call count (call getProperty fb:en.paper.a (string nope)))"),
            ExecErrorReason::kUnknownProperty);
  EXPECT_EQ(to_string(ExecErrorReason::kEmptySuperlativeInput), "empty-superlative-input");
}

TEST(ExecutorTest, DenotationsAreSets) {
  const Denotation a({Value(TextValue{"x"}), Value(TextValue{"y"}), Value(TextValue{"x"})});
  const Denotation b({Value(TextValue{"y"}), Value(TextValue{"x"})});
  EXPECT_EQ(a.size(), 2u);
  EXPECT_TRUE(denotation_equal(a, b));
}

// For each relation and object in the fixture: `=` and `!=` partition the
// subjects that have the relation, and both are subsets of the input.
TEST(ExecutorProperty, EqualityPartitionsSubjectsWithProperty) {
  const Database& db = fixture();
  for (const char* rel : {"paper.venue", "paper.author", "paper.year"}) {
    for (const auto& [id, entity] : db.entities()) {
      const std::string tail =
          std::string("(string ") + rel + ") (string OP) " + id;
      auto op = [&](const char* o) {
        std::string t = tail;
        t.replace(t.find("OP"), 2, o);
        return execute(parse_program(with_papers(t)), db).value();
      };
      const Denotation eq = op("=");
      const Denotation ne = op("!=");
      const Denotation all = execute(parse_program(kPapers), db).value();
      std::vector<Value> joined;
      for (const auto& v : eq.values()) {
        EXPECT_FALSE(ne.contains(v));
        EXPECT_TRUE(all.contains(v));
        joined.push_back(v);
      }
      for (const auto& v : ne.values()) {
        EXPECT_TRUE(all.contains(v));
        joined.push_back(v);
      }
      std::vector<Value> having;
      for (const auto& v : all.values()) {
        if (!db.objects(v.entity()->id, rel).empty()) having.push_back(v);
      }
      EXPECT_EQ(Denotation(joined), Denotation(having)) << rel << " " << id;
    }
  }
}

TEST(ExecutorProperty, SuperlativeWinnersAreSubset) {
  const std::string base = kPapers;
  for (const char* mode : {"max", "min"}) {
    const auto r = execute(parse_program("(call superlative " + base + " (string " +
                                         mode + ") (string paper.year))"),
                           fixture());
    ASSERT_TRUE(r.ok());
    const auto all = execute(parse_program(base), fixture()).value();
    for (const auto& v : r.value().values()) EXPECT_TRUE(all.contains(v));
  }
}

// Every demo program agrees with the naive interpreter on both databases.
TEST(ExecutorOracle, AgreesOnEnumeratedPrograms) {
  const Dataset d = enumerate(demo_grammar(), 6);
  ASSERT_FALSE(d.empty());
  for (const Database* db : {&demo_db(), &fixture()}) {
    oracle::NaiveInterpreter naive(*db);
    std::size_t ok = 0;
    for (const auto& e : d.examples) {
      const ExecResult got = execute(e.program, *db);
      ASSERT_EQ(oracle::disagreement(got, naive.run(e.program)), "")
          << render(e.program);
      ok += got.ok();
    }
    EXPECT_GT(ok, 0u);
  }
}

TEST(ExecutorOracle, DemoExample) {
  EXPECT_EQ(run("(call listValue (call superlative " + std::string(kPapers) +
                    " (string max) (string paper.publication_year)))",
                demo_db()),
            "{fb:en.paper.p2}");
  EXPECT_EQ(run("(call listValue (call countSuperlative "
                "(call getProperty (call singleton fb:en.venue) (string !type)) "
                "(string max) (string !paper.venue) "
                "(call getProperty fb:en.author.alan_turing (string !paper.author))))",
                demo_db()),
            "{fb:en.venue.acl, fb:en.venue.naacl}");
}

}  // namespace
}  // namespace synthparse
