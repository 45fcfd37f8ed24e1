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

#include <sys/stat.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "synthparse/errors.h"
#include "synthparse/io.h"
#include "synthparse/paraphrase.h"
#include "synthparse/scorer.h"
#include "synthparse/synthesis.h"
#include "test_util.h"

namespace synthparse {
namespace {

using testing::data_path;
using testing::demo_db;
using testing::demo_filter_grammar;
using testing::demo_grammar;

std::vector<std::string> texts(const std::vector<Utterance>& us) {
  std::vector<std::string> out;
  for (const auto& u : us) out.push_back(join_tokens(u));
  return out;
}

std::set<std::string> keys(const Dataset& d) {
  std::set<std::string> out;
  for (const auto& e : d.examples) out.insert(e.pair_key());
  return out;
}

TEST(IdentityTest, ReturnsInput) {
  IdentityParaphraser p;
  EXPECT_EQ(texts(p.generate(tokenize("paper in acl"), 5, std::nullopt)),
            (std::vector<std::string>{"paper in acl"}));
  EXPECT_TRUE(p.generate(tokenize("paper"), 0, std::nullopt).empty());
}

TEST(RuleTableTest, RewritesEachOccurrence) {
  auto p = RuleTableParaphraser::from_text("# comment\nlargest\tbiggest\na\tc\n");
  EXPECT_EQ(p.rules().size(), 2u);
  EXPECT_EQ(texts(p.generate(tokenize("largest city"), 5, std::nullopt)),
            (std::vector<std::string>{"biggest city"}));
  EXPECT_EQ(texts(p.generate(tokenize("a b a"), 5, std::nullopt)),
            (std::vector<std::string>{"c b a", "a b c"}));
  EXPECT_EQ(texts(p.generate(tokenize("nothing here"), 5, std::nullopt)),
            (std::vector<std::string>{"nothing here"}));
}

TEST(RuleTableTest, ForcedPrefixesFillHalfTheBeam) {
  auto p = RuleTableParaphraser::from_text("largest\tbiggest\ncity\ttown\n");
  const WhPrefixes wh = std::vector<std::string>{"what", "which"};
  const auto out = texts(p.generate(tokenize("largest city"), 5, wh));
  EXPECT_EQ(out, (std::vector<std::string>{"what biggest city", "which biggest city",
                                           "biggest city", "largest town"}));
  // Odd beams round the forced half down.
  EXPECT_EQ(texts(p.generate(tokenize("largest city"), 3, wh)).size(), 3u);
}

TEST(RuleTableTest, ParseErrors) {
  EXPECT_THROW(RuleTableParaphraser::from_text("no tab here\n"), ParseError);
  EXPECT_THROW(RuleTableParaphraser::from_text("\tx\n"), ParseError);
  EXPECT_THROW(RuleTableParaphraser::from_file("/nonexistent.tsv"), Error);
  EXPECT_EQ(RuleTableParaphraser::from_file(data_path("demo.rules")).rules().size(), 11u);
}

TEST(RuleTableProperty, BeamBoundAndDistinct) {
  auto p = RuleTableParaphraser::from_file(data_path("demo.rules"));
  const Dataset d = enumerate(demo_grammar(), 6);
  for (std::size_t beam : {1u, 2u, 3u, 10u}) {
    for (const auto& e : d.examples) {
      const WhPrefixes wh = wh_prefixes_for(e.program, &demo_db());
      const auto out = p.generate(e.utterance, beam, wh);
      ASSERT_LE(out.size(), beam);
      ASSERT_FALSE(out.empty());
      const auto t = texts(out);
      ASSERT_EQ(std::set<std::string>(t.begin(), t.end()).size(), t.size());
      std::size_t prefixed = 0;
      for (const auto& c : out) {
        for (const auto& w : *wh) {
          const auto pt = tokenize(w);
          if (c.size() >= pt.size() && std::equal(pt.begin(), pt.end(), c.begin())) {
            ++prefixed;
            break;
          }
        }
      }
      // Forced candidates are limited by the distinct (base, prefix) pairs.
      std::set<std::string> possible;
      std::vector<Utterance> bases = p.generate(e.utterance, 1000, std::nullopt);
      bases.push_back(e.utterance);
      for (const auto& b : bases) {
        for (const auto& w : *wh) {
          const auto pt = tokenize(w);
          Utterance c = b;
          if (!(c.size() >= pt.size() && std::equal(pt.begin(), pt.end(), c.begin()))) {
            c.insert(c.begin(), pt.begin(), pt.end());
          }
          if (c != e.utterance) possible.insert(join_tokens(c));
        }
      }
      ASSERT_GE(prefixed, std::min(beam / 2, possible.size())) << e.utterance_text();
    }
  }
}

TEST(WhPrefixTest, AnswerTypes) {
  const Database& db = demo_db();
  auto wh = [&](const std::string& p) { return wh_prefixes_for(parse_program(p), &db); };
  const std::string papers = "(call getProperty (call singleton fb:en.paper) (string !type))";
  EXPECT_EQ(wh("(call listValue (call count " + papers + "))"),
            (std::vector<std::string>{"how many"}));
  EXPECT_EQ(wh("(call listValue " + papers + ")"), (std::vector<std::string>{"what", "which"}));
  EXPECT_EQ(wh("(call getProperty fb:en.paper.p1 (string paper.publication_year))"),
            (std::vector<std::string>{"when"}));
  EXPECT_EQ(wh("(call getProperty fb:en.paper.p1 (string paper.author))"),
            (std::vector<std::string>{"who"}));
  EXPECT_EQ(wh("(call getProperty fb:en.paper.p1 (string paper.venue))"),
            (std::vector<std::string>{"where", "which"}));
  EXPECT_EQ(wh("(call getProperty fb:en.venue.acl (string !paper.venue))"),
            (std::vector<std::string>{"what", "which"}));
  EXPECT_EQ(wh_prefixes_for(parse_program("(call mystery)")), default_wh_prefixes());
}

TEST(GenerateTest, IdsAndProvenance) {
  Dataset d;
  d.examples.push_back(make_example("can-000007", tokenize("paper by alan turing"),
                                    parse_program("(call listValue fb:en.author.alan_turing)"),
                                    3));
  d.examples[0].score = -3.0;
  auto p = RuleTableParaphraser::from_file(data_path("demo.rules"));
  const Dataset out = generate_paraphrases(d, p, 10, 2);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.examples[0].id, "can-000007.p2.0");
  EXPECT_EQ(out.examples[0].utterance_text(), "publication by alan turing");
  EXPECT_EQ(out.examples[1].utterance_text(), "paper written by alan turing");
  EXPECT_EQ(out.examples[1].provenance, Provenance::paraphrased("can-000007", 2));
  EXPECT_EQ(out.examples[1].program, d.examples[0].program);
  EXPECT_EQ(out.examples[1].depth, 3u);
  EXPECT_FALSE(out.examples[1].score);
  EXPECT_THROW(generate_paraphrases(d, p, 0), UsageError);
}

// The parse of `utterance` whose rendering mentions `needle`.
Program program_of(const std::string& utterance, const std::string& needle = "") {
  for (const auto& p : parse_chart(demo_grammar(), tokenize(utterance), 6)) {
    if (render(p.program).find(needle) != std::string::npos) return p.program;
  }
  ADD_FAILURE() << "no parse for " << utterance;
  return parse_program("(string none)");
}

TEST(FilterTest, GrammarFilterAcceptsAndRejects) {
  GrammarFilterParser parser(demo_filter_grammar(), 6, &demo_db());
  const Program cited = program_of("author cited by alan turing");
  EXPECT_FALSE(parser.accepts(tokenize("xyzzy"), cited, FilterMode::kTemplate));
  EXPECT_FALSE(parser.accepts(tokenize("who cites alan turing"), cited, FilterMode::kTemplate));
  EXPECT_TRUE(parser.accepts(tokenize("researcher cited by alan turing"), cited,
                             FilterMode::kTemplate));
  const Program acl = program_of("paper in acl", "paper.venue");
  EXPECT_TRUE(parser.accepts(tokenize("publication published in acl"), acl,
                             FilterMode::kTemplate));
  // Same template, different entity: accepted by template, not by denotation.
  EXPECT_TRUE(parser.accepts(tokenize("paper in naacl"), acl, FilterMode::kTemplate));
  EXPECT_FALSE(parser.accepts(tokenize("paper in naacl"), acl, FilterMode::kDenotation));
  EXPECT_TRUE(parser.accepts(tokenize("publication in acl"), acl, FilterMode::kDenotation));
  EXPECT_FALSE(parser.predict(tokenize("xyzzy")));
  EXPECT_TRUE(parser.predict(tokenize("paper")));
}

TEST(FilterTest, ErrorsAreCountedAsRejections) {
  GrammarFilterParser no_db(demo_filter_grammar(), 6);
  Dataset d;
  d.examples.push_back(make_example("a", tokenize("paper"), program_of("paper"), 2));
  const FilterResult r = filter_paraphrases(d, no_db, FilterMode::kDenotation);
  EXPECT_EQ(r.parser_errors, 1u);
  EXPECT_EQ(r.rejected.size(), 1u);
  EXPECT_TRUE(r.accepted.empty());
}

// Parser factory over the filter grammar; ignores the model reference.
ParserFactory grammar_factory() {
  return [](int, const std::optional<std::string>&) {
    return std::make_unique<GrammarFilterParser>(demo_filter_grammar(), 6, &demo_db());
  };
}

Dataset small_seed() {
  Dataset d = enumerate(demo_grammar(), 4);
  d.tag = DatasetTag::kCanonical;
  return d;
}

void check_report(const IterationReport& r) {
  EXPECT_EQ(r.accepted + r.rejected, r.candidates);
  EXPECT_EQ(r.added + r.duplicates + r.excluded, r.accepted);
  EXPECT_EQ(r.dataset_size, r.sources + r.added);
}

TEST(StageTest, IdentityIsAFixedPoint) {
  IdentityParaphraser p;
  StageContext ctx{&p, grammar_factory(), nullptr, nullptr, nullptr, std::nullopt};
  PipelineConfig cfg;
  cfg.iterations = 3;
  const Dataset seed = small_seed();
  const StageResult r = run_stage(seed, cfg, ctx);
  EXPECT_EQ(to_jsonl(r.dataset), to_jsonl(seed));
  for (const auto& it : r.iterations) {
    EXPECT_EQ(it.added, 0u);
    check_report(it);
  }
}

TEST(StageTest, CountsAddUpAndDatasetGrows) {
  auto p = RuleTableParaphraser::from_file(data_path("demo.rules"));
  testing::TempDir dir;
  StageContext ctx{&p, grammar_factory(), nullptr, nullptr, nullptr, dir.path()};
  PipelineConfig cfg;
  cfg.iterations = 2;
  const Dataset seed = small_seed();
  const StageResult r = run_stage(seed, cfg, ctx);
  ASSERT_EQ(r.iterations.size(), 2u);
  std::size_t prev = seed.size();
  for (const auto& it : r.iterations) {
    check_report(it);
    EXPECT_EQ(it.sources, prev);
    EXPECT_GE(it.dataset_size, prev);
    prev = it.dataset_size;
  }
  EXPECT_GT(r.iterations[0].added, 0u);
  EXPECT_EQ(r.dataset.size(), prev);
  // The seed is a prefix of the result, and every added example passes the filter.
  for (std::size_t i = 0; i < seed.size(); ++i) {
    EXPECT_EQ(r.dataset.examples[i].id, seed.examples[i].id);
  }
  GrammarFilterParser check(demo_filter_grammar(), 6, &demo_db());
  for (std::size_t i = seed.size(); i < r.dataset.size(); ++i) {
    const auto& e = r.dataset.examples[i];
    EXPECT_TRUE(check.accepts(e.utterance, e.program, FilterMode::kTemplate));
    EXPECT_EQ(e.provenance.kind, Provenance::Kind::kParaphrased);
  }
  // Recount from the written files.
  const Dataset acc = read_jsonl((dir.path() / "stage1/iter-1/accepted.jsonl").string());
  const Dataset rej = read_jsonl((dir.path() / "stage1/iter-1/rejected.jsonl").string());
  EXPECT_EQ(acc.size(), r.iterations[0].accepted);
  EXPECT_EQ(rej.size(), r.iterations[0].rejected);
  EXPECT_EQ(read_jsonl((dir.path() / "stage1/iter-2/dataset.jsonl").string()).size(),
            r.dataset.size());
}

TEST(StageTest, MoreIterationsNeverShrink) {
  auto p = RuleTableParaphraser::from_file(data_path("demo.rules"));
  StageContext ctx{&p, grammar_factory(), nullptr, nullptr, nullptr, std::nullopt};
  PipelineConfig one;
  one.iterations = 1;
  PipelineConfig two;
  two.iterations = 2;
  const Dataset seed = small_seed();
  const auto a = keys(run_stage(seed, one, ctx).dataset);
  const auto b = keys(run_stage(seed, two, ctx).dataset);
  EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
  EXPECT_GE(b.size(), a.size());
}

TEST(TwoStageTest, ValidationIsHeldOut) {
  auto p = RuleTableParaphraser::from_file(data_path("demo.rules"));
  UniformScorer scorer(-1.0);
  StageContext ctx{&p, grammar_factory(), nullptr, &scorer, nullptr, std::nullopt};
  ctx.wh = [](const Example& e) -> WhPrefixes {
    return wh_prefixes_for(e.program, &demo_db());
  };
  PipelineConfig cfg;
  cfg.iterations = 2;
  cfg.sampling.size = 15;
  cfg.sampling.seed = 4;
  const Dataset seed = small_seed();
  const TwoStageResult r = run_two_stage(seed, cfg, ctx);
  EXPECT_EQ(r.validation.size(), 15u);
  EXPECT_EQ(r.iterations.size(), 4u);
  const auto val = keys(r.validation);
  for (const auto& e : r.d_par.examples) EXPECT_FALSE(val.count(e.pair_key())) << e.id;
  const auto one = keys(r.stage_one);
  for (const auto& k : val) EXPECT_TRUE(one.count(k));
  std::size_t accepted = 0, judged = 0;
  for (const auto& it : r.iterations) {
    check_report(it);
    accepted += it.accepted;
    judged += it.accepted + it.rejected;
    if (it.stage == 1) EXPECT_EQ(it.excluded, 0u);
  }
  EXPECT_GT(judged, 0u);
  const double rate = static_cast<double>(accepted) / static_cast<double>(judged);
  EXPECT_GT(rate, 0.0);
  EXPECT_LT(rate, 1.0);
  // A scorer is required to sample.
  StageContext no_scorer{&p, grammar_factory(), nullptr, nullptr, nullptr, std::nullopt};
  EXPECT_THROW(run_two_stage(seed, cfg, no_scorer), UsageError);
}

TEST(TrainerHookTest, RunsCommandAndReadsModelRef) {
  testing::TempDir dir;
  const std::string script = dir.file("train.sh");
  {
    std::ofstream out(script);
    out << "#!/bin/sh\n"
           "# --train T --out O [--val V]\n"
           "[ \"$1\" = --train ] && [ -s \"$2\" ] && [ \"$3\" = --out ] || exit 3\n"
           "lines=$(wc -l < \"$2\" | tr -d ' ')\n"
           "echo \"$@\" >> " << dir.file("calls.log") << "\n"
           "if [ \"$5\" = --val ]; then echo \"model-$lines-val\"; fi\n";
  }
  ::chmod(script.c_str(), 0755);
  TrainerHook hook({script}, dir.path() / "work");
  Dataset d = small_seed();
  EXPECT_EQ(hook.train(d, &d, "t1"), "model-" + std::to_string(d.size()) + "-val");
  // Empty stdout: the --out path is the reference.
  EXPECT_EQ(hook.train(d, nullptr, "t2"), (dir.path() / "work" / "t2" / "model").string());

  auto p = RuleTableParaphraser::from_file(data_path("demo.rules"));
  std::vector<std::optional<std::string>> refs;
  ParserFactory factory = [&](int, const std::optional<std::string>& ref) {
    refs.push_back(ref);
    return grammar_factory()(0, ref);
  };
  StageContext ctx{&p, factory, &hook, nullptr, nullptr, std::nullopt};
  PipelineConfig cfg;
  cfg.iterations = 2;
  const StageResult r = run_stage(d, cfg, ctx, 2, nullptr, std::string("seeded"));
  ASSERT_EQ(refs.size(), 2u);
  EXPECT_EQ(refs[0], std::optional<std::string>("seeded"));
  EXPECT_NE(refs[1], refs[0]);
  EXPECT_TRUE(r.final_model_ref.has_value());

  TrainerHook failing({"/bin/false"}, dir.path() / "work");
  EXPECT_THROW(failing.train(d, nullptr, "t3"), TransportError);
  TrainerHook missing({dir.file("does-not-exist")}, dir.path() / "work");
  EXPECT_THROW(missing.train(d, nullptr, "t4"), TransportError);
  EXPECT_THROW(TrainerHook({}, dir.path()), UsageError);
}

TEST(PipelineConfigTest, Validates) {
  PipelineConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.stages = 3;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg.stages = 2;
  cfg.beam = 0;
  EXPECT_THROW(cfg.validate(), UsageError);
}

}  // namespace
}  // namespace synthparse
