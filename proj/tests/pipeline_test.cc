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

#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "synthparse/errors.h"
#include "synthparse/io.h"
#include "synthparse/pipeline.h"
#include "test_util.h"

namespace synthparse {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using testing::data_path;

// Demo config with the smaller settings used throughout these tests.
Json small_config() {
  Json j = Json::parse(io::read_file(data_path("demo.config.json")));
  j["max_depth"] = 5;
  j["pipeline"]["filter_max_depth"] = 5;
  j["pipeline"]["iterations"] = 1;
  j["sampling"]["val_size"] = 10;
  return j;
}

RunConfig parse(const Json& j) { return parse_config(j.dump(), SYNTHPARSE_TEST_DATA_DIR); }

std::string pointer_of(const Json& j) {
  try {
    parse(j);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<accepted>";
}

TEST(ConfigTest, ParsesDemo) {
  const RunConfig cfg = load_config(data_path("demo.config.json"));
  EXPECT_EQ(cfg.seed, 20260101u);
  EXPECT_EQ(cfg.pipeline.sampling.seed, 20260101u);
  EXPECT_EQ(cfg.pipeline.sampling.size, 20u);
  EXPECT_EQ(cfg.pipeline.beam, 10u);
  EXPECT_EQ(cfg.scorer.kind, "unigram");
  EXPECT_EQ(cfg.resolve(cfg.grammar), data_path("demo.grammar"));
  EXPECT_TRUE(fs::exists(cfg.resolve(cfg.database)));
}

TEST(ConfigTest, SnapshotRoundTrips) {
  const RunConfig cfg = parse(small_config());
  const std::string snap = config_to_json(cfg);
  EXPECT_EQ(config_to_json(parse_config(snap, SYNTHPARSE_TEST_DATA_DIR)), snap);
}

TEST(ConfigTest, ErrorsCarryJsonPointers) {
  Json j = small_config();
  j["bogus"] = 1;
  EXPECT_EQ(pointer_of(j), "/bogus");
  j = small_config();
  j["pipeline"]["beamz"] = 3;
  EXPECT_EQ(pointer_of(j), "/pipeline/beamz");
  j = small_config();
  j["seed"] = "x";
  EXPECT_EQ(pointer_of(j), "/seed");
  j = small_config();
  j.erase("grammar");
  EXPECT_EQ(pointer_of(j), "/grammar");
  j = small_config();
  j["scorer"]["kind"] = "trigram";
  EXPECT_EQ(pointer_of(j), "/scorer/kind");
  j = small_config();
  j["pipeline"]["iterations"] = 0;
  EXPECT_EQ(pointer_of(j), "/pipeline/iterations");
  j = small_config();
  j["selection"]["delta"] = -1;
  EXPECT_EQ(pointer_of(j), "/selection/delta");
  j = small_config();
  j["pipeline"]["filter_mode"] = "denotation";
  j.erase("database");
  EXPECT_EQ(pointer_of(j), "/pipeline/filter_mode");
  j = small_config();
  j["trainer"] = {{"command", {"ok", 3}}};
  EXPECT_EQ(pointer_of(j), "/trainer/command/1");
  j = small_config();
  j.erase("paraphraser");
  EXPECT_EQ(pointer_of(j), "/paraphraser");
  EXPECT_THROW(parse_config("{", ""), ConfigError);
  try {
    parse_config("[]", "");
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()), "config /: expected an object");
  }
}

TEST(ConfigTest, RemoteUrlComesFromEnvironment) {
  ScorerSpec spec;
  spec.kind = "remote";
  spec.url = "http://configured:1";
  ::setenv("SYNTHPARSE_ADAPTER_URL", "http://env:2", 1);
  EXPECT_EQ(make_scorer(spec)->describe(), "remote(http://env:2)");
  ::unsetenv("SYNTHPARSE_ADAPTER_URL");
  EXPECT_EQ(make_scorer(spec)->describe(), "remote(http://configured:1)");
  spec.url.clear();
  EXPECT_THROW(make_scorer(spec), ConfigError);
  ParaphraserSpec p;
  p.kind = "identity";
  EXPECT_EQ(make_paraphraser(p)->describe(), "identity");
}

TEST(RunDirTest, LockAndNaming) {
  testing::TempDir dir;
  const fs::path a = make_run_dir(dir.path(), 7);
  const fs::path b = make_run_dir(dir.path(), 7);
  EXPECT_NE(a, b);
  EXPECT_NE(a.filename().string().find("-7"), std::string::npos);
  {
    RunLock lock(a);
    EXPECT_THROW(RunLock again(a), Error);
  }
  EXPECT_NO_THROW(RunLock again(a));
}

TEST(PipelineTest, DeterministicRerun) {
  testing::TempDir dir;
  const RunConfig cfg = parse(small_config());
  const PipelineOutcome one = run_pipeline(cfg, dir.path() / "one");
  const PipelineOutcome two = run_pipeline(cfg, dir.path() / "two");
  ASSERT_TRUE(one.ok);
  EXPECT_EQ(manifest_without_timing(one.manifest_json),
            manifest_without_timing(two.manifest_json));
  for (const char* f : {"d_can.jsonl", "d_can_selected.jsonl", "d_par_stage1.jsonl",
                        "d_val.jsonl", "d_par.jsonl"}) {
    EXPECT_EQ(io::read_file((one.run_dir / f).string()),
              io::read_file((two.run_dir / f).string()))
        << f;
  }
  const Json m = Json::parse(one.manifest_json);
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["counts"]["enumerated"], 112);
  EXPECT_EQ(m["counts"]["sampled"], 10);
  EXPECT_EQ(m["inputs"]["grammar"]["sha256"],
            io::sha256_hex(io::read_file(data_path("demo.grammar"))));
  EXPECT_FALSE(fs::exists(one.run_dir / ".lock"));
  EXPECT_TRUE(fs::exists(one.run_dir / "stage2" / "iter-1" / "accepted.jsonl"));
  // Counts recomputed from the written datasets.
  EXPECT_EQ(read_jsonl((one.run_dir / "d_par.jsonl").string()).size(),
            m["counts"]["d_par"].get<std::size_t>());
  EXPECT_EQ(read_jsonl((one.run_dir / "d_val.jsonl").string()).size(), 10u);
  std::size_t accepted = 0, judged = 0;
  for (const auto& it : m["iterations"]) {
    accepted += it["accepted"].get<std::size_t>();
    judged += it["accepted"].get<std::size_t>() + it["rejected"].get<std::size_t>();
  }
  EXPECT_DOUBLE_EQ(m["acceptance_rate"].get<double>(),
                   static_cast<double>(accepted) / static_cast<double>(judged));
}

TEST(PipelineTest, DifferentSeedChangesValidation) {
  testing::TempDir dir;
  Json j = small_config();
  const PipelineOutcome a = run_pipeline(parse(j), dir.path() / "a");
  j["seed"] = 99;
  const PipelineOutcome b = run_pipeline(parse(j), dir.path() / "b");
  EXPECT_NE(io::read_file((a.run_dir / "d_val.jsonl").string()),
            io::read_file((b.run_dir / "d_val.jsonl").string()));
  EXPECT_EQ(io::read_file((a.run_dir / "d_can.jsonl").string()),
            io::read_file((b.run_dir / "d_can.jsonl").string()));
}

TEST(PipelineTest, FailureLeavesMarker) {
  testing::TempDir dir;
  Json j = small_config();
  j["grammar"] = "missing.grammar";
  const RunConfig cfg = parse(j);
  EXPECT_THROW(run_pipeline(cfg, dir.path() / "run"), Error);
  EXPECT_TRUE(fs::exists(dir.path() / "run" / "FAILED"));
  const Json m = Json::parse(io::read_file((dir.path() / "run" / "manifest.json").string()));
  EXPECT_EQ(m["status"], "failed");
  EXPECT_NE(m["error"].get<std::string>().find("missing.grammar"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir.path() / "run" / ".lock"));
}

}  // namespace
}  // namespace synthparse
