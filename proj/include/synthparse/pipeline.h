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

#ifndef SYNTHPARSE_PIPELINE_H_
#define SYNTHPARSE_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "synthparse/errors.h"
#include "synthparse/paraphrase.h"
#include "synthparse/scorer.h"
#include "synthparse/selection.h"

namespace synthparse {

inline constexpr const char* kVersion = "0.1.0";

// Configuration problem; `pointer` is the JSON pointer of the bad field.
class ConfigError : public UsageError {
 public:
  ConfigError(const std::string& pointer, const std::string& message);
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct ScorerSpec {
  std::string kind = "unigram";  // unigram | uniform | remote
  std::string corpus;            // unigram
  double token_logprob = -0.6931471805599453;  // uniform
  std::string url;               // remote
  std::size_t batch_size = 64;   // remote
};

struct ParaphraserSpec {
  std::string kind = "rule-table";  // identity | rule-table | remote
  std::string rules;
  std::string url;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string grammar;
  // Extra rules appended to `grammar` for the filter parser only.
  std::string filter_grammar;
  std::string database;  // optional
  std::size_t max_depth = 6;
  std::size_t max_examples = 10'000'000;
  std::size_t filter_max_depth = 6;
  ScorerSpec scorer;
  ParaphraserSpec paraphraser;
  PipelineConfig pipeline;
  std::vector<std::string> trainer_command;  // empty: no trainer hook
  std::string runs_dir = "runs";

  // Paths above are resolved against this directory.
  std::filesystem::path base_dir;

  std::string resolve(const std::string& path) const;
};

// Parses and validates a JSON configuration document. Unknown keys and type
// mismatches raise ConfigError.
RunConfig parse_config(std::string_view json_text,
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::string& path);
// Normalized JSON snapshot (all defaults filled in).
std::string config_to_json(const RunConfig& cfg);

// Builds the configured scorer. For a remote scorer SYNTHPARSE_ADAPTER_URL
// overrides the configured URL.
std::unique_ptr<Scorer> make_scorer(const ScorerSpec& spec,
                                    const RunConfig* base = nullptr);
std::unique_ptr<Paraphraser> make_paraphraser(const ParaphraserSpec& spec,
                                              const RunConfig* base = nullptr);

// Exclusive advisory lock on a run directory (a `.lock` file created with
// O_EXCL). Throws Error when another writer holds it.
class RunLock {
 public:
  explicit RunLock(std::filesystem::path dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Fresh `<runs_dir>/<UTC timestamp>-<seed>[-n]` directory.
std::filesystem::path make_run_dir(const std::filesystem::path& runs_dir,
                                   std::uint64_t seed);

struct PipelineOutcome {
  std::filesystem::path run_dir;
  std::string manifest_json;
  bool ok = false;
  std::string error;
};

// Full run: synthesize, constrain, score, select, two-stage paraphrasing.
// Every dataset and `manifest.json` land in the run directory. On failure
// a FAILED marker and a partial manifest are written and the exception is
// rethrown. `run_dir` overrides the generated directory when non-empty.
PipelineOutcome run_pipeline(const RunConfig& cfg,
                             const std::filesystem::path& run_dir = {});

// The manifest with its "timing" member removed, for comparisons.
std::string manifest_without_timing(const std::string& manifest_json);

}  // namespace synthparse

#endif  // SYNTHPARSE_PIPELINE_H_
