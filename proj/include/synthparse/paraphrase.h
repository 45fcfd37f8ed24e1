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

#ifndef SYNTHPARSE_PARAPHRASE_H_
#define SYNTHPARSE_PARAPHRASE_H_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "synthparse/adapter.h"
#include "synthparse/dataset.h"
#include "synthparse/executor.h"
#include "synthparse/grammar.h"
#include "synthparse/scorer.h"
#include "synthparse/selection.h"

namespace synthparse {

using WhPrefixes = std::optional<std::vector<std::string>>;

class Paraphraser {
 public:
  virtual ~Paraphraser() = default;

  // At most `beam` distinct candidates. With prefixes, up to floor(beam / 2)
  // of them begin with one of the prefixes (fewer when there are not enough
  // distinct prefixed forms).
  virtual std::vector<Utterance> generate(const Utterance& u, std::size_t beam,
                                          const WhPrefixes& wh_prefixes) = 0;
  virtual std::string describe() const = 0;
};

// Returns the input unchanged.
class IdentityParaphraser : public Paraphraser {
 public:
  std::vector<Utterance> generate(const Utterance& u, std::size_t beam,
                                  const WhPrefixes& wh_prefixes) override;
  std::string describe() const override { return "identity"; }
};

// Phrase substitutions read from a TSV file: `source<TAB>replacement` per
// line, '#' comments. Every rule is tried at every occurrence, left to right
// and in file order, each producing one candidate with that single
// occurrence rewritten.
class RuleTableParaphraser : public Paraphraser {
 public:
  explicit RuleTableParaphraser(std::vector<std::pair<Utterance, Utterance>> rules);
  static RuleTableParaphraser from_text(std::string_view tsv);
  static RuleTableParaphraser from_file(const std::string& path);

  const std::vector<std::pair<Utterance, Utterance>>& rules() const {
    return rules_;
  }

  std::vector<Utterance> generate(const Utterance& u, std::size_t beam,
                                  const WhPrefixes& wh_prefixes) override;
  std::string describe() const override;

 private:
  std::vector<std::pair<Utterance, Utterance>> rules_;
};

// POST /paraphrase on a model adapter.
class RemoteParaphraser : public Paraphraser {
 public:
  explicit RemoteParaphraser(std::string base_url);

  std::vector<Utterance> generate(const Utterance& u, std::size_t beam,
                                  const WhPrefixes& wh_prefixes) override;
  std::string describe() const override;

 private:
  AdapterClient client_;
};

enum class FilterMode {
  kTemplate,    // some parse has the inherited template
  kDenotation,  // some parse executes to the inherited denotation
};

class FilterParser {
 public:
  virtual ~FilterParser() = default;

  // Best hypothesis, if any.
  virtual std::optional<Program> predict(const Utterance& u) = 0;

  // Default: compares predict(u) against `inherited`.
  virtual bool accepts(const Utterance& u, const Program& inherited,
                       FilterMode mode);

 protected:
  explicit FilterParser(const Database* db = nullptr) : db_(db) {}
  bool matches(const Program& predicted, const Program& inherited,
               FilterMode mode) const;

  const Database* db_;
};

// Chart parser over the grammar. predict returns the shallowest parse
// (ties by rendering); accepts is true when any parse matches.
class GrammarFilterParser : public FilterParser {
 public:
  GrammarFilterParser(const Grammar& g, std::size_t max_depth,
                      const Database* db = nullptr);

  std::optional<Program> predict(const Utterance& u) override;
  bool accepts(const Utterance& u, const Program& inherited,
               FilterMode mode) override;

 private:
  const Grammar& grammar_;
  std::size_t max_depth_;
};

// Question words matching the answer type of `p`: numbers get "how many",
// years and dates "when", people "who", other entities "what" and "which".
// Falls back to the full default list when the type cannot be inferred.
std::vector<std::string> wh_prefixes_for(const Program& p,
                                         const Database* db = nullptr);
const std::vector<std::string>& default_wh_prefixes();

using WhPolicy = std::function<WhPrefixes(const Example&)>;

// Candidates for every example; each inherits program, template and depth.
// Ids are "<source>.p<iteration>.<k>".
Dataset generate_paraphrases(const Dataset& d, Paraphraser& p, std::size_t beam,
                             int iteration = 1, const WhPolicy& wh = nullptr);

struct FilterResult {
  Dataset accepted;
  Dataset rejected;
  std::size_t parser_errors = 0;
};

FilterResult filter_paraphrases(const Dataset& candidates, FilterParser& parser,
                                FilterMode mode = FilterMode::kTemplate);

// Runs `<argv...> --train <jsonl> --out <path> [--val <jsonl>]`. The model
// reference is the trimmed stdout, or the --out path when stdout is empty.
class TrainerHook {
 public:
  TrainerHook(std::vector<std::string> argv, std::filesystem::path workdir);

  std::string train(const Dataset& train, const Dataset* validation,
                    const std::string& tag);

 private:
  std::vector<std::string> argv_;
  std::filesystem::path workdir_;
};

// Filter parser for an iteration, given the trainer's model reference
// (absent when no trainer hook is configured).
using ParserFactory = std::function<std::unique_ptr<FilterParser>(
    int iteration, const std::optional<std::string>& model_ref)>;

struct PipelineConfig {
  int iterations = 2;
  std::size_t beam = 10;
  int stages = 2;  // 1: stage one only, 2: both stages
  bool wh_prefix_forcing = true;
  FilterMode filter_mode = FilterMode::kTemplate;
  SelectionConfig selection;
  SamplingConfig sampling;

  void validate() const;
};

struct IterationReport {
  int stage = 1;
  int iteration = 0;
  std::size_t sources = 0;
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t duplicates = 0;  // accepted but already present
  std::size_t excluded = 0;    // accepted but held out as validation
  std::size_t added = 0;
  std::size_t dataset_size = 0;
  std::size_t parser_errors = 0;
  std::optional<std::string> model_ref;

  double acceptance_rate() const;
};

struct StageContext {
  Paraphraser* paraphraser = nullptr;
  ParserFactory parser_factory;
  TrainerHook* trainer = nullptr;
  Scorer* scorer = nullptr;  // scores stage one's output before sampling
  WhPolicy wh;
  // When set, writes iter-<n>/{candidates,accepted,rejected,dataset}.jsonl.
  std::optional<std::filesystem::path> out_dir;
};

struct StageResult {
  Dataset dataset;
  std::vector<IterationReport> iterations;
  std::optional<std::string> final_model_ref;
};

// Iteratively paraphrases the current dataset and appends accepted,
// previously unseen candidates. Examples whose (utterance, program) pair is
// in `exclude` are never added.
StageResult run_stage(const Dataset& seed, const PipelineConfig& cfg,
                      StageContext& ctx, int stage = 1,
                      const Dataset* validation = nullptr,
                      const std::optional<std::string>& initial_model_ref =
                          std::nullopt);

struct TwoStageResult {
  Dataset stage_one;
  Dataset validation;
  Dataset d_par;
  std::vector<IterationReport> iterations;
};

// Stage one without validation, sample D_val from its output, then stage two
// from the seed minus D_val, starting from stage one's final parser.
TwoStageResult run_two_stage(const Dataset& seed, const PipelineConfig& cfg,
                             StageContext& ctx);

}  // namespace synthparse

#endif  // SYNTHPARSE_PARAPHRASE_H_
