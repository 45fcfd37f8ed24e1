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

#include "synthparse/pipeline.h"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <map>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "synthparse/executor.h"
#include "synthparse/grammar.h"
#include "synthparse/io.h"
#include "synthparse/synthesis.h"

namespace synthparse {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

ConfigError::ConfigError(const std::string& pointer, const std::string& message)
    : UsageError(fmt::format("config {}: {}", pointer.empty() ? "/" : pointer,
                             message)),
      pointer_(pointer) {}

std::string RunConfig::resolve(const std::string& path) const {
  if (path.empty()) return path;
  const fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (base_dir / p).lexically_normal().string();
}

namespace {

// Walks a JSON object, tracking the pointer and rejecting unknown keys.
class Fields {
 public:
  Fields(const Json& j, std::string pointer) : j_(j), pointer_(std::move(pointer)) {
    if (!j_.is_object()) throw ConfigError(pointer_, "expected an object");
  }

  ~Fields() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) {
        throw ConfigError(pointer_ + "/" + key, "unknown field");
      }
    }
  }

  std::string at(const std::string& key) const { return pointer_ + "/" + key; }

  const Json* find(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void string(const std::string& key, std::string& out, bool required = false) {
    const Json* v = find(key);
    if (v == nullptr) {
      if (required) throw ConfigError(at(key), "required string is missing");
      return;
    }
    if (!v->is_string()) throw ConfigError(at(key), "expected a string");
    out = v->get<std::string>();
  }

  template <typename T>
  void count(const std::string& key, T& out, std::uint64_t min = 0) {
    const Json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
    if (v->is_number_unsigned()) {
      const auto n = v->get<std::uint64_t>();
      if (n < min) throw ConfigError(at(key), fmt::format("must be at least {}", min));
      out = static_cast<T>(n);
    } else {
      const auto n = v->get<std::int64_t>();
      if (n < 0 || static_cast<std::uint64_t>(n) < min) {
        throw ConfigError(at(key), fmt::format("must be at least {}", min));
      }
      out = static_cast<T>(n);
    }
  }

  void real(const std::string& key, double& out) {
    const Json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_number()) throw ConfigError(at(key), "expected a number");
    out = v->get<double>();
  }

  void boolean(const std::string& key, bool& out) {
    const Json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
    out = v->get<bool>();
  }

 private:
  const Json& j_;
  std::string pointer_;
  std::set<std::string> used_;
};

void one_of(const std::string& pointer, const std::string& value,
            std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw ConfigError(pointer, fmt::format("'{}' is not one of {}", value, list));
}

}  // namespace

RunConfig parse_config(std::string_view json_text, const fs::path& base_dir) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw ConfigError("", fmt::format("invalid JSON: {}", e.what()));
  }
  RunConfig cfg;
  cfg.base_dir = base_dir;
  {
    Fields f(root, "");
    f.count("seed", cfg.seed);
    f.string("grammar", cfg.grammar, true);
    f.string("filter_grammar", cfg.filter_grammar);
    f.string("database", cfg.database);
    f.count("max_depth", cfg.max_depth, 1);
    f.count("max_examples", cfg.max_examples, 1);
    f.string("runs_dir", cfg.runs_dir);
    if (const Json* s = f.find("scorer")) {
      Fields g(*s, "/scorer");
      g.string("kind", cfg.scorer.kind);
      one_of("/scorer/kind", cfg.scorer.kind, {"unigram", "uniform", "remote"});
      g.string("corpus", cfg.scorer.corpus);
      g.real("token_logprob", cfg.scorer.token_logprob);
      g.string("url", cfg.scorer.url);
      g.count("batch_size", cfg.scorer.batch_size, 1);
      if (cfg.scorer.kind == "unigram" && cfg.scorer.corpus.empty()) {
        throw ConfigError("/scorer/corpus", "unigram scorer needs a corpus");
      }
    } else {
      throw ConfigError("/scorer", "required object is missing");
    }
    if (const Json* p = f.find("paraphraser")) {
      Fields g(*p, "/paraphraser");
      g.string("kind", cfg.paraphraser.kind);
      one_of("/paraphraser/kind", cfg.paraphraser.kind,
             {"identity", "rule-table", "remote"});
      g.string("rules", cfg.paraphraser.rules);
      g.string("url", cfg.paraphraser.url);
      if (cfg.paraphraser.kind == "rule-table" && cfg.paraphraser.rules.empty()) {
        throw ConfigError("/paraphraser/rules", "rule-table paraphraser needs rules");
      }
    } else {
      throw ConfigError("/paraphraser", "required object is missing");
    }
    if (const Json* s = f.find("selection")) {
      Fields g(*s, "/selection");
      g.count("top_k", cfg.pipeline.selection.top_k, 1);
      g.real("delta", cfg.pipeline.selection.delta);
      if (!(cfg.pipeline.selection.delta >= 0.0)) {
        throw ConfigError("/selection/delta", "must be >= 0");
      }
    }
    if (const Json* s = f.find("sampling")) {
      Fields g(*s, "/sampling");
      g.real("alpha", cfg.pipeline.sampling.alpha);
      if (!(cfg.pipeline.sampling.alpha >= 0.0)) {
        throw ConfigError("/sampling/alpha", "must be >= 0");
      }
      g.count("val_size", cfg.pipeline.sampling.size, 1);
    }
    if (const Json* s = f.find("pipeline")) {
      Fields g(*s, "/pipeline");
      g.count("iterations", cfg.pipeline.iterations, 1);
      g.count("beam", cfg.pipeline.beam, 1);
      g.count("stages", cfg.pipeline.stages, 1);
      if (cfg.pipeline.stages > 2) throw ConfigError("/pipeline/stages", "must be 1 or 2");
      g.boolean("wh_prefix_forcing", cfg.pipeline.wh_prefix_forcing);
      std::string mode = "template";
      g.string("filter_mode", mode);
      one_of("/pipeline/filter_mode", mode, {"template", "denotation"});
      cfg.pipeline.filter_mode =
          mode == "template" ? FilterMode::kTemplate : FilterMode::kDenotation;
      g.count("filter_max_depth", cfg.filter_max_depth, 1);
    }
    if (const Json* t = f.find("trainer")) {
      Fields g(*t, "/trainer");
      const Json* cmd = g.find("command");
      if (cmd == nullptr || !cmd->is_array() || cmd->empty()) {
        throw ConfigError("/trainer/command", "expected a non-empty array of strings");
      }
      for (std::size_t i = 0; i < cmd->size(); ++i) {
        if (!(*cmd)[i].is_string()) {
          throw ConfigError(fmt::format("/trainer/command/{}", i), "expected a string");
        }
        cfg.trainer_command.push_back((*cmd)[i].get<std::string>());
      }
    }
  }
  if (cfg.pipeline.filter_mode == FilterMode::kDenotation && cfg.database.empty()) {
    throw ConfigError("/pipeline/filter_mode", "denotation mode needs a database");
  }
  cfg.pipeline.sampling.seed = cfg.seed;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  const std::string text = io::read_file(path);
  return parse_config(text, fs::path(path).parent_path());
}

std::string config_to_json(const RunConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["grammar"] = cfg.grammar;
  j["filter_grammar"] = cfg.filter_grammar;
  j["database"] = cfg.database;
  j["max_depth"] = cfg.max_depth;
  j["max_examples"] = cfg.max_examples;
  j["runs_dir"] = cfg.runs_dir;
  Json scorer;
  scorer["kind"] = cfg.scorer.kind;
  if (cfg.scorer.kind == "unigram") scorer["corpus"] = cfg.scorer.corpus;
  if (cfg.scorer.kind == "uniform") scorer["token_logprob"] = cfg.scorer.token_logprob;
  if (cfg.scorer.kind == "remote") {
    scorer["url"] = cfg.scorer.url;
    scorer["batch_size"] = cfg.scorer.batch_size;
  }
  j["scorer"] = scorer;
  Json para;
  para["kind"] = cfg.paraphraser.kind;
  if (cfg.paraphraser.kind == "rule-table") para["rules"] = cfg.paraphraser.rules;
  if (cfg.paraphraser.kind == "remote") para["url"] = cfg.paraphraser.url;
  j["paraphraser"] = para;
  j["selection"] = {{"top_k", cfg.pipeline.selection.top_k},
                    {"delta", cfg.pipeline.selection.delta}};
  j["sampling"] = {{"alpha", cfg.pipeline.sampling.alpha},
                   {"val_size", cfg.pipeline.sampling.size}};
  j["pipeline"] = {
      {"iterations", cfg.pipeline.iterations},
      {"beam", cfg.pipeline.beam},
      {"stages", cfg.pipeline.stages},
      {"wh_prefix_forcing", cfg.pipeline.wh_prefix_forcing},
      {"filter_mode", cfg.pipeline.filter_mode == FilterMode::kTemplate
                          ? "template"
                          : "denotation"},
      {"filter_max_depth", cfg.filter_max_depth}};
  if (!cfg.trainer_command.empty()) {
    j["trainer"] = {{"command", cfg.trainer_command}};
  }
  return j.dump(2);
}

namespace {

struct InputRecord {
  Json* inputs = nullptr;

  std::string read(const std::string& name, const std::string& configured,
                   const std::string& resolved) {
    std::string bytes = io::read_file(resolved);
    if (inputs != nullptr) {
      (*inputs)[name] = {{"path", configured}, {"sha256", io::sha256_hex(bytes)}};
    }
    return bytes;
  }
};

std::unique_ptr<Scorer> build_scorer(const ScorerSpec& spec, const RunConfig* base,
                                     InputRecord record) {
  if (spec.kind == "unigram") {
    const std::string path = base ? base->resolve(spec.corpus) : spec.corpus;
    return std::make_unique<UnigramScorer>(
        UnigramScorer::fit_text(record.read("corpus", spec.corpus, path)));
  }
  if (spec.kind == "uniform") return std::make_unique<UniformScorer>(spec.token_logprob);
  if (spec.kind == "remote") {
    const std::string url = adapter_url_from_env(spec.url);
    if (url.empty()) throw ConfigError("/scorer/url", "remote scorer needs a url");
    return std::make_unique<RemoteScorer>(url, spec.batch_size);
  }
  throw ConfigError("/scorer/kind", fmt::format("unknown scorer '{}'", spec.kind));
}

std::unique_ptr<Paraphraser> build_paraphraser(const ParaphraserSpec& spec,
                                               const RunConfig* base,
                                               InputRecord record) {
  if (spec.kind == "identity") return std::make_unique<IdentityParaphraser>();
  if (spec.kind == "rule-table") {
    const std::string path = base ? base->resolve(spec.rules) : spec.rules;
    const std::string text = record.read("rules", spec.rules, path);
    try {
      return std::make_unique<RuleTableParaphraser>(RuleTableParaphraser::from_text(text));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}: {}", path, e.detail()), e.line(), e.column());
    }
  }
  if (spec.kind == "remote") {
    const std::string url = adapter_url_from_env(spec.url);
    if (url.empty()) throw ConfigError("/paraphraser/url", "remote paraphraser needs a url");
    return std::make_unique<RemoteParaphraser>(url);
  }
  throw ConfigError("/paraphraser/kind",
                    fmt::format("unknown paraphraser '{}'", spec.kind));
}

}  // namespace

std::unique_ptr<Scorer> make_scorer(const ScorerSpec& spec, const RunConfig* base) {
  return build_scorer(spec, base, InputRecord{});
}

std::unique_ptr<Paraphraser> make_paraphraser(const ParaphraserSpec& spec,
                                              const RunConfig* base) {
  return build_paraphraser(spec, base, InputRecord{});
}

RunLock::RunLock(fs::path dir) : path_(std::move(dir) / ".lock") {
  fs::create_directories(path_.parent_path());
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw Error(fmt::format("run directory is locked by another writer: {}",
                            path_.string()));
  }
  const std::string pid = fmt::format("{}\n", ::getpid());
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

fs::path make_run_dir(const fs::path& runs_dir, std::uint64_t seed) {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  ::gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  const std::string base = fmt::format("{}-{}", stamp, seed);
  fs::create_directories(runs_dir);
  for (int n = 0;; ++n) {
    const fs::path dir = runs_dir / (n == 0 ? base : fmt::format("{}-{}", base, n));
    std::error_code ec;
    if (fs::create_directory(dir, ec)) return dir;
    if (ec) throw Error(fmt::format("cannot create run directory {}: {}", dir.string(), ec.message()));
  }
}

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string iso_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  ::gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return stamp;
}

Json iteration_json(const IterationReport& r) {
  Json j;
  j["stage"] = r.stage;
  j["iteration"] = r.iteration;
  j["sources"] = r.sources;
  j["candidates"] = r.candidates;
  j["accepted"] = r.accepted;
  j["rejected"] = r.rejected;
  j["acceptance_rate"] = r.acceptance_rate();
  j["duplicates"] = r.duplicates;
  j["excluded"] = r.excluded;
  j["added"] = r.added;
  j["dataset_size"] = r.dataset_size;
  j["parser_errors"] = r.parser_errors;
  j["model_ref"] = r.model_ref ? Json(*r.model_ref) : Json(nullptr);
  return j;
}

}  // namespace

PipelineOutcome run_pipeline(const RunConfig& cfg, const fs::path& run_dir) {
  cfg.pipeline.validate();
  PipelineOutcome outcome;
  outcome.run_dir =
      run_dir.empty() ? make_run_dir(cfg.resolve(cfg.runs_dir), cfg.seed) : run_dir;
  fs::create_directories(outcome.run_dir);
  RunLock lock(outcome.run_dir);

  Json manifest;
  manifest["tool"] = {{"name", "synthparse"}, {"version", kVersion}};
  manifest["status"] = "running";
  manifest["seed"] = cfg.seed;
  manifest["config"] = Json::parse(config_to_json(cfg));
  manifest["inputs"] = Json::object();
  manifest["counts"] = Json::object();
  manifest["outputs"] = Json::object();
  Json timing;
  timing["started_at"] = iso_now();
  timing["run_dir"] = outcome.run_dir.string();
  timing["seconds"] = Json::object();

  auto write_dataset = [&](const Dataset& d, const std::string& name) {
    const std::string text = to_jsonl(d);
    io::write_file_atomic((outcome.run_dir / name).string(), text);
    manifest["outputs"][name] = io::sha256_hex(text);
  };
  auto write_manifest = [&] {
    Json full = manifest;
    full["timing"] = timing;
    outcome.manifest_json = full.dump(2) + "\n";
    io::write_file_atomic((outcome.run_dir / "manifest.json").string(),
                          outcome.manifest_json);
  };

  Stopwatch clock;
  try {
    Json inputs = Json::object();
    InputRecord record{&inputs};
    const std::string grammar_text =
        record.read("grammar", cfg.grammar, cfg.resolve(cfg.grammar));
    const auto load = [&](const std::string& text, const std::string& configured) {
      try {
        return load_grammar(text);
      } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", cfg.resolve(configured), e.detail()),
                         e.line(), e.column());
      } catch (const GrammarError& e) {
        throw GrammarError(fmt::format("{}: {}", cfg.resolve(configured), e.what()));
      }
    };
    const Grammar grammar = load(grammar_text, cfg.grammar);
    std::optional<Grammar> filter_grammar;
    if (!cfg.filter_grammar.empty()) {
      const std::string extra = record.read("filter_grammar", cfg.filter_grammar,
                                            cfg.resolve(cfg.filter_grammar));
      filter_grammar = load(grammar_text + "\n" + extra, cfg.filter_grammar);
    }
    const Grammar& parser_grammar = filter_grammar ? *filter_grammar : grammar;
    std::optional<Database> db;
    if (!cfg.database.empty()) {
      db = load_database(
          record.read("database", cfg.database, cfg.resolve(cfg.database)));
    }
    auto scorer = build_scorer(cfg.scorer, &cfg, record);
    auto paraphraser = build_paraphraser(cfg.paraphraser, &cfg, record);
    manifest["inputs"] = inputs;
    manifest["components"] = {{"scorer", scorer->describe()},
                              {"paraphraser", paraphraser->describe()}};
    timing["seconds"]["load"] = clock.lap();

    EnumerationStats stats;
    const Dataset enumerated = enumerate(
        grammar, EnumerationOptions{cfg.max_depth, cfg.max_examples}, &stats);
    manifest["counts"]["enumerated"] = enumerated.size();
    const Dataset constrained =
        apply_constraints(enumerated, grammar.constraints(), grammar);
    manifest["counts"]["constrained"] = constrained.size();
    write_dataset(constrained, "d_can.jsonl");
    timing["seconds"]["synth"] = clock.lap();

    const Dataset scored = score_dataset(constrained, *scorer);
    std::vector<BucketReport> buckets;
    const Dataset selected = select_top_k(scored, cfg.pipeline.selection, &buckets);
    manifest["counts"]["selected"] = selected.size();
    Json bucket_json = Json::array();
    for (const auto& b : buckets) {
      bucket_json.push_back({{"depth", b.depth},
                             {"input", b.input},
                             {"groups", b.groups},
                             {"dropped_by_gap", b.dropped_by_gap},
                             {"groups_kept", b.groups_kept},
                             {"output", b.output}});
    }
    manifest["selection"] = bucket_json;
    write_dataset(selected, "d_can_selected.jsonl");
    timing["seconds"]["select"] = clock.lap();

    const Database* db_ptr = db ? &*db : nullptr;
    std::unique_ptr<TrainerHook> trainer;
    if (!cfg.trainer_command.empty()) {
      trainer = std::make_unique<TrainerHook>(cfg.trainer_command,
                                              outcome.run_dir / "trainer");
    }
    StageContext ctx;
    ctx.paraphraser = paraphraser.get();
    ctx.parser_factory = [&](int, const std::optional<std::string>&) {
      return std::make_unique<GrammarFilterParser>(parser_grammar, cfg.filter_max_depth,
                                                   db_ptr);
    };
    ctx.trainer = trainer.get();
    ctx.scorer = scorer.get();
    if (cfg.pipeline.wh_prefix_forcing) {
      ctx.wh = [db_ptr](const Example& e) -> WhPrefixes {
        return wh_prefixes_for(e.program, db_ptr);
      };
    }
    ctx.out_dir = outcome.run_dir;
    const TwoStageResult result = run_two_stage(selected, cfg.pipeline, ctx);
    timing["seconds"]["paraphrase"] = clock.lap();

    std::size_t candidates = 0, accepted = 0, rejected = 0;
    Json iterations = Json::array();
    for (const auto& r : result.iterations) {
      candidates += r.candidates;
      accepted += r.accepted;
      rejected += r.rejected;
      iterations.push_back(iteration_json(r));
    }
    manifest["iterations"] = iterations;
    manifest["counts"]["paraphrased"] = candidates;
    manifest["counts"]["accepted"] = accepted;
    manifest["counts"]["rejected"] = rejected;
    manifest["counts"]["sampled"] = result.validation.size();
    manifest["counts"]["d_par"] = result.d_par.size();
    manifest["acceptance_rate"] =
        accepted + rejected == 0
            ? 0.0
            : static_cast<double>(accepted) / static_cast<double>(accepted + rejected);
    write_dataset(result.stage_one, "d_par_stage1.jsonl");
    write_dataset(result.validation, "d_val.jsonl");
    write_dataset(result.d_par, "d_par.jsonl");
    timing["seconds"]["write"] = clock.lap();

    manifest["status"] = "ok";
    write_manifest();
    outcome.ok = true;
  } catch (const std::exception& e) {
    outcome.error = e.what();
    manifest["status"] = "failed";
    manifest["error"] = e.what();
    try {
      io::write_file_atomic((outcome.run_dir / "FAILED").string(),
                            std::string(e.what()) + "\n");
      write_manifest();
    } catch (const std::exception&) {
    }
    throw;
  }
  return outcome;
}

std::string manifest_without_timing(const std::string& manifest_json) {
  Json j = Json::parse(manifest_json);
  j.erase("timing");
  return j.dump(2);
}

}  // namespace synthparse
