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

#include "synthparse/cli.h"

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "synthparse/dataset.h"
#include "synthparse/executor.h"
#include "synthparse/grammar.h"
#include "synthparse/io.h"
#include "synthparse/metrics.h"
#include "synthparse/paraphrase.h"
#include "synthparse/pipeline.h"
#include "synthparse/scorer.h"
#include "synthparse/selection.h"
#include "synthparse/synthesis.h"

namespace synthparse {

namespace {

using Json = nlohmann::ordered_json;

struct ScorerFlags {
  std::string kind = "unigram";
  std::string corpus;
  double token_logprob = -0.6931471805599453;
  std::string url;

  void add(CLI::App* app, const std::string& default_kind = "unigram") {
    kind = default_kind;
    app->add_option("--scorer", kind, "unigram, uniform or remote")
        ->check(CLI::IsMember({"unigram", "uniform", "remote", "none"}))
        ->capture_default_str();
    app->add_option("--corpus", corpus,
                    "Text file (one utterance per line) for the unigram scorer");
    app->add_option("--token-logprob", token_logprob,
                    "Per-token log-probability for the uniform scorer")
        ->capture_default_str();
    app->add_option("--adapter-url", url,
                    "Model adapter base URL (SYNTHPARSE_ADAPTER_URL overrides)");
  }

  // Unigram without --corpus fits on `fallback`.
  std::unique_ptr<Scorer> build(const Dataset* fallback, Json& inputs) const {
    if (kind == "unigram" && corpus.empty()) {
      if (fallback == nullptr || fallback->empty()) {
        throw UsageError("--corpus is required for the unigram scorer");
      }
      std::vector<Utterance> utts;
      for (const auto& e : fallback->examples) utts.push_back(e.utterance);
      return std::make_unique<UnigramScorer>(UnigramScorer::fit(utts));
    }
    if (kind == "unigram") {
      const std::string text = io::read_file(corpus);
      inputs["corpus"] = {{"path", corpus}, {"sha256", io::sha256_hex(text)}};
      return std::make_unique<UnigramScorer>(UnigramScorer::fit_text(text));
    }
    ScorerSpec spec;
    spec.kind = kind;
    spec.token_logprob = token_logprob;
    spec.url = url;
    return make_scorer(spec);
  }
};

Dataset read_dataset(const std::string& path, Json* inputs, const char* name,
                     DatasetTag tag = DatasetTag::kOther) {
  const std::string text = io::read_file(path);
  if (inputs != nullptr) {
    (*inputs)[name] = {{"path", path}, {"sha256", io::sha256_hex(text)}};
  }
  try {
    return from_jsonl(text, tag);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.detail()), e.line(), e.column());
  }
}

Grammar read_grammar(const std::string& path, Json* inputs) {
  const std::string text = io::read_file(path);
  if (inputs != nullptr) {
    (*inputs)["grammar"] = {{"path", path}, {"sha256", io::sha256_hex(text)}};
  }
  try {
    return load_grammar(text);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}:{}:{}: {}", path, e.line(), e.column(), e.detail()),
                     e.line(), e.column());
  } catch (const GrammarError& e) {
    throw GrammarError(fmt::format("{}: {}", path, e.what()));
  }
}

Grammar read_grammar_pair(const std::string& path, const std::string& extra) {
  const std::string text = io::read_file(path) + "\n" + io::read_file(extra);
  try {
    return load_grammar(text);
  } catch (const Error& e) {
    throw GrammarError(fmt::format("{} + {}: {}", path, extra, e.what()));
  }
}

Database read_database(const std::string& path, Json* inputs) {
  const std::string text = io::read_file(path);
  if (inputs != nullptr) {
    (*inputs)["database"] = {{"path", path}, {"sha256", io::sha256_hex(text)}};
  }
  try {
    return load_database(text);
  } catch (const Error& e) {
    throw SchemaError(fmt::format("{}: {}", path, e.what()));
  }
}

Json manifest_header() {
  Json m;
  m["tool"] = {{"name", "synthparse"}, {"version", kVersion}};
  m["inputs"] = Json::object();
  return m;
}

void write_manifest(Json manifest, const std::string& path, double seconds) {
  manifest["timing"] = {{"seconds", seconds}};
  io::write_file_atomic(path, manifest.dump(2) + "\n");
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

struct Cli {
  std::ostream& out;
  std::ostream& err;
  CLI::App app{"Grammar-based data synthesis for semantic parsing", "synthparse"};

  // synth
  std::string synth_grammar, synth_db, synth_out, synth_manifest;
  std::size_t synth_depth = 6, synth_cap = 10'000'000;
  bool synth_no_constraints = false;
  // select
  std::string select_in, select_out, select_manifest;
  SelectionConfig select_cfg;
  ScorerFlags select_scorer;
  // paraphrase
  std::string para_in, para_out, para_kind = "rule-table", para_rules, para_url,
                            para_db;
  std::size_t para_beam = 10;
  int para_iteration = 1;
  bool para_wh = false;
  // filter
  std::string filter_in, filter_grammar, filter_extra, filter_db, filter_accepted,
      filter_rejected, filter_mode = "template";
  std::size_t filter_depth = 6;
  // pipeline
  std::string pipe_config, pipe_runs_dir, pipe_run_dir;
  std::optional<std::uint64_t> pipe_seed;
  // sample-dev
  std::string sample_in, sample_out, sample_train_out;
  SamplingConfig sample_cfg;
  ScorerFlags sample_scorer;
  // metrics
  std::string metrics_ref, metrics_cand, metrics_db, metrics_out = "report.json",
                                                   metrics_policy = "flag";
  ScorerFlags metrics_scorer;
  // grammar check
  std::string check_grammar;
  bool check_print = false, check_strict = false;

  CLI::App* synth = nullptr;
  CLI::App* select = nullptr;
  CLI::App* paraphrase = nullptr;
  CLI::App* filter = nullptr;
  CLI::App* pipeline = nullptr;
  CLI::App* sample = nullptr;
  CLI::App* metrics = nullptr;
  CLI::App* grammar = nullptr;
  CLI::App* check = nullptr;

  Cli(std::ostream& o, std::ostream& e) : out(o), err(e) {
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    synth = app.add_subcommand("synth", "Enumerate canonical examples");
    synth->add_option("--grammar", synth_grammar, "Grammar file")->required();
    synth->add_option("--db", synth_db, "Database file (reports executability)");
    synth->add_option("--max-depth", synth_depth, "Production applications")
        ->capture_default_str();
    synth->add_option("--max-examples", synth_cap, "Abort above this many")
        ->capture_default_str();
    synth->add_option("--out", synth_out, "Output JSONL")->required();
    synth->add_option("--manifest", synth_manifest,
                      "Manifest path (default <out>.manifest.json)");
    synth->add_flag("--no-constraints", synth_no_constraints,
                    "Skip the grammar's constraint rules");

    select = app.add_subcommand("select", "Score and select by naturalness");
    select->add_option("--in", select_in, "Input JSONL")->required();
    select->add_option("--out", select_out, "Output JSONL")->required();
    select->add_option("--top-k", select_cfg.top_k, "Groups kept per depth")
        ->capture_default_str();
    select->add_option("--delta", select_cfg.delta, "Log-probability gap")
        ->capture_default_str();
    select->add_option("--manifest", select_manifest,
                       "Manifest path (default <out>.manifest.json)");
    select_scorer.add(select);

    paraphrase = app.add_subcommand("paraphrase", "Generate paraphrase candidates");
    paraphrase->add_option("--in", para_in, "Input JSONL")->required();
    paraphrase->add_option("--out", para_out, "Candidate JSONL")->required();
    paraphrase->add_option("--paraphraser", para_kind, "identity, rule-table or remote")
        ->check(CLI::IsMember({"identity", "rule-table", "remote"}))
        ->capture_default_str();
    paraphrase->add_option("--rules", para_rules, "Rule table (TSV)");
    paraphrase->add_option("--adapter-url", para_url, "Model adapter base URL");
    paraphrase->add_option("--beam", para_beam, "Candidates per example")
        ->capture_default_str();
    paraphrase->add_option("--iteration", para_iteration, "Iteration recorded in provenance")
        ->capture_default_str();
    paraphrase->add_flag("--wh-prefixes", para_wh, "Force WH prefixes by answer type");
    paraphrase->add_option("--db", para_db, "Database used to infer answer types");

    filter = app.add_subcommand("filter", "Keep candidates the parser recovers");
    filter->add_option("--in", filter_in, "Candidate JSONL")->required();
    filter->add_option("--grammar", filter_grammar, "Grammar file")->required();
    filter->add_option("--extra-grammar", filter_extra,
                       "Rules appended to the grammar for filtering");
    filter->add_option("--db", filter_db, "Database (denotation mode)");
    filter->add_option("--max-depth", filter_depth, "Parser depth bound")
        ->capture_default_str();
    filter->add_option("--mode", filter_mode, "template or denotation")
        ->check(CLI::IsMember({"template", "denotation"}))
        ->capture_default_str();
    filter->add_option("--accepted", filter_accepted, "Accepted JSONL")->required();
    filter->add_option("--rejected", filter_rejected, "Rejected JSONL")->required();

    pipeline = app.add_subcommand("pipeline", "Run the two-stage pipeline");
    pipeline->add_option("--config", pipe_config, "Pipeline JSON config")->required();
    pipeline->add_option("--runs-dir", pipe_runs_dir, "Override runs directory");
    pipeline->add_option("--run-dir", pipe_run_dir, "Exact run directory");
    pipeline->add_option("--seed", pipe_seed, "Override the configured seed");

    sample = app.add_subcommand("sample-dev", "Sample validation data");
    sample->add_option("--in", sample_in, "Input JSONL")->required();
    sample->add_option("--out", sample_out, "Validation JSONL")->required();
    sample->add_option("--train-out", sample_train_out, "Remaining examples JSONL");
    sample->add_option("--alpha", sample_cfg.alpha, "Score exponent")
        ->capture_default_str();
    sample->add_option("--val-size", sample_cfg.size, "Examples to draw")
        ->capture_default_str();
    sample->add_option("--seed", sample_cfg.seed, "PRNG seed")->capture_default_str();
    sample_scorer.add(sample, "none");

    metrics = app.add_subcommand("metrics", "Evaluation report");
    metrics->add_option("--ref", metrics_ref, "Reference JSONL")->required();
    metrics->add_option("--cand", metrics_cand, "Candidate JSONL")->required();
    metrics->add_option("--db", metrics_db, "Database for denotation accuracy");
    metrics->add_option("--out", metrics_out, "Report path")->capture_default_str();
    metrics->add_option("--empty-denotation-policy", metrics_policy, "match or flag")
        ->check(CLI::IsMember({"match", "flag"}))
        ->capture_default_str();
    metrics_scorer.add(metrics);

    grammar = app.add_subcommand("grammar", "Grammar utilities");
    grammar->require_subcommand(1);
    check = grammar->add_subcommand("check", "Load and validate a grammar");
    check->add_option("--grammar", check_grammar, "Grammar file")->required();
    check->add_flag("--print", check_print, "Print the normalized grammar");
    check->add_flag("--strict", check_strict, "Exit 1 when diagnostics exist");
  }

  int dispatch() {
    if (*synth) return run_synth();
    if (*select) return run_select();
    if (*paraphrase) return run_paraphrase();
    if (*filter) return run_filter();
    if (*pipeline) return run_pipeline_cmd();
    if (*sample) return run_sample();
    if (*metrics) return run_metrics();
    if (*check) return run_check();
    throw UsageError("no subcommand");
  }

  int run_synth() {
    if (synth_depth < 1) throw UsageError("--max-depth must be at least 1");
    const auto start = std::chrono::steady_clock::now();
    Json m = manifest_header();
    const Grammar g = read_grammar(synth_grammar, &m["inputs"]);
    std::optional<Database> db;
    if (!synth_db.empty()) db = read_database(synth_db, &m["inputs"]);
    EnumerationStats stats;
    const Dataset enumerated =
        enumerate(g, EnumerationOptions{synth_depth, synth_cap}, &stats);
    const Dataset d = synth_no_constraints
                          ? enumerated
                          : apply_constraints(enumerated, g.constraints(), g);
    const std::string text = to_jsonl(d);
    io::write_file_atomic(synth_out, text);

    m["options"] = {{"max_depth", synth_depth},
                    {"max_examples", synth_cap},
                    {"constraints", !synth_no_constraints}};
    Json buckets = Json::object();
    for (const auto& [depth, b] : bucket_by_depth(d)) {
      buckets[std::to_string(depth)] = b.size();
    }
    m["counts"] = {{"enumerated", enumerated.size()},
                   {"constrained", d.size()},
                   {"duplicates", stats.duplicates},
                   {"ill_typed", stats.ill_typed},
                   {"buckets", buckets}};
    if (db) {
      std::size_t ok = 0;
      for (const auto& e : d.examples) ok += execute(e.program, *db).ok() ? 1 : 0;
      m["counts"]["executable"] = ok;
    }
    m["outputs"] = {{"dataset", {{"path", synth_out}, {"sha256", io::sha256_hex(text)}}}};
    write_manifest(m, synth_manifest.empty() ? synth_out + ".manifest.json" : synth_manifest,
                   elapsed(start));
    out << fmt::format("wrote {} examples to {}\n", d.size(), synth_out);
    return kExitOk;
  }

  int run_select() {
    const auto start = std::chrono::steady_clock::now();
    select_cfg.validate();
    Json m = manifest_header();
    const Dataset in = read_dataset(select_in, &m["inputs"], "dataset");
    if (select_scorer.kind == "none") throw UsageError("select needs a scorer");
    auto scorer = select_scorer.build(&in, m["inputs"]);
    const Dataset scored = score_dataset(in, *scorer);
    std::vector<BucketReport> report;
    const Dataset d = select_top_k(scored, select_cfg, &report);
    const std::string text = to_jsonl(d);
    io::write_file_atomic(select_out, text);

    m["options"] = {{"top_k", select_cfg.top_k},
                    {"delta", select_cfg.delta},
                    {"scorer", scorer->describe()}};
    Json buckets = Json::array();
    for (const auto& b : report) {
      buckets.push_back({{"depth", b.depth},
                         {"input", b.input},
                         {"groups", b.groups},
                         {"dropped_by_gap", b.dropped_by_gap},
                         {"groups_kept", b.groups_kept},
                         {"output", b.output}});
    }
    m["counts"] = {{"input", in.size()}, {"selected", d.size()}, {"buckets", buckets}};
    m["outputs"] = {{"dataset", {{"path", select_out}, {"sha256", io::sha256_hex(text)}}}};
    write_manifest(m, select_manifest.empty() ? select_out + ".manifest.json" : select_manifest,
                   elapsed(start));
    out << fmt::format("selected {} of {} examples\n", d.size(), in.size());
    return kExitOk;
  }

  int run_paraphrase() {
    if (para_beam < 1) throw UsageError("--beam must be at least 1");
    const Dataset in = read_dataset(para_in, nullptr, "dataset");
    ParaphraserSpec spec;
    spec.kind = para_kind;
    spec.rules = para_rules;
    spec.url = para_url;
    if (spec.kind == "rule-table" && spec.rules.empty()) {
      throw UsageError("--rules is required for the rule-table paraphraser");
    }
    auto p = make_paraphraser(spec);
    std::optional<Database> db;
    if (!para_db.empty()) db = read_database(para_db, nullptr);
    WhPolicy wh;
    if (para_wh) {
      const Database* dbp = db ? &*db : nullptr;
      wh = [dbp](const Example& e) -> WhPrefixes { return wh_prefixes_for(e.program, dbp); };
    }
    const Dataset d = generate_paraphrases(in, *p, para_beam, para_iteration, wh);
    write_jsonl(d, para_out);
    out << fmt::format("wrote {} candidates for {} examples\n", d.size(), in.size());
    return kExitOk;
  }

  int run_filter() {
    const Dataset in = read_dataset(filter_in, nullptr, "dataset");
    const Grammar g = filter_extra.empty()
                          ? read_grammar(filter_grammar, nullptr)
                          : read_grammar_pair(filter_grammar, filter_extra);
    std::optional<Database> db;
    if (!filter_db.empty()) db = read_database(filter_db, nullptr);
    const FilterMode mode =
        filter_mode == "template" ? FilterMode::kTemplate : FilterMode::kDenotation;
    if (mode == FilterMode::kDenotation && !db) {
      throw UsageError("--mode denotation needs --db");
    }
    GrammarFilterParser parser(g, filter_depth, db ? &*db : nullptr);
    const FilterResult r = filter_paraphrases(in, parser, mode);
    write_jsonl(r.accepted, filter_accepted);
    write_jsonl(r.rejected, filter_rejected);
    const std::size_t n = r.accepted.size() + r.rejected.size();
    out << fmt::format("accepted {} rejected {} acceptance_rate {:.6f}\n",
                       r.accepted.size(), r.rejected.size(),
                       n == 0 ? 0.0 : static_cast<double>(r.accepted.size()) / n);
    return kExitOk;
  }

  int run_pipeline_cmd() {
    RunConfig cfg = load_config(pipe_config);
    if (pipe_seed) {
      cfg.seed = *pipe_seed;
      cfg.pipeline.sampling.seed = *pipe_seed;
    }
    if (!pipe_runs_dir.empty()) cfg.runs_dir = std::filesystem::absolute(pipe_runs_dir);
    const PipelineOutcome o = run_pipeline(cfg, pipe_run_dir);
    out << o.run_dir.string() << "\n";
    return kExitOk;
  }

  int run_sample() {
    Json inputs;
    Dataset in = read_dataset(sample_in, nullptr, "dataset");
    if (sample_scorer.kind != "none") {
      auto scorer = sample_scorer.build(&in, inputs);
      in = score_dataset(in, *scorer);
    }
    const SampleResult r = sample_validation(in, sample_cfg);
    write_jsonl(r.validation, sample_out);
    if (!sample_train_out.empty()) write_jsonl(r.training, sample_train_out);
    out << fmt::format("sampled {} of {} examples\n", r.validation.size(), in.size());
    return kExitOk;
  }

  int run_metrics() {
    Json inputs;
    const Dataset ref = read_dataset(metrics_ref, nullptr, "ref", DatasetTag::kNatural);
    const Dataset cand = read_dataset(metrics_cand, nullptr, "cand");
    MetricReport report;

    if (!ref.empty()) {
      report.logical_coverage = logical_coverage(ref, cand);
      report.logical_coverage_count = ref.size();
    }

    if (metrics_scorer.kind != "none" && !ref.empty() &&
        (metrics_scorer.kind != "unigram" || !metrics_scorer.corpus.empty() ||
         !cand.empty())) {
      auto scorer = metrics_scorer.build(&cand, inputs);
      std::vector<Utterance> utts;
      for (const auto& e : ref.examples) {
        if (!e.utterance.empty()) utts.push_back(e.utterance);
      }
      if (!utts.empty()) {
        const auto scores = scorer->score_batch(utts);
        report.perplexity = perplexity(scores);
        report.corpus_perplexity = corpus_perplexity(scores);
        report.perplexity_count = scores.size();
      }
    }

    // Candidates pair with the reference example they were derived from
    // (provenance source), or with the reference example sharing their id.
    std::map<std::string, const Example*> by_id;
    for (const auto& e : ref.examples) by_id.emplace(e.id, &e);
    std::vector<std::pair<const Example*, const Example*>> pairs;
    for (const auto& c : cand.examples) {
      auto it = by_id.end();
      if (!c.provenance.source_id.empty()) it = by_id.find(c.provenance.source_id);
      if (it == by_id.end()) it = by_id.find(c.id);
      if (it != by_id.end()) pairs.emplace_back(it->second, &c);
    }
    if (!pairs.empty()) {
      double f1 = 0.0, tau = 0.0;
      std::size_t tau_n = 0;
      for (const auto& [r, c] : pairs) {
        f1 += token_f1(r->utterance, c->utterance);
        if (const auto t = kendall_tau(r->utterance, c->utterance)) {
          tau += *t;
          ++tau_n;
        } else {
          ++report.kendall_tau_excluded;
        }
      }
      report.token_f1_mean = f1 / static_cast<double>(pairs.size());
      report.token_f1_count = pairs.size();
      if (tau_n > 0) report.kendall_tau_mean = tau / static_cast<double>(tau_n);
      report.kendall_tau_count = tau_n;

      if (!metrics_db.empty()) {
        const Database db = read_database(metrics_db, nullptr);
        std::vector<Program> preds, golds;
        for (const auto& [r, c] : pairs) {
          golds.push_back(r->program);
          preds.push_back(c->program);
        }
        const AccuracyResult acc = denotation_accuracy(
            preds, golds, db,
            metrics_policy == "match" ? EmptyDenotationPolicy::kMatch
                                      : EmptyDenotationPolicy::kFlag);
        if (acc.total > 0) report.denotation_accuracy = acc.accuracy;
        report.denotation_count = acc.total;
        report.denotation_flagged = acc.flagged;
      }
    }

    const std::string json = report.to_json();
    io::write_file_atomic(metrics_out, json);
    out << json;
    return kExitOk;
  }

  int run_check() {
    const Grammar g = read_grammar(check_grammar, nullptr);
    const auto diagnostics = validate_grammar(g);
    for (const auto& d : diagnostics) out << d.to_string() << "\n";
    if (check_print) out << render_grammar(g);
    if (diagnostics.empty()) {
      out << fmt::format("ok: {} productions, {} categories\n", g.productions().size(),
                         g.categories().size());
    }
    return check_strict && !diagnostics.empty() ? kExitRuntime : kExitOk;
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Cli cli(out, err);
  try {
    cli.app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return cli.app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    return cli.dispatch();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace synthparse
