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

#include "synthparse/paraphrase.h"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "synthparse/errors.h"
#include "synthparse/io.h"

namespace synthparse {

namespace {

std::string normalized(const Utterance& u) { return join_tokens(u); }

bool starts_with(const Utterance& u, const Utterance& prefix) {
  return prefix.size() <= u.size() &&
         std::equal(prefix.begin(), prefix.end(), u.begin());
}

// Appends `c` unless it is empty or already present.
void add_candidate(std::vector<Utterance>& out, std::set<std::string>& seen,
                   Utterance c) {
  if (c.empty()) return;
  if (seen.insert(normalized(c)).second) out.push_back(std::move(c));
}

}  // namespace

std::vector<Utterance> IdentityParaphraser::generate(const Utterance& u,
                                                     std::size_t beam,
                                                     const WhPrefixes&) {
  if (beam == 0) return {};
  return {u};
}

RuleTableParaphraser::RuleTableParaphraser(
    std::vector<std::pair<Utterance, Utterance>> rules)
    : rules_(std::move(rules)) {}

RuleTableParaphraser RuleTableParaphraser::from_text(std::string_view tsv) {
  std::vector<std::pair<Utterance, Utterance>> rules;
  int line_no = 0;
  std::size_t start = 0;
  while (start < tsv.size()) {
    std::size_t end = tsv.find('\n', start);
    if (end == std::string_view::npos) end = tsv.size();
    std::string_view line = tsv.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw ParseError("rule table: expected source<TAB>replacement", line_no, 1);
    }
    Utterance source = tokenize(line.substr(0, tab));
    Utterance target = tokenize(line.substr(tab + 1));
    if (source.empty()) {
      throw ParseError("rule table: empty source phrase", line_no, 1);
    }
    rules.emplace_back(std::move(source), std::move(target));
  }
  return RuleTableParaphraser(std::move(rules));
}

RuleTableParaphraser RuleTableParaphraser::from_file(const std::string& path) {
  try {
    return from_text(io::read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.detail()), e.line(), e.column());
  }
}

std::vector<Utterance> RuleTableParaphraser::generate(const Utterance& u,
                                                      std::size_t beam,
                                                      const WhPrefixes& wh) {
  std::vector<Utterance> out;
  if (beam == 0) return out;
  std::set<std::string> seen{normalized(u)};

  std::vector<Utterance> rewrites;
  std::set<std::string> rewrite_seen{normalized(u)};
  for (const auto& [source, target] : rules_) {
    for (std::size_t i = 0; i + source.size() <= u.size(); ++i) {
      if (!std::equal(source.begin(), source.end(), u.begin() + static_cast<std::ptrdiff_t>(i))) {
        continue;
      }
      Utterance c(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(i));
      c.insert(c.end(), target.begin(), target.end());
      c.insert(c.end(), u.begin() + static_cast<std::ptrdiff_t>(i + source.size()), u.end());
      add_candidate(rewrites, rewrite_seen, std::move(c));
    }
  }

  if (wh && !wh->empty()) {
    // Forced half: each base (rewrites first, then the input) under each
    // prefix, until floor(beam / 2) are filled.
    const std::size_t forced = beam / 2;
    std::vector<Utterance> bases = rewrites;
    bases.push_back(u);
    for (const auto& base : bases) {
      for (const auto& prefix_text : *wh) {
        if (out.size() >= forced) break;
        const Utterance prefix = tokenize(prefix_text);
        Utterance c = prefix;
        if (!starts_with(base, prefix)) {
          c.insert(c.end(), base.begin(), base.end());
        } else {
          c = base;
        }
        add_candidate(out, seen, std::move(c));
      }
      if (out.size() >= forced) break;
    }
  }
  for (auto& c : rewrites) {
    if (out.size() >= beam) break;
    add_candidate(out, seen, std::move(c));
  }
  if (out.empty()) out.push_back(u);
  return out;
}

std::string RuleTableParaphraser::describe() const {
  return fmt::format("rule-table({} rules)", rules_.size());
}

RemoteParaphraser::RemoteParaphraser(std::string base_url)
    : client_(std::move(base_url)) {}

std::vector<Utterance> RemoteParaphraser::generate(const Utterance& u,
                                                   std::size_t beam,
                                                   const WhPrefixes& wh) {
  std::vector<Utterance> out;
  std::set<std::string> seen;
  for (const auto& text : client_.paraphrase(join_tokens(u), beam, wh)) {
    add_candidate(out, seen, tokenize(text));
  }
  if (out.size() > beam) out.resize(beam);
  return out;
}

std::string RemoteParaphraser::describe() const {
  return "remote(" + client_.base_url() + ")";
}

bool FilterParser::matches(const Program& predicted, const Program& inherited,
                           FilterMode mode) const {
  if (mode == FilterMode::kTemplate) {
    if (!is_closed(predicted)) return false;
    return template_key(predicted) == template_key(inherited);
  }
  if (db_ == nullptr) {
    throw UsageError("denotation filtering needs a database");
  }
  const ExecResult a = execute(predicted, *db_);
  const ExecResult b = execute(inherited, *db_);
  return a.ok() && b.ok() && denotation_equal(a.value(), b.value());
}

bool FilterParser::accepts(const Utterance& u, const Program& inherited,
                           FilterMode mode) {
  const auto p = predict(u);
  return p && matches(*p, inherited, mode);
}

GrammarFilterParser::GrammarFilterParser(const Grammar& g, std::size_t max_depth,
                                         const Database* db)
    : FilterParser(db), grammar_(g), max_depth_(max_depth) {}

std::optional<Program> GrammarFilterParser::predict(const Utterance& u) {
  const auto parses = parse_chart(grammar_, u, max_depth_);
  if (parses.empty()) return std::nullopt;
  return parses.front().program;
}

bool GrammarFilterParser::accepts(const Utterance& u, const Program& inherited,
                                  FilterMode mode) {
  for (const auto& parse : parse_chart(grammar_, u, max_depth_)) {
    if (matches(parse.program, inherited, mode)) return true;
  }
  return false;
}

const std::vector<std::string>& default_wh_prefixes() {
  static const std::vector<std::string> kPrefixes = {
      "what", "which", "who", "when", "where", "how many"};
  return kPrefixes;
}

namespace {

// "number", "text", an entity type name, or "" when unknown.
std::string answer_type(const Program& p, const Database* db) {
  const Call* c = p.as<Call>();
  if (c == nullptr) {
    if (const EntityRef* e = p.as<EntityRef>()) {
      return e->is_type_ref() ? "" : e->entity_type;
    }
    if (p.as<NumberLit>()) return "number";
    return "";
  }
  if (c->head == "count") return "number";
  if (c->args.empty()) return "";
  if (c->head == "listValue" || c->head == "filter" ||
      c->head == "superlative" || c->head == "countSuperlative") {
    return answer_type(c->args[0], db);
  }
  if (c->head == "getProperty" && c->args.size() == 2) {
    const StringLit* rel = c->args[1].as<StringLit>();
    if (rel == nullptr) return "";
    if (rel->text == "!type") {
      const Call* s = c->args[0].as<Call>();
      if (s && s->head == "singleton" && s->args.size() == 1) {
        if (const EntityRef* t = s->args[0].as<EntityRef>()) return t->entity_type;
      }
      return "";
    }
    if (db == nullptr) return "";
    const bool inverse = rel->text[0] == '!';
    const std::string prop = inverse ? rel->text.substr(1) : rel->text;
    for (const auto& [type, props] : db->schema()) {
      for (const auto& spec : props) {
        if (spec.name != prop) continue;
        if (inverse) return type;
        switch (spec.kind) {
          case ValueKind::kNumber:
            return "number";
          case ValueKind::kText:
            return "text";
          case ValueKind::kEntity:
            return spec.entity_type;
        }
      }
    }
  }
  return "";
}

}  // namespace

std::vector<std::string> wh_prefixes_for(const Program& p, const Database* db) {
  const std::string t = answer_type(p, db);
  if (t.empty()) return default_wh_prefixes();
  if (t == "number") return {"how many"};
  if (t == "year" || t == "date" || t == "time") return {"when"};
  if (t == "author" || t == "person" || t == "people") return {"who"};
  if (t == "venue" || t == "place" || t == "location" || t == "city" ||
      t == "state" || t == "country") {
    return {"where", "which"};
  }
  return {"what", "which"};
}

Dataset generate_paraphrases(const Dataset& d, Paraphraser& p, std::size_t beam,
                             int iteration, const WhPolicy& wh) {
  if (beam < 1) throw UsageError("beam must be at least 1");
  Dataset out;
  out.tag = DatasetTag::kParaphrased;
  for (const auto& e : d.examples) {
    const WhPrefixes prefixes = wh ? wh(e) : std::nullopt;
    auto candidates = p.generate(e.utterance, beam, prefixes);
    if (candidates.size() > beam) candidates.resize(beam);
    std::size_t k = 0;
    for (auto& c : candidates) {
      Example x = e;
      x.id = fmt::format("{}.p{}.{}", e.id, iteration, k++);
      x.utterance = std::move(c);
      x.score.reset();
      x.provenance = Provenance::paraphrased(e.id, iteration);
      out.examples.push_back(std::move(x));
    }
  }
  return out;
}

FilterResult filter_paraphrases(const Dataset& candidates, FilterParser& parser,
                                FilterMode mode) {
  FilterResult r;
  r.accepted.tag = candidates.tag;
  r.rejected.tag = candidates.tag;
  for (const auto& e : candidates.examples) {
    bool ok = false;
    try {
      ok = parser.accepts(e.utterance, e.program, mode);
    } catch (const Error&) {
      ++r.parser_errors;
    }
    (ok ? r.accepted : r.rejected).examples.push_back(e);
  }
  return r;
}

TrainerHook::TrainerHook(std::vector<std::string> argv,
                         std::filesystem::path workdir)
    : argv_(std::move(argv)), workdir_(std::move(workdir)) {
  if (argv_.empty()) throw UsageError("trainer hook command is empty");
}

std::string TrainerHook::train(const Dataset& train, const Dataset* validation,
                               const std::string& tag) {
  const auto dir = workdir_ / tag;
  std::filesystem::create_directories(dir);
  const std::string train_path = (dir / "train.jsonl").string();
  const std::string out_path = (dir / "model").string();
  write_jsonl(train, train_path);
  std::vector<std::string> args = argv_;
  args.insert(args.end(), {"--train", train_path, "--out", out_path});
  if (validation != nullptr) {
    const std::string val_path = (dir / "val.jsonl").string();
    write_jsonl(*validation, val_path);
    args.insert(args.end(), {"--val", val_path});
  }

  int fds[2];
  if (::pipe(fds) != 0) throw TransportError("trainer hook: pipe failed");
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw TransportError("trainer hook: fork failed");
  }
  if (pid == 0) {
    ::dup2(fds[1], STDOUT_FILENO);
    ::close(fds[0]);
    ::close(fds[1]);
    std::vector<char*> cargs;
    for (auto& a : args) cargs.push_back(a.data());
    cargs.push_back(nullptr);
    ::execvp(cargs[0], cargs.data());
    ::_exit(127);
  }
  ::close(fds[1]);
  std::string output;
  char buffer[4096];
  for (;;) {
    const ssize_t n = ::read(fds[0], buffer, sizeof buffer);
    if (n > 0) {
      output.append(buffer, static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      break;
    }
  }
  ::close(fds[0]);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw TransportError(fmt::format(
        "trainer hook '{}' failed with status {}", argv_.front(),
        WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  }
  const auto first = output.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return out_path;
  const auto last = output.find_last_not_of(" \t\r\n");
  return output.substr(first, last - first + 1);
}

void PipelineConfig::validate() const {
  if (iterations < 1) throw UsageError("iterations must be at least 1");
  if (beam < 1) throw UsageError("beam must be at least 1");
  if (stages != 1 && stages != 2) throw UsageError("stages must be 1 or 2");
  selection.validate();
  sampling.validate();
}

double IterationReport::acceptance_rate() const {
  const std::size_t n = accepted + rejected;
  return n == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(n);
}

StageResult run_stage(const Dataset& seed, const PipelineConfig& cfg,
                      StageContext& ctx, int stage, const Dataset* validation,
                      const std::optional<std::string>& initial_model_ref) {
  if (cfg.iterations < 1) throw UsageError("iterations must be at least 1");
  if (ctx.paraphraser == nullptr || !ctx.parser_factory) {
    throw UsageError("run_stage needs a paraphraser and a parser factory");
  }
  std::unordered_set<std::string> exclude;
  if (validation != nullptr) {
    for (const auto& e : validation->examples) exclude.insert(e.pair_key());
  }

  StageResult result;
  result.dataset.tag = DatasetTag::kParaphrased;
  std::unordered_set<std::string> present;
  for (const auto& e : seed.examples) {
    if (exclude.contains(e.pair_key())) continue;
    if (present.insert(e.pair_key()).second) result.dataset.examples.push_back(e);
  }

  std::optional<std::string> model_ref = initial_model_ref;
  for (int it = 1; it <= cfg.iterations; ++it) {
    IterationReport rep;
    rep.stage = stage;
    rep.iteration = it;
    // The parser for iteration `it` is trained on everything before it;
    // in stage two the first one is stage one's final parser.
    if (ctx.trainer != nullptr && !(it == 1 && initial_model_ref)) {
      model_ref = ctx.trainer->train(result.dataset, validation,
                                     fmt::format("stage{}-iter{}", stage, it - 1));
    }
    rep.model_ref = model_ref;
    auto parser = ctx.parser_factory(it - 1, model_ref);
    if (!parser) throw UsageError("parser factory returned no parser");

    rep.sources = result.dataset.size();
    const Dataset candidates =
        generate_paraphrases(result.dataset, *ctx.paraphraser, cfg.beam, it, ctx.wh);
    FilterResult fr = filter_paraphrases(candidates, *parser, cfg.filter_mode);
    rep.candidates = candidates.size();
    rep.accepted = fr.accepted.size();
    rep.rejected = fr.rejected.size();
    rep.parser_errors = fr.parser_errors;
    for (const auto& e : fr.accepted.examples) {
      const std::string key = e.pair_key();
      if (exclude.contains(key)) {
        ++rep.excluded;
        continue;
      }
      if (!present.insert(key).second) {
        ++rep.duplicates;
        continue;
      }
      result.dataset.examples.push_back(e);
      ++rep.added;
    }
    rep.dataset_size = result.dataset.size();
    if (ctx.out_dir) {
      const auto dir = *ctx.out_dir / fmt::format("stage{}", stage) /
                       fmt::format("iter-{}", it);
      write_jsonl(candidates, (dir / "candidates.jsonl").string());
      write_jsonl(fr.accepted, (dir / "accepted.jsonl").string());
      write_jsonl(fr.rejected, (dir / "rejected.jsonl").string());
      write_jsonl(result.dataset, (dir / "dataset.jsonl").string());
    }
    result.iterations.push_back(std::move(rep));
  }
  if (ctx.trainer != nullptr) {
    model_ref = ctx.trainer->train(result.dataset, validation,
                                   fmt::format("stage{}-final", stage));
  }
  result.final_model_ref = model_ref;
  return result;
}

TwoStageResult run_two_stage(const Dataset& seed, const PipelineConfig& cfg,
                             StageContext& ctx) {
  cfg.validate();
  TwoStageResult out;
  StageResult one = run_stage(seed, cfg, ctx, 1);
  out.stage_one = one.dataset;
  out.iterations = one.iterations;
  if (cfg.stages == 1) {
    out.d_par = one.dataset;
    out.validation.tag = DatasetTag::kValidation;
    return out;
  }
  if (ctx.scorer == nullptr) {
    throw UsageError("two-stage runs need a scorer to sample validation data");
  }
  const Dataset scored = score_dataset(one.dataset, *ctx.scorer);
  SampleResult sample = sample_validation(scored, cfg.sampling);
  out.validation = std::move(sample.validation);

  StageResult two =
      run_stage(seed, cfg, ctx, 2, &out.validation, one.final_model_ref);
  out.d_par = std::move(two.dataset);
  out.iterations.insert(out.iterations.end(), two.iterations.begin(),
                        two.iterations.end());
  return out;
}

}  // namespace synthparse
