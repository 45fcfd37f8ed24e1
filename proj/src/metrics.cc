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

#include "synthparse/metrics.h"

#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "synthparse/errors.h"

namespace synthparse {

double perplexity(std::span<const ScoreResult> scores) {
  if (scores.empty()) throw UsageError("perplexity of an empty corpus");
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].token_count == 0) {
      throw UsageError(fmt::format("utterance {} has no tokens", i));
    }
    sum += -scores[i].logprob / static_cast<double>(scores[i].token_count);
  }
  return std::exp(sum / static_cast<double>(scores.size()));
}

double perplexity(std::span<const Utterance> utterances, Scorer& scorer) {
  const auto scores = scorer.score_batch(utterances);
  return perplexity(scores);
}

double corpus_perplexity(std::span<const ScoreResult> scores) {
  if (scores.empty()) throw UsageError("perplexity of an empty corpus");
  double nll = 0.0;
  std::size_t tokens = 0;
  for (const auto& s : scores) {
    nll -= s.logprob;
    tokens += s.token_count;
  }
  if (tokens == 0) throw UsageError("corpus has no tokens");
  return std::exp(nll / static_cast<double>(tokens));
}

double token_f1(std::span<const std::string> u, std::span<const std::string> v) {
  if (u.empty() && v.empty()) return 1.0;
  if (u.empty() || v.empty()) return 0.0;
  std::unordered_map<std::string, std::size_t> bag;
  for (const auto& t : u) ++bag[t];
  std::size_t overlap = 0;
  for (const auto& t : v) {
    auto it = bag.find(t);
    if (it != bag.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(v.size());
  const double r = static_cast<double>(overlap) / static_cast<double>(u.size());
  return 2.0 * p * r / (p + r);
}

std::optional<double> kendall_tau(std::span<const std::string> u,
                                  std::span<const std::string> v) {
  // Position in v of the k-th occurrence of each token.
  std::unordered_map<std::string, std::vector<std::size_t>> in_v;
  for (std::size_t j = 0; j < v.size(); ++j) in_v[v[j]].push_back(j);
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<std::size_t> ranks;
  for (const auto& t : u) {
    const std::size_t k = seen[t]++;
    auto it = in_v.find(t);
    if (it != in_v.end() && k < it->second.size()) ranks.push_back(it->second[k]);
  }
  const std::size_t n = ranks.size();
  if (n < 2) return std::nullopt;
  std::size_t inversions = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (ranks[a] > ranks[b]) ++inversions;
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return 1.0 - 2.0 * static_cast<double>(inversions) / pairs;
}

double logical_coverage(const Dataset& reference, const Dataset& candidate) {
  if (reference.empty()) throw UsageError("logical coverage needs a non-empty reference");
  std::set<std::string> templates;
  for (const auto& e : candidate.examples) templates.insert(e.template_key.value);
  std::size_t hit = 0;
  for (const auto& e : reference.examples) {
    if (templates.contains(e.template_key.value)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(reference.size());
}

AccuracyResult denotation_accuracy(std::span<const Program> preds,
                                   std::span<const Program> golds,
                                   const Database& db,
                                   EmptyDenotationPolicy policy) {
  if (preds.size() != golds.size()) {
    throw UsageError(fmt::format("{} predictions for {} gold programs",
                                 preds.size(), golds.size()));
  }
  AccuracyResult r;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const ExecResult gold = execute(golds[i], db);
    const bool unusable = !gold.ok() || gold.value().empty();
    if (policy == EmptyDenotationPolicy::kFlag && unusable) {
      ++r.flagged;
      continue;
    }
    ++r.total;
    if (!gold.ok()) continue;
    const ExecResult pred = execute(preds[i], db);
    if (pred.ok() && denotation_equal(pred.value(), gold.value())) ++r.correct;
  }
  if (r.total > 0) {
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
  }
  return r;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  auto put = [&j](const char* key, const std::optional<double>& v) {
    if (v) {
      j[key] = *v;
    } else {
      j[key] = nullptr;
    }
  };
  put("perplexity", perplexity);
  put("corpus_perplexity", corpus_perplexity);
  put("token_f1_mean", token_f1_mean);
  put("kendall_tau_mean", kendall_tau_mean);
  put("logical_coverage", logical_coverage);
  put("denotation_accuracy", denotation_accuracy);
  j["counts"] = {
      {"perplexity", perplexity_count},
      {"token_f1", token_f1_count},
      {"kendall_tau", kendall_tau_count},
      {"kendall_tau_excluded", kendall_tau_excluded},
      {"logical_coverage", logical_coverage_count},
      {"denotation_accuracy", denotation_count},
      {"denotation_flagged", denotation_flagged},
  };
  return j.dump(2) + "\n";
}

}  // namespace synthparse
