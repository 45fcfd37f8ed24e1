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

#ifndef SYNTHPARSE_METRICS_H_
#define SYNTHPARSE_METRICS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthparse/dataset.h"
#include "synthparse/executor.h"
#include "synthparse/scorer.h"

namespace synthparse {

// exp of the mean, over utterances, of per-token negative log-likelihood.
// Throws UsageError on an empty list or a zero-length utterance.
double perplexity(std::span<const ScoreResult> scores);
double perplexity(std::span<const Utterance> utterances, Scorer& scorer);

// exp(total NLL / total tokens).
double corpus_perplexity(std::span<const ScoreResult> scores);

// Bag-of-tokens F1. Both empty gives 1, exactly one empty gives 0.
double token_f1(std::span<const std::string> u, std::span<const std::string> v);

// Kendall's tau over the tokens the two sequences share; the k-th
// occurrence of a token in u aligns with its k-th occurrence in v. Absent
// when fewer than two tokens are shared.
std::optional<double> kendall_tau(std::span<const std::string> u,
                                  std::span<const std::string> v);

// Fraction of reference examples whose template occurs in candidate.
double logical_coverage(const Dataset& reference, const Dataset& candidate);

enum class EmptyDenotationPolicy {
  kMatch,  // empty gold denotations compare like any other
  kFlag,   // indices with an empty or failing gold are excluded and counted
};

struct AccuracyResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;    // indices counted in the denominator
  std::size_t flagged = 0;  // excluded under kFlag
};

AccuracyResult denotation_accuracy(std::span<const Program> preds,
                                   std::span<const Program> golds,
                                   const Database& db,
                                   EmptyDenotationPolicy policy =
                                       EmptyDenotationPolicy::kFlag);

struct MetricReport {
  std::optional<double> perplexity;
  std::optional<double> corpus_perplexity;
  std::size_t perplexity_count = 0;

  std::optional<double> token_f1_mean;
  std::size_t token_f1_count = 0;

  std::optional<double> kendall_tau_mean;
  std::size_t kendall_tau_count = 0;
  std::size_t kendall_tau_excluded = 0;  // pairs with < 2 shared tokens

  std::optional<double> logical_coverage;
  std::size_t logical_coverage_count = 0;

  std::optional<double> denotation_accuracy;
  std::size_t denotation_count = 0;
  std::size_t denotation_flagged = 0;

  std::string to_json() const;  // pretty, stable key order
};

}  // namespace synthparse

#endif  // SYNTHPARSE_METRICS_H_
