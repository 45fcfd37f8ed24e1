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

#ifndef SYNTHPARSE_SCORER_H_
#define SYNTHPARSE_SCORER_H_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "synthparse/adapter.h"

namespace synthparse {

struct ScoreResult {
  double logprob = 0.0;  // natural log, summed over tokens
  std::size_t token_count = 0;

  friend bool operator==(const ScoreResult&, const ScoreResult&) = default;
};

using Utterance = std::vector<std::string>;

class Scorer {
 public:
  virtual ~Scorer() = default;

  // One result per utterance, in order.
  virtual std::vector<ScoreResult> score_batch(
      std::span<const Utterance> utterances) = 0;

  // Short identifier recorded in manifests.
  virtual std::string describe() const = 0;
};

// Add-one smoothed unigram model with one reserved UNK slot:
// p(w) = (c(w) + 1) / (N + V + 1), p(UNK) = 1 / (N + V + 1).
class UnigramScorer : public Scorer {
 public:
  // Throws UsageError when the corpus has no tokens.
  static UnigramScorer fit(std::span<const Utterance> corpus);
  static UnigramScorer fit_text(const std::string& text);  // one per line

  double probability(const std::string& token) const;
  double unk_probability() const { return 1.0 / denominator_; }
  std::size_t vocabulary_size() const { return counts_.size(); }
  std::size_t token_total() const { return total_; }
  const std::unordered_map<std::string, std::size_t>& counts() const {
    return counts_;
  }

  std::vector<ScoreResult> score_batch(
      std::span<const Utterance> utterances) override;
  ScoreResult score(const Utterance& utterance) const;
  std::string describe() const override;

 private:
  std::unordered_map<std::string, std::size_t> counts_;
  std::size_t total_ = 0;
  double denominator_ = 1.0;
};

// Every token gets the same log-probability.
class UniformScorer : public Scorer {
 public:
  explicit UniformScorer(double token_logprob) : token_logprob_(token_logprob) {}

  std::vector<ScoreResult> score_batch(
      std::span<const Utterance> utterances) override;
  std::string describe() const override;

 private:
  double token_logprob_;
};

// Scores through POST /score on a model adapter, in batches.
class RemoteScorer : public Scorer {
 public:
  explicit RemoteScorer(std::string base_url, std::size_t batch_size = 64);

  std::vector<ScoreResult> score_batch(
      std::span<const Utterance> utterances) override;
  std::string describe() const override;

 private:
  AdapterClient client_;
  std::size_t batch_size_;
};

}  // namespace synthparse

#endif  // SYNTHPARSE_SCORER_H_
