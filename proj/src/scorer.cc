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

#include "synthparse/scorer.h"

#include <cmath>

#include <fmt/format.h>

#include "synthparse/errors.h"
#include "synthparse/grammar.h"

namespace synthparse {

UnigramScorer UnigramScorer::fit(std::span<const Utterance> corpus) {
  UnigramScorer s;
  for (const auto& u : corpus) {
    for (const auto& raw : u) {
      for (auto& t : tokenize(raw)) {
        ++s.counts_[t];
        ++s.total_;
      }
    }
  }
  if (s.total_ == 0) throw UsageError("cannot fit a unigram model on an empty corpus");
  s.denominator_ = static_cast<double>(s.total_ + s.counts_.size() + 1);
  return s;
}

UnigramScorer UnigramScorer::fit_text(const std::string& text) {
  std::vector<Utterance> corpus;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    corpus.push_back(tokenize(std::string_view(text).substr(start, end - start)));
    start = end + 1;
  }
  return fit(corpus);
}

double UnigramScorer::probability(const std::string& token) const {
  const auto it = counts_.find(token);
  if (it == counts_.end()) return unk_probability();
  return static_cast<double>(it->second + 1) / denominator_;
}

ScoreResult UnigramScorer::score(const Utterance& utterance) const {
  ScoreResult r;
  for (const auto& raw : utterance) {
    for (const auto& t : tokenize(raw)) {
      r.logprob += std::log(probability(t));
      ++r.token_count;
    }
  }
  return r;
}

std::vector<ScoreResult> UnigramScorer::score_batch(
    std::span<const Utterance> utterances) {
  std::vector<ScoreResult> out;
  out.reserve(utterances.size());
  for (const auto& u : utterances) out.push_back(score(u));
  return out;
}

std::string UnigramScorer::describe() const {
  return fmt::format("unigram(N={}, V={})", total_, counts_.size());
}

std::vector<ScoreResult> UniformScorer::score_batch(
    std::span<const Utterance> utterances) {
  std::vector<ScoreResult> out;
  out.reserve(utterances.size());
  for (const auto& u : utterances) {
    std::size_t n = 0;
    for (const auto& raw : u) n += tokenize(raw).size();
    out.push_back({token_logprob_ * static_cast<double>(n), n});
  }
  return out;
}

std::string UniformScorer::describe() const {
  return fmt::format("uniform({})", token_logprob_);
}

RemoteScorer::RemoteScorer(std::string base_url, std::size_t batch_size)
    : client_(std::move(base_url)), batch_size_(batch_size == 0 ? 1 : batch_size) {}

std::vector<ScoreResult> RemoteScorer::score_batch(
    std::span<const Utterance> utterances) {
  std::vector<ScoreResult> out;
  out.reserve(utterances.size());
  for (std::size_t begin = 0, batch = 0; begin < utterances.size();
       begin += batch_size_, ++batch) {
    const std::size_t end = std::min(utterances.size(), begin + batch_size_);
    std::vector<std::string> texts;
    for (std::size_t i = begin; i < end; ++i) {
      texts.push_back(join_tokens(utterances[i]));
    }
    try {
      for (const auto& item : client_.score(texts)) {
        out.push_back({item.logprob, item.token_count});
      }
    } catch (const TransportError& e) {
      throw TransportError(fmt::format("batch {}: {}", batch, e.what()));
    }
  }
  return out;
}

std::string RemoteScorer::describe() const {
  return "remote(" + client_.base_url() + ")";
}

}  // namespace synthparse
