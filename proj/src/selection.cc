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

#include "synthparse/selection.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include <fmt/format.h>

#include "synthparse/errors.h"
#include "synthparse/random.h"
#include "synthparse/synthesis.h"

namespace synthparse {

void SelectionConfig::validate() const {
  if (top_k < 1) throw UsageError("top_k must be at least 1");
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw UsageError("delta must be a finite value >= 0");
  }
}

void SamplingConfig::validate() const {
  if (size < 1) throw UsageError("sample size must be at least 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw UsageError("alpha must be a finite value >= 0");
  }
}

Dataset score_dataset(const Dataset& d, Scorer& scorer) {
  std::vector<Utterance> utts;
  utts.reserve(d.size());
  for (const auto& e : d.examples) utts.push_back(e.utterance);
  const auto results = scorer.score_batch(utts);
  if (results.size() != d.size()) {
    throw TransportError(fmt::format("scorer returned {} results for {} utterances",
                                     results.size(), d.size()));
  }
  Dataset out = d;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(results[i].logprob)) {
      throw Error(fmt::format("non-finite score for '{}'", out.examples[i].id));
    }
    out.examples[i].score = results[i].logprob;
  }
  return out;
}

namespace {

double require_score(const Example& e) {
  if (!e.score) throw UsageError(fmt::format("example '{}' is not scored", e.id));
  return *e.score;
}

struct Ranked {
  double score;
  std::string program;
  std::string utterance;
};

// True when a ranks strictly ahead of b.
bool ahead(const Ranked& a, const Ranked& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.program != b.program) return a.program < b.program;
  return a.utterance < b.utterance;
}

}  // namespace

Dataset select_top_k(const std::map<std::size_t, Dataset>& buckets,
                     const SelectionConfig& cfg,
                     std::vector<BucketReport>* report) {
  cfg.validate();
  Dataset out;
  out.tag = DatasetTag::kCanonical;
  for (const auto& [depth, bucket] : buckets) {
    BucketReport r;
    r.depth = depth;
    r.input = bucket.size();
    if (!bucket.empty()) out.tag = bucket.tag;

    std::unordered_map<std::string, std::size_t> group_of;
    std::vector<std::vector<std::size_t>> members;
    std::vector<Ranked> best;
    for (std::size_t i = 0; i < bucket.size(); ++i) {
      const Example& e = bucket.examples[i];
      Ranked me{require_score(e), render(e.program), e.utterance_text()};
      auto [it, fresh] = group_of.emplace(e.template_key.value, members.size());
      if (fresh) {
        members.emplace_back();
        best.push_back(me);
      } else if (ahead(me, best[it->second])) {
        best[it->second] = me;
      }
      members[it->second].push_back(i);
    }
    r.groups = members.size();

    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ahead(best[a], best[b]);
    });
    const std::size_t kept = std::min(cfg.top_k, order.size());
    r.groups_kept = kept;

    std::vector<char> keep(bucket.size(), 0);
    for (std::size_t g = 0; g < members.size(); ++g) {
      for (std::size_t i : members[g]) {
        if (best[g].score - *bucket.examples[i].score > cfg.delta) {
          ++r.dropped_by_gap;
        } else {
          keep[i] = 1;
        }
      }
    }
    std::vector<char> group_kept(members.size(), 0);
    for (std::size_t k = 0; k < kept; ++k) group_kept[order[k]] = 1;
    for (std::size_t i = 0; i < bucket.size(); ++i) {
      const std::size_t g = group_of.at(bucket.examples[i].template_key.value);
      if (keep[i] && group_kept[g]) {
        out.examples.push_back(bucket.examples[i]);
        ++r.output;
      }
    }
    if (report) report->push_back(r);
  }
  return out;
}

Dataset select_top_k(const Dataset& d, const SelectionConfig& cfg,
                     std::vector<BucketReport>* report) {
  Dataset out = select_top_k(bucket_by_depth(d), cfg, report);
  out.tag = d.tag;
  return out;
}

namespace {

std::vector<std::size_t> ranked_draw(const std::vector<double>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return keys[a] > keys[b];
  });
  return order;
}

}  // namespace

std::vector<std::size_t> uniform_shuffle(std::size_t n, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  std::vector<double> keys(n);
  for (auto& k : keys) k = rng.open_unit();
  return ranked_draw(keys);
}

SampleResult sample_validation(const Dataset& d, const SamplingConfig& cfg) {
  cfg.validate();
  if (d.size() < cfg.size) {
    throw UsageError(fmt::format("cannot sample {} examples from a dataset of {}",
                                 cfg.size, d.size()));
  }
  Xoshiro256 rng(cfg.seed);
  std::vector<double> keys(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double score = require_score(d.examples[i]);
    const double u = rng.open_unit();
    keys[i] = cfg.alpha * score - std::log(-std::log(u));
  }
  const std::vector<std::size_t> order = ranked_draw(keys);

  SampleResult out;
  out.validation.tag = DatasetTag::kValidation;
  out.training.tag = d.tag;
  std::vector<char> taken(d.size(), 0);
  for (std::size_t k = 0; k < cfg.size; ++k) {
    taken[order[k]] = 1;
    Example e = d.examples[order[k]];
    e.provenance.kind = Provenance::Kind::kValidation;
    out.validation.examples.push_back(std::move(e));
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!taken[i]) out.training.examples.push_back(d.examples[i]);
  }
  return out;
}

}  // namespace synthparse
