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

#ifndef SYNTHPARSE_SELECTION_H_
#define SYNTHPARSE_SELECTION_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "synthparse/dataset.h"
#include "synthparse/scorer.h"

namespace synthparse {

struct SelectionConfig {
  std::size_t top_k = 2000;
  double delta = 5.0;  // natural-log gap to the group best

  void validate() const;
};

struct SamplingConfig {
  double alpha = 0.4;
  std::size_t size = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BucketReport {
  std::size_t depth = 0;
  std::size_t input = 0;
  std::size_t groups = 0;
  std::size_t dropped_by_gap = 0;
  std::size_t groups_kept = 0;
  std::size_t output = 0;
};

// Sets every example's score to the scorer's total log-probability.
Dataset score_dataset(const Dataset& d, Scorer& scorer);

// Per depth bucket: group by template, drop members more than `delta`
// below their group best, keep the `top_k` groups ranked by best score.
// Survivors keep their input order; buckets are emitted depth-ascending.
// Equal scores break ties on rendered program, then utterance.
Dataset select_top_k(const std::map<std::size_t, Dataset>& buckets,
                     const SelectionConfig& cfg,
                     std::vector<BucketReport>* report = nullptr);
Dataset select_top_k(const Dataset& d, const SelectionConfig& cfg,
                     std::vector<BucketReport>* report = nullptr);

struct SampleResult {
  Dataset validation;  // in draw order, provenance kind = validation
  Dataset training;    // the rest, in input order
};

// Draws cfg.size examples without replacement with weights
// exp(alpha * score). Each example i gets the key
//   alpha * score_i - ln(-ln u_i)
// with u_i the i-th open-unit draw from Xoshiro256(cfg.seed); the largest
// keys win. This orders identically to u_i^(1/w_i).
SampleResult sample_validation(const Dataset& d, const SamplingConfig& cfg);

// The order in which alpha = 0 draws examples: indices sorted by their
// uniform draw, largest first.
std::vector<std::size_t> uniform_shuffle(std::size_t n, std::uint64_t seed);

}  // namespace synthparse

#endif  // SYNTHPARSE_SELECTION_H_
