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

#ifndef SYNTHPARSE_SYNTHESIS_H_
#define SYNTHPARSE_SYNTHESIS_H_

#include <cstddef>
#include <map>
#include <span>

#include "synthparse/dataset.h"
#include "synthparse/errors.h"
#include "synthparse/grammar.h"

namespace synthparse {

struct EnumerationOptions {
  std::size_t max_depth = 6;
  // Abort once this many derivations have been built across all cells.
  std::size_t max_examples = 10'000'000;
};

struct EnumerationStats {
  std::size_t derivations = 0;       // ROOT derivations within the bound
  std::size_t duplicates = 0;        // collapsed (utterance, program) pairs
  std::size_t ill_typed = 0;         // compositions rejected by β-reduction
};

// Exhaustive enumeration of ROOT derivations with at most `max_depth`
// production applications. Output is depth-ascending, then production
// file order, then child order. Ids are "can-<n>". Throws UsageError for
// max_depth < 1 and SynthesisLimitError when the cap is exceeded.
Dataset enumerate(const Grammar& g, const EnumerationOptions& options,
                  EnumerationStats* stats = nullptr);
inline Dataset enumerate(const Grammar& g, std::size_t max_depth) {
  return enumerate(g, EnumerationOptions{max_depth});
}

class SynthesisLimitError : public Error {
 public:
  using Error::Error;
};

// True when `p` chains `=` filters over `rule.relation` binding the same
// entity twice (with at least `rule.arity` filters in the chain).
bool violates(const Program& p, const ConstraintRule& rule);

// Drops violating examples; survivor order is preserved.
Dataset apply_constraints(const Dataset& d,
                          std::span<const ConstraintRule> rules);
// Same, after checking every rule's relation against the grammar lexicon
// (UsageError on an unknown relation).
Dataset apply_constraints(const Dataset& d,
                          std::span<const ConstraintRule> rules,
                          const Grammar& lexicon);

std::map<std::size_t, Dataset> bucket_by_depth(const Dataset& d);

}  // namespace synthparse

#endif  // SYNTHPARSE_SYNTHESIS_H_
