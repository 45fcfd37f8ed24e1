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

#ifndef SYNTHPARSE_DATASET_H_
#define SYNTHPARSE_DATASET_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synthparse/program.h"

namespace synthparse {

struct Provenance {
  enum class Kind { kCanonical, kParaphrased, kValidation };

  Kind kind = Kind::kCanonical;
  std::string source_id;  // paraphrased: the example it was rewritten from
  int iteration = 0;      // paraphrased: 1-based iteration that produced it

  static Provenance canonical() { return {}; }
  static Provenance paraphrased(std::string source, int iteration) {
    return {Kind::kParaphrased, std::move(source), iteration};
  }

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// The unit flowing through synthesis, selection and paraphrasing.
struct Example {
  std::string id;
  std::vector<std::string> utterance;
  Program program;
  std::size_t depth = 1;
  TemplateKey template_key;
  std::optional<double> score;  // natural-log LM probability
  Provenance provenance;

  std::string utterance_text() const;
  // Identity used for deduplication: utterance and rendered program.
  std::string pair_key() const;
};

// Builds an example with its template key computed from the program.
Example make_example(std::string id, std::vector<std::string> utterance,
                     Program program, std::size_t depth,
                     Provenance provenance = Provenance::canonical());

enum class DatasetTag { kCanonical, kParaphrased, kValidation, kNatural, kOther };

std::string_view to_string(DatasetTag tag);

struct Dataset {
  DatasetTag tag = DatasetTag::kOther;
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

// One JSON object per line: id, utterance, program, depth, template, score,
// provenance. Output is deterministic for identical datasets.
std::string to_jsonl(const Dataset& d);
Dataset from_jsonl(std::string_view text, DatasetTag tag = DatasetTag::kOther);

// Writes to a temporary sibling and renames over `path`.
void write_jsonl(const Dataset& d, const std::string& path);
Dataset read_jsonl(const std::string& path,
                   DatasetTag tag = DatasetTag::kOther);

}  // namespace synthparse

#endif  // SYNTHPARSE_DATASET_H_
