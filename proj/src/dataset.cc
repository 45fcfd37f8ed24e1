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

#include "synthparse/dataset.h"

#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "synthparse/errors.h"
#include "synthparse/grammar.h"
#include "synthparse/io.h"

namespace synthparse {

using Json = nlohmann::ordered_json;

std::string Example::utterance_text() const { return join_tokens(utterance); }

std::string Example::pair_key() const {
  return utterance_text() + '\t' + render(program);
}

Example make_example(std::string id, std::vector<std::string> utterance,
                     Program program, std::size_t depth,
                     Provenance provenance) {
  TemplateKey key = template_key(program);
  return Example{std::move(id),  std::move(utterance), std::move(program),
                 depth,          std::move(key),       std::nullopt,
                 std::move(provenance)};
}

std::string_view to_string(DatasetTag tag) {
  switch (tag) {
    case DatasetTag::kCanonical:
      return "D_can";
    case DatasetTag::kParaphrased:
      return "D_par";
    case DatasetTag::kValidation:
      return "D_val";
    case DatasetTag::kNatural:
      return "D_nat";
    case DatasetTag::kOther:
      return "other";
  }
  return "other";
}

namespace {

Json provenance_json(const Provenance& p) {
  Json j = Json::object();
  switch (p.kind) {
    case Provenance::Kind::kCanonical:
      j["kind"] = "canonical";
      break;
    case Provenance::Kind::kParaphrased:
      j["kind"] = "paraphrased";
      j["source"] = p.source_id;
      j["iteration"] = p.iteration;
      break;
    case Provenance::Kind::kValidation:
      j["kind"] = "validation";
      if (!p.source_id.empty()) {
        j["source"] = p.source_id;
        j["iteration"] = p.iteration;
      }
      break;
  }
  return j;
}

Provenance provenance_from_json(const Json& j) {
  Provenance p;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "canonical") {
    p.kind = Provenance::Kind::kCanonical;
  } else if (kind == "paraphrased") {
    p.kind = Provenance::Kind::kParaphrased;
  } else if (kind == "validation") {
    p.kind = Provenance::Kind::kValidation;
  } else {
    throw ParseError(fmt::format("unknown provenance kind '{}'", kind), 0, 0);
  }
  if (j.contains("source")) p.source_id = j.at("source").get<std::string>();
  if (j.contains("iteration")) p.iteration = j.at("iteration").get<int>();
  return p;
}

}  // namespace

std::string to_jsonl(const Dataset& d) {
  std::string out;
  for (const auto& e : d.examples) {
    Json j = Json::object();
    j["id"] = e.id;
    j["utterance"] = e.utterance_text();
    j["program"] = render(e.program);
    j["depth"] = e.depth;
    j["template"] = e.template_key.value;
    if (e.score && std::isfinite(*e.score)) {
      j["score"] = *e.score;
    } else {
      j["score"] = nullptr;
    }
    j["provenance"] = provenance_json(e.provenance);
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

Dataset from_jsonl(std::string_view text, DatasetTag tag) {
  Dataset d;
  d.tag = tag;
  int line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const Json j = Json::parse(line);
      Program program = parse_program(j.at("program").get<std::string>());
      Example e = make_example(
          j.at("id").get<std::string>(),
          tokenize(j.at("utterance").get<std::string>()), std::move(program),
          j.at("depth").get<std::size_t>(),
          j.contains("provenance") ? provenance_from_json(j.at("provenance"))
                                   : Provenance::canonical());
      if (j.contains("template") &&
          j.at("template").get<std::string>() != e.template_key.value) {
        throw ParseError("template does not match program", 0, 0);
      }
      if (j.contains("score") && !j.at("score").is_null()) {
        e.score = j.at("score").get<double>();
      }
      d.examples.push_back(std::move(e));
    } catch (const Json::exception& e) {
      throw ParseError(fmt::format("jsonl: {}", e.what()), line_no, 1);
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("jsonl: {}", e.detail()), line_no, 1);
    } catch (const ProgramError& e) {
      throw ParseError(fmt::format("jsonl: {}", e.what()), line_no, 1);
    }
  }
  return d;
}

void write_jsonl(const Dataset& d, const std::string& path) {
  io::write_file_atomic(path, to_jsonl(d));
}

Dataset read_jsonl(const std::string& path, DatasetTag tag) {
  const std::string text = io::read_file(path);
  try {
    return from_jsonl(text, tag);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.detail()), e.line(),
                     e.column());
  }
}

}  // namespace synthparse
