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

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "synthparse/cli.h"
#include "synthparse/dataset.h"
#include "synthparse/errors.h"
#include "synthparse/executor.h"
#include "synthparse/grammar.h"
#include "synthparse/io.h"
#include "synthparse/metrics.h"
#include "synthparse/pipeline.h"
#include "synthparse/program.h"
#include "synthparse/scorer.h"
#include "synthparse/selection.h"
#include "synthparse/synthesis.h"

namespace py = pybind11;
using namespace synthparse;

namespace {

Dataset to_dataset(const std::vector<Example>& examples) {
  Dataset d;
  d.examples = examples;
  return d;
}

std::string provenance_kind(const Provenance& p) {
  switch (p.kind) {
    case Provenance::Kind::kParaphrased:
      return "paraphrased";
    case Provenance::Kind::kValidation:
      return "validation";
    default:
      return "canonical";
  }
}

// Unigram scorer fitted on a corpus file, or uniform without one.
std::unique_ptr<Scorer> make_local_scorer(const std::optional<std::string>& corpus,
                                          double token_logprob) {
  if (corpus) return std::make_unique<UnigramScorer>(UnigramScorer::fit_text(io::read_file(*corpus)));
  return std::make_unique<UniformScorer>(token_logprob);
}

py::object to_py(const ExecResult& r) {
  py::dict d;
  d["ok"] = r.ok();
  if (r.ok()) {
    py::list values;
    for (const auto& v : r.value().values()) values.append(v.to_string());
    d["values"] = values;
  } else {
    d["error"] = std::string(to_string(r.error().reason));
    d["detail"] = r.error().detail;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Grammar-driven synthesis of semantic parsing data";
  m.attr("__version__") = "0.1.0";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<GrammarError>(m, "GrammarError", base.ptr());
  py::register_exception<ProgramError>(m, "ProgramError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<TransportError>(m, "TransportError", base.ptr());

  m.def("canonical", [](const std::string& text) { return render(parse_program(text)); },
        py::arg("program"), "Canonical rendering of a program.");
  m.def("template_key", [](const std::string& text) {
    return template_key(parse_program(text)).value;
  }, py::arg("program"));
  m.def("alpha_equal", [](const std::string& a, const std::string& b) {
    return parse_program(a) == parse_program(b);
  });

  py::class_<Grammar>(m, "Grammar")
      .def_static("from_text", [](const std::string& t) { return load_grammar(t); })
      .def_static("from_file", &load_grammar_file)
      .def_property_readonly("num_productions",
                             [](const Grammar& g) { return g.productions().size(); })
      .def_property_readonly("categories", &Grammar::categories)
      .def("diagnostics", [](const Grammar& g) {
        std::vector<std::string> out;
        for (const auto& d : validate_grammar(g)) out.push_back(d.to_string());
        return out;
      })
      .def("render", &render_grammar)
      .def("parse", [](const Grammar& g, const std::string& utterance, std::size_t max_depth) {
        std::vector<std::pair<std::string, std::size_t>> out;
        for (const auto& p : parse_chart(g, tokenize(utterance), max_depth)) {
          out.emplace_back(render(p.program), p.depth);
        }
        return out;
      }, py::arg("utterance"), py::arg("max_depth") = 6,
         "(program, depth) pairs, shallowest first.");

  py::class_<Database>(m, "Database")
      .def_static("from_text", [](const std::string& t) { return load_database(t); })
      .def_static("from_file", &load_database_file)
      .def("execute", [](const Database& db, const std::string& program) {
        return to_py(execute(parse_program(program), db));
      }, py::arg("program"));

  py::class_<Example>(m, "Example")
      .def(py::init([](std::string id, const std::string& utterance, const std::string& program,
                       std::size_t depth, std::optional<double> score) {
             Example e = make_example(std::move(id), tokenize(utterance),
                                      parse_program(program), depth);
             e.score = score;
             return e;
           }),
           py::arg("id"), py::arg("utterance"), py::arg("program"), py::arg("depth") = 1,
           py::arg("score") = py::none())
      .def_readonly("id", &Example::id)
      .def_readonly("tokens", &Example::utterance)
      .def_property_readonly("utterance", &Example::utterance_text)
      .def_property_readonly("program", [](const Example& e) { return render(e.program); })
      .def_readonly("depth", &Example::depth)
      .def_property_readonly("template", [](const Example& e) { return e.template_key.value; })
      .def_readwrite("score", &Example::score)
      .def_property_readonly("provenance",
                             [](const Example& e) { return provenance_kind(e.provenance); })
      .def_property_readonly("source_id",
                             [](const Example& e) { return e.provenance.source_id; })
      .def("__repr__", [](const Example& e) {
        return "<Example " + e.id + " '" + e.utterance_text() + "'>";
      });

  m.def("enumerate", [](const Grammar& g, std::size_t max_depth, bool constraints) {
    Dataset d = enumerate(g, max_depth);
    if (constraints) d = apply_constraints(d, g.constraints(), g);
    return d.examples;
  }, py::arg("grammar"), py::arg("max_depth") = 6, py::arg("constraints") = true);

  m.def("read_jsonl", [](const std::string& path) { return read_jsonl(path).examples; });
  m.def("write_jsonl", [](const std::vector<Example>& examples, const std::string& path) {
    write_jsonl(to_dataset(examples), path);
  });

  m.def("score", [](const std::vector<Example>& examples, std::optional<std::string> corpus,
                    double token_logprob) {
    auto scorer = make_local_scorer(corpus, token_logprob);
    return score_dataset(to_dataset(examples), *scorer).examples;
  }, py::arg("examples"), py::arg("corpus") = py::none(), py::arg("token_logprob") = 0.0,
     "Scores with a unigram model fitted on `corpus`, or a uniform one.");

  m.def("select_top_k", [](const std::vector<Example>& examples, std::size_t top_k,
                           double delta) {
    SelectionConfig cfg{top_k, delta};
    cfg.validate();
    return select_top_k(to_dataset(examples), cfg).examples;
  }, py::arg("examples"), py::arg("top_k") = 2000, py::arg("delta") = 5.0);

  m.def("sample_validation", [](const std::vector<Example>& examples, std::size_t size,
                                double alpha, std::uint64_t seed) {
    SamplingConfig cfg{alpha, size, seed};
    cfg.validate();
    const SampleResult r = sample_validation(to_dataset(examples), cfg);
    return std::make_pair(r.validation.examples, r.training.examples);
  }, py::arg("examples"), py::arg("size"), py::arg("alpha") = 0.4, py::arg("seed") = 0,
     "(validation, training)");

  m.def("perplexity", [](const std::vector<std::string>& utterances,
                         std::optional<std::string> corpus, double token_logprob) {
    std::vector<Utterance> us;
    for (const auto& u : utterances) us.push_back(tokenize(u));
    auto scorer = make_local_scorer(corpus, token_logprob);
    return perplexity(us, *scorer);
  }, py::arg("utterances"), py::arg("corpus") = py::none(), py::arg("token_logprob") = 0.0);

  m.def("token_f1", [](const std::string& u, const std::string& v) {
    return token_f1(tokenize(u), tokenize(v));
  });
  m.def("kendall_tau", [](const std::string& u, const std::string& v) {
    return kendall_tau(tokenize(u), tokenize(v));
  });
  m.def("logical_coverage", [](const std::vector<Example>& ref, const std::vector<Example>& cand) {
    return logical_coverage(to_dataset(ref), to_dataset(cand));
  });

  m.def("run_pipeline", [](const std::string& config_path, const std::string& run_dir) {
    const PipelineOutcome o = run_pipeline(load_config(config_path), run_dir);
    return std::make_pair(o.run_dir, o.manifest_json);
  }, py::arg("config"), py::arg("run_dir") = "", "(run directory, manifest JSON)");

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "synthparse");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "(exit code, stdout, stderr)");
}
