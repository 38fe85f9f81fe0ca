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

// Single entry point: convert / validate / probe / evaluate / analyze /
// baseline. Exit 0 on success, 1 on data or validation errors (with a
// machine-readable report on stderr), 2 on usage errors. All file outputs are
// written atomically.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qaprobe/qaprobe.hpp"

namespace {

using qaprobe::ordered_json;

struct ValidationFailure {
  qaprobe::ValidationReport report;
};

void write_json_file(const std::string& path, const ordered_json& j) {
  qaprobe::atomic_write_file(path, j.dump(2) + "\n");
}

int fail(const std::string& kind, const std::string& message,
         ordered_json details = ordered_json()) {
  ordered_json err;
  err["error"]["kind"] = kind;
  err["error"]["message"] = message;
  if (!details.is_null()) err["error"]["details"] = std::move(details);
  std::cerr << err.dump() << "\n";
  return 1;
}

qaprobe::Dataset load_validated(const std::string& path) {
  qaprobe::Dataset d = qaprobe::load_dataset(path);
  qaprobe::ValidationReport rep = qaprobe::validate_dataset(d);
  if (!rep.pass()) throw ValidationFailure{std::move(rep)};
  return d;
}

struct ConvertArgs {
  std::string from, in, evidence, out, report;
};

void run_convert(const ConvertArgs& a) {
  std::pair<qaprobe::Dataset, qaprobe::ConversionReport> result;
  if (a.from == "squad") {
    result = qaprobe::convert_squad(qaprobe::parse_json_text(qaprobe::read_file(a.in)));
  } else if (a.from == "triviaqa") {
    if (a.evidence.empty())
      throw CLI::ValidationError("convert", "--evidence DIR is required for triviaqa");
    result = qaprobe::convert_triviaqa(
        qaprobe::parse_json_text(qaprobe::read_file(a.in)),
        std::filesystem::path(a.evidence));
  } else if (a.from == "nq") {
    result = qaprobe::convert_nq(qaprobe::read_file(a.in));
  } else if (a.from == "quac") {
    result = qaprobe::convert_quac(qaprobe::parse_json_text(qaprobe::read_file(a.in)));
  } else {
    result = qaprobe::convert_newsqa(qaprobe::parse_json_text(qaprobe::read_file(a.in)));
  }
  qaprobe::save_dataset(result.first, a.out);
  ordered_json rep = result.second.to_json();
  rep["converter"] = a.from;
  write_json_file(a.report, rep);
  std::cerr << "convert " << a.from << ": read=" << result.second.read
            << " emitted=" << result.second.emitted
            << " dropped=" << result.second.dropped_total() << "\n";
}

struct ValidateArgs {
  std::string in, report;
};

void run_validate(const ValidateArgs& a) {
  qaprobe::Dataset d = qaprobe::load_dataset(a.in);
  qaprobe::ValidationReport rep = qaprobe::validate_dataset(d);
  if (!a.report.empty())
    write_json_file(a.report, rep.to_json());
  else
    std::cout << rep.to_json().dump(2) << "\n";
  if (!rep.pass()) throw ValidationFailure{std::move(rep)};
}

struct ProbeArgs {
  std::string kind, in, out, report, pos_sidecar, mode;
  double rate = 0.1;
  std::uint64_t seed = qaprobe::kDefaultSeed;
  int threads = 1;
};

void run_probe(const ProbeArgs& a) {
  qaprobe::Dataset d = load_validated(a.in);
  qaprobe::MainVerbFinder finder = qaprobe::heuristic_verb_finder();
  if (!a.pos_sidecar.empty())
    finder = qaprobe::sidecar_verb_finder(
        qaprobe::pos_sidecar_from_json(
            qaprobe::parse_json_text(qaprobe::read_file(a.pos_sidecar))),
        qaprobe::heuristic_verb_finder());

  std::pair<qaprobe::Dataset, qaprobe::TransformReport> result;
  qaprobe::ProbeSeed seed{a.seed};
  if (a.kind == "random-labels") {
    result = qaprobe::corrupt_labels(std::move(d), a.rate, seed, a.threads);
  } else if (a.kind == "shuffle") {
    result = qaprobe::shuffle_context(std::move(d), seed,
                                      qaprobe::default_sentence_splitter(), a.threads);
  } else if (a.kind == "truncate") {
    auto mode = qaprobe::truncate_mode_from_string(a.mode);
    if (!mode)
      throw CLI::ValidationError(
          "probe", "--mode must be one of first_half, first_word, no_words");
    result = qaprobe::truncate_questions(std::move(d), *mode, a.threads);
  } else if (a.kind == "filler") {
    result = qaprobe::add_filler(std::move(d), seed, finder, a.threads);
  } else {
    result = qaprobe::negate_questions(std::move(d), finder, a.threads);
  }
  qaprobe::save_dataset(result.first, a.out);
  write_json_file(a.report, result.second.to_json());
  std::cerr << "probe " << a.kind << ": seen=" << result.second.seen
            << " altered=" << result.second.altered << "\n";
}

struct EvaluateArgs {
  std::string dataset, predictions, out;
  int threads = 1;
};

void run_evaluate(const EvaluateArgs& a) {
  qaprobe::Dataset d = qaprobe::load_dataset(a.dataset);
  qaprobe::PredictionSet p = qaprobe::load_predictions(a.predictions);
  qaprobe::EvalReport rep = qaprobe::evaluate(d, p, a.threads);
  write_json_file(a.out, rep.to_json());
  std::cout << rep.render_text();
}

struct OverlapArgs {
  std::string dataset, out;
  std::vector<std::string> predictions;
  int buckets = 5;
  double threshold = 0.5;
  int threads = 1;
};

void run_overlap(const OverlapArgs& a) {
  qaprobe::Dataset d = qaprobe::load_dataset(a.dataset);
  std::vector<qaprobe::PredictionSet> preds;
  for (const auto& path : a.predictions) preds.push_back(qaprobe::load_predictions(path));
  qaprobe::OverlapReport rep =
      qaprobe::overlap_report(d, preds, a.buckets, a.threshold, a.threads);
  write_json_file(a.out, rep.to_json());
}

struct AgreementArgs {
  std::string dataset, out;
  std::vector<std::string> predictions;
  double threshold = 0.5;
  int threads = 1;
};

void run_agreement(const AgreementArgs& a) {
  qaprobe::Dataset d = qaprobe::load_dataset(a.dataset);
  std::vector<qaprobe::PredictionSet> preds;
  for (const auto& path : a.predictions) preds.push_back(qaprobe::load_predictions(path));
  qaprobe::AgreementHistogram h =
      qaprobe::agreement_histogram(d, preds, a.threshold, a.threads);
  write_json_file(a.out, h.to_json());
}

struct BiasArgs {
  std::string dataset, out;
};

void run_bias(const BiasArgs& a) {
  qaprobe::Dataset d = qaprobe::load_dataset(a.dataset);
  qaprobe::BiasReport rep = qaprobe::negation_bias(d);
  write_json_file(a.out, rep.to_json());
}

struct MatrixArgs {
  std::string manifest, out;
};

// Manifest: {"labels": [...], "cells": [[number-or-report-path, ...], ...]}.
// A string cell names an evaluation report file whose "f1" field is used.
void run_matrix(const MatrixArgs& a) {
  ordered_json m = qaprobe::parse_json_text(qaprobe::read_file(a.manifest));
  if (!m.is_object() || !m.contains("labels") || !m["labels"].is_array() ||
      !m.contains("cells") || !m["cells"].is_array())
    throw qaprobe::SchemaError("$", "manifest needs labels and cells arrays");
  std::vector<std::string> labels;
  for (const auto& l : m["labels"]) labels.push_back(l.get<std::string>());
  std::vector<std::vector<std::optional<double>>> cells;
  for (const auto& row : m["cells"]) {
    cells.emplace_back();
    for (const auto& cell : row) {
      if (cell.is_number()) {
        cells.back().push_back(cell.get<double>());
      } else if (cell.is_string()) {
        ordered_json rep =
            qaprobe::parse_json_text(qaprobe::read_file(cell.get<std::string>()));
        if (!rep.is_object() || !rep.contains("f1") || !rep["f1"].is_number())
          throw qaprobe::SchemaError(cell.get<std::string>(),
                                     "evaluation report has no f1 field");
        cells.back().push_back(rep["f1"].get<double>());
      } else {
        cells.back().push_back(std::nullopt);
      }
    }
  }
  qaprobe::GeneralizationMatrix grid = qaprobe::generalization_matrix(cells, labels);
  write_json_file(a.out, grid.to_json());
  std::cout << grid.render_text();
}

struct BaselineArgs {
  std::string kind, dataset, entities, out;
  int threads = 1;
};

void run_baseline(const BaselineArgs& a) {
  qaprobe::Dataset d = qaprobe::load_dataset(a.dataset);
  qaprobe::EntityAnnotationSet ents;
  if (!a.entities.empty()) {
    ents = qaprobe::load_entities(a.entities);
  } else {
    ents = qaprobe::annotate_dataset(d, a.threads);
    std::cerr << "baseline: no --entities supplied, using bundled approximate NER\n";
  }
  qaprobe::PredictionSet preds = a.kind == "person-ner"
                                     ? qaprobe::person_ner_baseline(d, ents)
                                     : qaprobe::first_word_ner_baseline(d, ents);
  qaprobe::save_predictions(preds, a.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dataset probing toolkit for extractive question answering"};
  app.set_version_flag("--version", std::string("qaprobe ") + qaprobe::kToolkitVersion +
                                        " (schema " + qaprobe::kSchemaVersion + ")");
  int threads = 1;
  app.add_option("--threads", threads, "worker thread cap")->check(CLI::PositiveNumber);
  app.require_subcommand(1);

  ConvertArgs conv;
  CLI::App* c = app.add_subcommand("convert", "convert an upstream dataset");
  c->fallthrough();
  c->add_option("--from", conv.from, "source format")
      ->required()
      ->check(CLI::IsMember({"squad", "triviaqa", "nq", "quac", "newsqa"}));
  c->add_option("--in", conv.in, "source file")->required()->check(CLI::ExistingFile);
  c->add_option("--evidence", conv.evidence, "evidence document directory (triviaqa)")
      ->check(CLI::ExistingDirectory);
  c->add_option("--out", conv.out, "output dataset file")->required();
  c->add_option("--report", conv.report, "conversion report file")->required();
  c->callback([&] { run_convert(conv); });

  ValidateArgs val;
  CLI::App* v = app.add_subcommand("validate", "validate a dataset file");
  v->fallthrough();
  v->add_option("--in", val.in, "dataset file")->required()->check(CLI::ExistingFile);
  v->add_option("--report", val.report, "validation report file");
  v->callback([&] { run_validate(val); });

  ProbeArgs probe;
  CLI::App* p = app.add_subcommand("probe", "apply a dataset transformation");
  p->fallthrough();
  p->add_option("--kind", probe.kind, "transformation")
      ->required()
      ->check(CLI::IsMember({"random-labels", "shuffle", "truncate", "filler", "negate"}));
  p->add_option("--rate", probe.rate, "fraction of answerable examples to corrupt")
      ->check(CLI::Range(0.0, 1.0));
  p->add_option("--mode", probe.mode, "truncation mode");
  p->add_option("--seed", probe.seed, "master seed");
  p->add_option("--pos-sidecar", probe.pos_sidecar,
                "question id -> [token, tag] pairs (Universal POS)")
      ->check(CLI::ExistingFile);
  p->add_option("--in", probe.in, "input dataset")->required()->check(CLI::ExistingFile);
  p->add_option("--out", probe.out, "output dataset")->required();
  p->add_option("--report", probe.report, "transform report file")->required();
  p->callback([&] {
    probe.threads = threads;
    run_probe(probe);
  });

  EvaluateArgs ev;
  CLI::App* e = app.add_subcommand("evaluate", "score predictions against gold");
  e->fallthrough();
  e->add_option("--dataset", ev.dataset, "dataset file")->required()->check(CLI::ExistingFile);
  e->add_option("--predictions", ev.predictions, "prediction file")
      ->required()
      ->check(CLI::ExistingFile);
  e->add_option("--out", ev.out, "evaluation report file")->required();
  e->callback([&] {
    ev.threads = threads;
    run_evaluate(ev);
  });

  CLI::App* an = app.add_subcommand("analyze", "dataset-level analyses");
  an->require_subcommand(1);
  an->fallthrough();

  OverlapArgs ov;
  CLI::App* o = an->add_subcommand("overlap", "question/context overlap report");
  o->fallthrough();
  o->add_option("--dataset", ov.dataset, "dataset file")->required()->check(CLI::ExistingFile);
  o->add_option("--predictions", ov.predictions, "prediction files (repeatable)")
      ->check(CLI::ExistingFile);
  o->add_option("--buckets", ov.buckets, "overlap bins")->check(CLI::PositiveNumber);
  o->add_option("--threshold", ov.threshold, "correctness F1 cutoff")
      ->check(CLI::Range(0.0, 1.0));
  o->add_option("--out", ov.out, "report file")->required();
  o->callback([&] {
    ov.threads = threads;
    run_overlap(ov);
  });

  AgreementArgs ag;
  CLI::App* g = an->add_subcommand("agreement", "model agreement histogram");
  g->fallthrough();
  g->add_option("--dataset", ag.dataset, "dataset file")->required()->check(CLI::ExistingFile);
  g->add_option("--predictions", ag.predictions, "prediction files (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  g->add_option("--threshold", ag.threshold, "correctness F1 cutoff")
      ->check(CLI::Range(0.0, 1.0));
  g->add_option("--out", ag.out, "report file")->required();
  g->callback([&] {
    ag.threads = threads;
    run_agreement(ag);
  });

  BiasArgs bi;
  CLI::App* b = an->add_subcommand("negation-bias", "negation marker bias report");
  b->fallthrough();
  b->add_option("--dataset", bi.dataset, "training dataset file")
      ->required()
      ->check(CLI::ExistingFile);
  b->add_option("--out", bi.out, "report file")->required();
  b->callback([&] { run_bias(bi); });

  MatrixArgs mx;
  CLI::App* x = an->add_subcommand("matrix", "cross-dataset generalization matrix");
  x->fallthrough();
  x->add_option("--manifest", mx.manifest, "matrix manifest file")
      ->required()
      ->check(CLI::ExistingFile);
  x->add_option("--out", mx.out, "report file")->required();
  x->callback([&] { run_matrix(mx); });

  BaselineArgs bl;
  CLI::App* base = app.add_subcommand("baseline", "no-training NER baselines");
  base->fallthrough();
  base->add_option("--kind", bl.kind, "baseline kind")
      ->required()
      ->check(CLI::IsMember({"first-word-ner", "person-ner"}));
  base->add_option("--dataset", bl.dataset, "dataset file")
      ->required()
      ->check(CLI::ExistingFile);
  base->add_option("--entities", bl.entities, "entity sidecar file")
      ->check(CLI::ExistingFile);
  base->add_option("--out", bl.out, "prediction output file")->required();
  base->callback([&] {
    bl.threads = threads;
    run_baseline(bl);
  });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ValidationFailure& e) {
    return fail("validation", "dataset failed validation", e.report.to_json());
  } catch (const qaprobe::EvalError& e) {
    ordered_json details;
    details["missing_ids"] = e.missing_ids;
    details["extra_ids"] = e.extra_ids;
    return fail("coverage", e.what(), std::move(details));
  } catch (const qaprobe::SchemaError& e) {
    ordered_json details;
    details["field_path"] = e.field_path;
    return fail("schema", e.what(), std::move(details));
  } catch (const qaprobe::ParseError& e) {
    return fail("parse", e.what());
  } catch (const qaprobe::IoError& e) {
    return fail("io", e.what());
  } catch (const std::invalid_argument& e) {
    return fail("data", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
}
