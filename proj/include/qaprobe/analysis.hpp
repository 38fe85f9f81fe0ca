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

#ifndef QAPROBE_ANALYSIS_HPP_
#define QAPROBE_ANALYSIS_HPP_

// Dataset-level analyses: question/context overlap statistics, model
// agreement histograms, negation bias in training questions and the
// cross-dataset generalization matrix. All pure functions; thresholds and
// bucketing are configuration, echoed in every output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "qaprobe/dataset.hpp"
#include "qaprobe/metrics.hpp"
#include "qaprobe/text.hpp"

namespace qaprobe {

namespace detail {

// Overlap tokenization: lowercase, drop ASCII punctuation, whitespace split.
// No article removal here; that is specific to answer normalization.
inline std::vector<std::u32string> overlap_tokens(std::string_view s) {
  std::u32string lowered = py_lower(utf8_decode(s));
  std::u32string kept;
  kept.reserve(lowered.size());
  for (char32_t c : lowered)
    if (!is_ascii_punct(c)) kept.push_back(c);
  std::vector<std::u32string> out;
  for (const CpSpan& t : ws_tokens(kept)) out.push_back(kept.substr(t.begin, t.size()));
  return out;
}

}  // namespace detail

// Fraction of question tokens whose type occurs in the context, token-wise:
// duplicated question tokens each count, the context contributes a type set.
// Empty questions (after normalization) score 0.
inline double question_context_overlap(std::string_view question,
                                       std::string_view context) {
  std::vector<std::u32string> q = detail::overlap_tokens(question);
  if (q.empty()) return 0.0;
  std::vector<std::u32string> c = detail::overlap_tokens(context);
  std::unordered_set<std::u32string> types(c.begin(), c.end());
  std::size_t hit = 0;
  for (const auto& t : q)
    if (types.count(t)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(q.size());
}

struct OverlapRecord {
  std::string id;
  double ratio = 0.0;
  bool is_impossible = false;
  std::vector<bool> correct;  // one bit per supplied prediction set
};

// Per-question overlap ratios and per-model correctness bits (token F1 at or
// above the threshold counts as correct).
inline std::vector<OverlapRecord> overlap_records(
    const Dataset& d, const std::vector<PredictionSet>& preds,
    double threshold = 0.5, int threads = 1) {
  for (const auto& p : preds) verify_coverage(d, p);
  struct Item {
    const Paragraph* para;
    const QaExample* qa;
  };
  std::vector<Item> items;
  d.for_each_qa(
      [&](const Paragraph& para, const QaExample& qa) { items.push_back({&para, &qa}); });

  std::vector<OverlapRecord> out(items.size());
  parallel_for(items.size(), threads, [&](std::size_t i) {
    OverlapRecord& r = out[i];
    r.id = items[i].qa->id;
    r.ratio = question_context_overlap(items[i].qa->question, items[i].para->context);
    r.is_impossible = items[i].qa->is_impossible;
    r.correct.reserve(preds.size());
    for (const auto& p : preds)
      r.correct.push_back(evaluate_example(*items[i].qa, p.at(r.id)).f1 >= threshold);
  });
  return out;
}

struct AgreementHistogram {
  int models = 0;
  double threshold = 0.5;
  std::vector<std::int64_t> counts;  // counts[j] = questions correct in exactly j models
  std::int64_t total = 0;

  ordered_json to_json() const {
    ordered_json j;
    j["models"] = models;
    j["threshold"] = threshold;
    j["counts"] = counts;
    j["total"] = total;
    return j;
  }
};

// How many questions are answered correctly by exactly 0..k of the supplied
// prediction sets.
inline AgreementHistogram agreement_histogram(const Dataset& d,
                                              const std::vector<PredictionSet>& preds,
                                              double threshold = 0.5,
                                              int threads = 1) {
  if (preds.empty())
    throw std::invalid_argument("agreement_histogram requires at least one prediction set");
  std::vector<OverlapRecord> records = overlap_records(d, preds, threshold, threads);
  AgreementHistogram h;
  h.models = static_cast<int>(preds.size());
  h.threshold = threshold;
  h.counts.assign(preds.size() + 1, 0);
  for (const auto& r : records) {
    std::size_t correct = 0;
    for (bool b : r.correct) correct += b;
    ++h.counts[correct];
    ++h.total;
  }
  return h;
}

struct OverlapBin {
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t total = 0;
  std::vector<std::int64_t> by_models_correct;  // index j = exactly j models correct
};

struct OverlapReport {
  int buckets = 0;
  double threshold = 0.5;
  int models = 0;
  std::vector<OverlapBin> answerable;
  std::vector<OverlapBin> impossible;

  ordered_json to_json() const {
    auto bins_json = [](const std::vector<OverlapBin>& bins) {
      ordered_json arr = ordered_json::array();
      for (const auto& b : bins) {
        ordered_json j;
        j["lo"] = b.lo;
        j["hi"] = b.hi;
        j["total"] = b.total;
        j["by_models_correct"] = b.by_models_correct;
        arr.push_back(std::move(j));
      }
      return arr;
    };
    ordered_json j;
    j["buckets"] = buckets;
    j["threshold"] = threshold;
    j["models"] = models;
    j["answerable"] = bins_json(answerable);
    j["impossible"] = bins_json(impossible);
    return j;
  }
};

// Questions partitioned by impossibility, overlap ratios bucketed into
// equal-width bins over [0,1]; each bin reports how many questions were
// answered correctly by exactly j of the supplied models.
inline OverlapReport overlap_report(const Dataset& d,
                                    const std::vector<PredictionSet>& preds,
                                    int buckets = 5, double threshold = 0.5,
                                    int threads = 1) {
  if (buckets < 1) throw std::invalid_argument("overlap_report requires buckets >= 1");
  std::vector<OverlapRecord> records = overlap_records(d, preds, threshold, threads);

  OverlapReport rep;
  rep.buckets = buckets;
  rep.threshold = threshold;
  rep.models = static_cast<int>(preds.size());
  auto make_bins = [&] {
    std::vector<OverlapBin> bins(static_cast<std::size_t>(buckets));
    for (std::size_t j = 0; j < bins.size(); ++j) {
      bins[j].lo = static_cast<double>(j) / buckets;
      bins[j].hi = static_cast<double>(j + 1) / buckets;
      bins[j].by_models_correct.assign(preds.size() + 1, 0);
    }
    return bins;
  };
  rep.answerable = make_bins();
  rep.impossible = make_bins();

  for (const auto& r : records) {
    auto bin = static_cast<std::size_t>(
        std::min<double>(buckets - 1, std::floor(r.ratio * buckets)));
    std::size_t correct = 0;
    for (bool b : r.correct) correct += b;
    OverlapBin& slot = r.is_impossible ? rep.impossible[bin] : rep.answerable[bin];
    ++slot.total;
    ++slot.by_models_correct[correct];
  }
  return rep;
}

struct MarkerStat {
  std::string marker;
  std::int64_t count = 0;       // training questions containing the marker
  std::int64_t impossible = 0;  // of those, how many are impossible
  double fraction = 0.0;        // impossible / count
};

struct BiasReport {
  std::vector<MarkerStat> markers;  // zero-occurrence markers omitted

  ordered_json to_json() const {
    ordered_json m = ordered_json::object();
    for (const auto& s : markers) {
      ordered_json j;
      j["count"] = s.count;
      j["impossible"] = s.impossible;
      j["fraction"] = s.fraction;
      m[s.marker] = std::move(j);
    }
    ordered_json out;
    out["markers"] = std::move(m);
    return out;
  }
};

namespace detail {

inline bool contains_word(const std::u32string& lowered, std::u32string_view word) {
  std::size_t i = 0;
  const std::size_t n = lowered.size();
  while (i < n) {
    if (!is_word_char(lowered[i])) {
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < n && is_word_char(lowered[i])) ++i;
    if (std::u32string_view(lowered).substr(b, i - b) == word) return true;
  }
  return false;
}

}  // namespace detail

// Fraction of marker-bearing training questions that are impossible. "n't"
// matches as a case-insensitive substring, "never" as a whole word.
inline BiasReport negation_bias(const Dataset& train) {
  MarkerStat nt{"n't", 0, 0, 0.0};
  MarkerStat never{"never", 0, 0, 0.0};
  train.for_each_qa([&](const Paragraph&, const QaExample& qa) {
    std::u32string lowered = py_lower(utf8_decode(qa.question));
    if (lowered.find(U"n't") != std::u32string::npos) {
      ++nt.count;
      if (qa.is_impossible) ++nt.impossible;
    }
    if (detail::contains_word(lowered, U"never")) {
      ++never.count;
      if (qa.is_impossible) ++never.impossible;
    }
  });
  BiasReport rep;
  for (MarkerStat* s : {&nt, &never}) {
    if (s->count == 0) continue;
    s->fraction = static_cast<double>(s->impossible) / static_cast<double>(s->count);
    rep.markers.push_back(*s);
  }
  return rep;
}

struct GeneralizationMatrix {
  std::vector<std::string> labels;       // row i fine-tuned on labels[i],
  std::vector<std::vector<double>> f1;   // column j evaluated on labels[j]

  ordered_json to_json() const {
    ordered_json j;
    j["labels"] = labels;
    j["f1"] = f1;
    j["diagonal"] = "model evaluated on its own dataset";
    return j;
  }

  // One row per fine-tuning dataset; the diagonal cell carries a * marker.
  std::string render_text() const {
    std::string out = "trained-on";
    for (const auto& l : labels) out += "\t" + l;
    out += "\n";
    char buf[64];
    for (std::size_t i = 0; i < labels.size(); ++i) {
      out += labels[i];
      for (std::size_t j = 0; j < labels.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "\t%.1f%s", f1[i][j], i == j ? "*" : "");
        out += buf;
      }
      out += "\n";
    }
    out += "* model evaluated on its own dataset\n";
    return out;
  }
};

// Assembles the fine-tuned-on x evaluated-on F1 grid; any missing cell is an
// error naming every absent (row, column) pair.
inline GeneralizationMatrix generalization_matrix(
    const std::vector<std::vector<std::optional<double>>>& cells,
    const std::vector<std::string>& labels) {
  const std::size_t k = labels.size();
  if (cells.size() != k)
    throw std::invalid_argument("generalization matrix needs one row per label");
  std::string missing;
  for (std::size_t i = 0; i < k; ++i) {
    if (cells[i].size() != k)
      throw std::invalid_argument("generalization matrix row " + labels[i] +
                                  " needs one cell per label");
    for (std::size_t j = 0; j < k; ++j)
      if (!cells[i][j])
        missing += (missing.empty() ? "" : ", ") + ("(" + labels[i] + ", " + labels[j] + ")");
  }
  if (!missing.empty())
    throw std::invalid_argument("generalization matrix incomplete: missing cells " +
                                missing);
  GeneralizationMatrix m;
  m.labels = labels;
  m.f1.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m.f1[i].push_back(*cells[i][j]);
  return m;
}

inline GeneralizationMatrix generalization_matrix(
    const std::vector<std::vector<EvalReport>>& grid,
    const std::vector<std::string>& labels) {
  std::vector<std::vector<std::optional<double>>> cells;
  for (const auto& row : grid) {
    cells.emplace_back();
    for (const auto& rep : row) cells.back().push_back(rep.f1);
  }
  return generalization_matrix(cells, labels);
}

}  // namespace qaprobe

#endif  // QAPROBE_ANALYSIS_HPP_
