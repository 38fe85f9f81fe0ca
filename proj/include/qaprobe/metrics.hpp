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

#ifndef QAPROBE_METRICS_HPP_
#define QAPROBE_METRICS_HPP_

// SQuAD-2.0-compatible evaluation. Normalization, per-example EM/F1 and the
// aggregated report follow the reference evaluation script exactly (empty
// prediction string = "no answer"; no answer-probability thresholding), so a
// dataset/prediction pair scores identically here and there.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qaprobe/dataset.hpp"
#include "qaprobe/text.hpp"

namespace qaprobe {

struct EvalError : std::runtime_error {
  EvalError(const std::string& msg, std::vector<std::string> missing,
            std::vector<std::string> extra)
      : std::runtime_error(msg),
        missing_ids(std::move(missing)),
        extra_ids(std::move(extra)) {}
  std::vector<std::string> missing_ids;
  std::vector<std::string> extra_ids;
};

// Lowercase, drop ASCII punctuation, drop the articles a/an/the, collapse
// whitespace. Mirrors the reference script's normalize_answer: punctuation is
// the ASCII set only, articles are removed at word boundaries (\b semantics,
// Unicode word characters), and whitespace is any Unicode whitespace.
inline std::u32string normalize_answer_u32(std::u32string_view s) {
  std::u32string lowered = py_lower(s);
  std::u32string kept;
  kept.reserve(lowered.size());
  for (char32_t c : lowered)
    if (!is_ascii_punct(c)) kept.push_back(c);

  std::u32string no_articles;
  no_articles.reserve(kept.size());
  std::size_t i = 0;
  const std::size_t n = kept.size();
  while (i < n) {
    if (!is_word_char(kept[i])) {
      no_articles.push_back(kept[i]);
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < n && is_word_char(kept[i])) ++i;
    std::u32string_view run(kept.data() + b, i - b);
    if (run == U"a" || run == U"an" || run == U"the") {
      no_articles.push_back(U' ');
    } else {
      no_articles.append(run);
    }
  }

  std::u32string out;
  out.reserve(no_articles.size());
  for (const CpSpan& t : ws_tokens(no_articles)) {
    if (!out.empty()) out.push_back(U' ');
    out.append(no_articles, t.begin, t.size());
  }
  return out;
}

inline std::string normalize_answer(std::string_view s) {
  return utf8_encode(normalize_answer_u32(utf8_decode(s)));
}

inline std::vector<std::u32string> answer_tokens(std::string_view s) {
  std::u32string norm = normalize_answer_u32(utf8_decode(s));
  std::vector<std::u32string> out;
  for (const CpSpan& t : ws_tokens(norm))
    out.push_back(norm.substr(t.begin, t.size()));
  return out;
}

inline int exact_match(std::string_view pred, std::string_view gold) {
  return normalize_answer_u32(utf8_decode(pred)) ==
                 normalize_answer_u32(utf8_decode(gold))
             ? 1
             : 0;
}

// Token-level F1 between normalized prediction and gold. Both empty after
// normalization scores 1, exactly one empty scores 0.
inline double token_f1(std::string_view pred, std::string_view gold) {
  std::vector<std::u32string> pred_toks = answer_tokens(pred);
  std::vector<std::u32string> gold_toks = answer_tokens(gold);
  if (gold_toks.empty() || pred_toks.empty())
    return gold_toks == pred_toks ? 1.0 : 0.0;
  std::unordered_map<std::u32string, std::int64_t> gold_counts;
  for (const auto& t : gold_toks) ++gold_counts[t];
  std::int64_t common = 0;
  for (const auto& t : pred_toks) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      ++common;
      --it->second;
    }
  }
  if (common == 0) return 0.0;
  double precision = 1.0 * static_cast<double>(common) / pred_toks.size();
  double recall = 1.0 * static_cast<double>(common) / gold_toks.size();
  return (2 * precision * recall) / (precision + recall);
}

struct ExampleScore {
  int exact = 0;
  double f1 = 0.0;
};

// Max over gold answers; gold answers whose text normalizes to empty are
// ignored, and a question with no remaining gold (impossible questions in
// particular) is scored against the empty string.
inline ExampleScore evaluate_example(const QaExample& qa, std::string_view pred) {
  std::vector<std::string_view> golds;
  for (const auto& a : qa.answers)
    if (!normalize_answer_u32(utf8_decode(a.text)).empty()) golds.push_back(a.text);
  if (golds.empty()) golds.push_back(std::string_view{""});
  ExampleScore s;
  for (std::string_view g : golds) {
    s.exact = std::max(s.exact, exact_match(pred, g));
    s.f1 = std::max(s.f1, token_f1(pred, g));
  }
  return s;
}

struct QuestionScore {
  std::string id;
  int exact = 0;
  double f1 = 0.0;
};

struct EvalReport {
  double exact = 0.0;  // [0, 100]
  double f1 = 0.0;
  std::int64_t total = 0;
  std::optional<double> has_ans_exact, has_ans_f1;
  std::int64_t has_ans_total = 0;
  std::optional<double> no_ans_exact, no_ans_f1;
  std::int64_t no_ans_total = 0;
  std::vector<QuestionScore> per_question;  // dataset order

  ordered_json to_json(bool include_per_question = true) const {
    ordered_json j;
    j["exact"] = exact;
    j["f1"] = f1;
    j["total"] = total;
    if (has_ans_total > 0) {
      j["HasAns_exact"] = *has_ans_exact;
      j["HasAns_f1"] = *has_ans_f1;
      j["HasAns_total"] = has_ans_total;
    }
    if (no_ans_total > 0) {
      j["NoAns_exact"] = *no_ans_exact;
      j["NoAns_f1"] = *no_ans_f1;
      j["NoAns_total"] = no_ans_total;
    }
    if (include_per_question) {
      ordered_json per = ordered_json::object();
      for (const auto& q : per_question)
        per[q.id] = {{"exact", q.exact}, {"f1", q.f1}};
      j["per_question"] = std::move(per);
    }
    return j;
  }

  // Human rendering rounds to one decimal; machine output keeps full
  // precision.
  std::string render_text() const {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof(buf), "exact = %.1f\nf1 = %.1f\ntotal = %lld\n",
                  exact, f1, static_cast<long long>(total));
    out += buf;
    if (has_ans_total > 0) {
      std::snprintf(buf, sizeof(buf),
                    "HasAns_exact = %.1f\nHasAns_f1 = %.1f\nHasAns_total = %lld\n",
                    *has_ans_exact, *has_ans_f1,
                    static_cast<long long>(has_ans_total));
      out += buf;
    }
    if (no_ans_total > 0) {
      std::snprintf(buf, sizeof(buf),
                    "NoAns_exact = %.1f\nNoAns_f1 = %.1f\nNoAns_total = %lld\n",
                    *no_ans_exact, *no_ans_f1, static_cast<long long>(no_ans_total));
      out += buf;
    }
    return out;
  }
};

// Every dataset question must have a prediction and every prediction must
// name a dataset question; violations raise EvalError listing both lists.
inline void verify_coverage(const Dataset& d, const PredictionSet& p) {
  std::vector<std::string> missing;
  std::unordered_set<std::string> ids;
  d.for_each_qa([&](const Paragraph&, const QaExample& qa) {
    ids.insert(qa.id);
    if (!p.contains(qa.id)) missing.push_back(qa.id);
  });
  std::vector<std::string> extra;
  for (const auto& [id, _] : p.by_id)
    if (!ids.count(id)) extra.push_back(id);
  if (missing.empty() && extra.empty()) return;
  std::string msg;
  if (!missing.empty()) {
    msg += "missing predictions for " + std::to_string(missing.size()) +
           " question id(s):";
    for (const auto& id : missing) msg += " " + id;
  }
  if (!extra.empty()) {
    if (!msg.empty()) msg += "; ";
    msg += std::to_string(extra.size()) +
           " prediction id(s) not present in the dataset:";
    for (const auto& id : extra) msg += " " + id;
  }
  throw EvalError(msg, std::move(missing), std::move(extra));
}

inline EvalReport evaluate(const Dataset& d, const PredictionSet& p,
                           int threads = 1) {
  verify_coverage(d, p);
  struct Item {
    const QaExample* qa;
    bool has_ans;
  };
  std::vector<Item> items;
  d.for_each_qa([&](const Paragraph&, const QaExample& qa) {
    items.push_back({&qa, !qa.answers.empty()});
  });

  std::vector<ExampleScore> scores(items.size());
  parallel_for(items.size(), threads, [&](std::size_t i) {
    scores[i] = evaluate_example(*items[i].qa, p.at(items[i].qa->id));
  });

  EvalReport r;
  r.total = static_cast<std::int64_t>(items.size());
  double sum_em = 0, sum_f1 = 0;
  double has_em = 0, has_f1 = 0, no_em = 0, no_f1 = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    r.per_question.push_back({items[i].qa->id, scores[i].exact, scores[i].f1});
    sum_em += scores[i].exact;
    sum_f1 += scores[i].f1;
    if (items[i].has_ans) {
      ++r.has_ans_total;
      has_em += scores[i].exact;
      has_f1 += scores[i].f1;
    } else {
      ++r.no_ans_total;
      no_em += scores[i].exact;
      no_f1 += scores[i].f1;
    }
  }
  if (r.total > 0) {
    r.exact = 100.0 * sum_em / static_cast<double>(r.total);
    r.f1 = 100.0 * sum_f1 / static_cast<double>(r.total);
  }
  if (r.has_ans_total > 0) {
    r.has_ans_exact = 100.0 * has_em / static_cast<double>(r.has_ans_total);
    r.has_ans_f1 = 100.0 * has_f1 / static_cast<double>(r.has_ans_total);
  }
  if (r.no_ans_total > 0) {
    r.no_ans_exact = 100.0 * no_em / static_cast<double>(r.no_ans_total);
    r.no_ans_f1 = 100.0 * no_f1 / static_cast<double>(r.no_ans_total);
  }
  return r;
}

}  // namespace qaprobe

#endif  // QAPROBE_METRICS_HPP_
