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

#ifndef QAPROBE_PROBES_HPP_
#define QAPROBE_PROBES_HPP_

// Seeded dataset transformations: label corruption, sentence shuffling,
// question truncation, filler insertion and question negation. Each takes a
// validated Dataset and returns a transformed copy plus a TransformReport.
// Per-example randomness is a pure function of (master seed, question id)
// (per-paragraph work keys on paragraph_key), so output never depends on
// iteration order or thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qaprobe/dataset.hpp"
#include "qaprobe/text.hpp"
#include "qaprobe/version.hpp"

namespace qaprobe {

struct ProbeSeed {
  std::uint64_t master = kDefaultSeed;
};

struct TransformReport {
  std::string probe;
  std::int64_t seen = 0;
  std::int64_t altered = 0;
  std::map<std::string, std::int64_t> skipped;  // reason -> count
  std::optional<std::uint64_t> seed;
  ordered_json metadata = ordered_json::object();

  std::int64_t unaltered() const { return seen - altered; }

  ordered_json to_json() const {
    ordered_json j;
    j["probe"] = probe;
    j["seen"] = seen;
    j["altered"] = altered;
    j["unaltered"] = unaltered();
    ordered_json sk = ordered_json::object();
    for (const auto& [reason, n] : skipped) sk[reason] = n;
    j["skipped"] = std::move(sk);
    if (seed) j["seed"] = *seed;
    j["metadata"] = metadata;
    return j;
  }
};

// Skip reasons.
inline constexpr const char* kSkipImpossible = "impossible-skipped";
inline constexpr const char* kSkipNoReplacement = "no-valid-replacement";
inline constexpr const char* kSkipNoVerb = "no-verb-found";
inline constexpr const char* kSkipGlued = "answer-spans-sentence-boundary-glued";

namespace detail {

// Lowercased token with edge punctuation stripped; the form used for verb
// lexicon and negation table lookup.
inline std::string lower_token_core(std::string_view token) {
  std::u32string t = utf8_decode(token);
  CpSpan span = strip_edge_punct(t, CpSpan{0, t.size()});
  return utf8_encode(py_lower(std::u32string_view(t).substr(span.begin, span.size())));
}

inline std::vector<std::string> question_tokens_utf8(const std::u32string& q) {
  std::vector<std::string> out;
  for (const CpSpan& t : ws_tokens(q))
    out.push_back(utf8_encode(std::u32string_view(q).substr(t.begin, t.size())));
  return out;
}

}  // namespace detail

// Finds the token index of the question's main verb, or nothing. Receives
// the question id (so sidecar-backed finders can look it up) and the
// whitespace tokens of the question.
using MainVerbFinder = std::function<std::optional<std::size_t>(
    std::string_view qid, const std::vector<std::string>& tokens)>;

// Auxiliaries plus a list of common verb inflections. Deliberately excludes
// imperative-prone nouns like "name".
inline const std::unordered_set<std::string>& verb_lexicon() {
  static const std::unordered_set<std::string> kVerbs = {
      // auxiliaries
      "is", "are", "was", "were", "do", "does", "did", "has", "have", "had",
      "can", "could", "will", "would", "should", "may", "might", "must",
      "am", "be", "been", "being", "shall",
      // common verb inflections
      "go", "goes", "went", "gone", "going", "make", "makes", "made",
      "making", "take", "takes", "took", "taken", "taking", "come", "comes",
      "came", "coming", "see", "sees", "saw", "seen", "get", "gets", "got",
      "give", "gives", "gave", "given", "find", "finds", "found", "know",
      "knows", "knew", "known", "think", "thinks", "thought", "say", "says",
      "said", "tell", "tells", "told", "become", "becomes", "became",
      "leave", "leaves", "left", "lead", "leads", "led", "write", "writes",
      "wrote", "written", "win", "wins", "won", "lose", "loses", "lost",
      "play", "plays", "played", "begin", "begins", "began", "begun",
      "happen", "happens", "happened", "occur", "occurs", "occurred",
      "live", "lives", "lived", "die", "dies", "died", "create", "creates",
      "created", "build", "builds", "built", "founded", "establish",
      "establishes", "established", "start", "starts", "started", "end",
      "ends", "ended", "use", "uses", "used", "call", "calls", "called",
      "serve", "serves", "served", "represent", "represents", "represented",
      "describe", "describes", "described", "mean", "means", "meant",
      "refer", "refers", "referred", "include", "includes", "included",
      "contain", "contains", "contained", "consist", "consists",
      "consisted", "define", "defines", "defined", "cause", "causes",
      "caused", "produce", "produces", "produced", "receive", "receives",
      "received", "appear", "appears", "appeared", "remain", "remains",
      "remained", "sign", "signs", "signed", "invade", "invades", "invaded",
      "conquer", "conquers", "conquered", "rule", "rules", "ruled",
      "succeed", "succeeds", "succeeded", "defeat", "defeats", "defeated",
      "marry", "marries", "married", "bear", "bears", "bore", "born",
      "belong", "belongs", "belonged", "stand", "stands", "stood", "mark",
      "marks", "marked", "help", "helps", "helped", "want", "wants",
      "wanted", "work", "works", "worked", "return", "returns", "returned"};
  return kVerbs;
}

// Scans tokens after the first (a question's first token is usually the
// wh-word) and returns the first lexicon hit.
inline MainVerbFinder heuristic_verb_finder() {
  return [](std::string_view, const std::vector<std::string>& tokens)
             -> std::optional<std::size_t> {
    for (std::size_t i = 1; i < tokens.size(); ++i)
      if (verb_lexicon().count(detail::lower_token_core(tokens[i]))) return i;
    return std::nullopt;
  };
}

// question_id -> list of (token, tag) pairs, Universal POS tag set.
using PosSidecar =
    std::map<std::string, std::vector<std::pair<std::string, std::string>>>;

inline PosSidecar pos_sidecar_from_json(const ordered_json& j) {
  if (!j.is_object())
    throw SchemaError("$", "part-of-speech sidecar must be an object keyed by question id");
  PosSidecar out;
  for (const auto& [qid, tags] : j.items()) {
    if (!tags.is_array())
      throw SchemaError(qid, "expected an array of (token, tag) pairs");
    auto& list = out[qid];
    for (const auto& pair : tags) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
          !pair[1].is_string())
        throw SchemaError(qid, "each entry must be a [token, tag] pair of strings");
      list.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
    }
  }
  return out;
}

// Tag-driven finder: first VERB/AUX token per the sidecar. Questions absent
// from the sidecar fall back to the supplied finder; questions present but
// tagged verbless are treated as having no verb.
inline MainVerbFinder sidecar_verb_finder(PosSidecar sidecar,
                                          MainVerbFinder fallback) {
  return [sidecar = std::move(sidecar), fallback = std::move(fallback)](
             std::string_view qid, const std::vector<std::string>& tokens)
             -> std::optional<std::size_t> {
    auto it = sidecar.find(std::string(qid));
    if (it == sidecar.end()) return fallback(qid, tokens);
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      const std::string& tag = it->second[i].second;
      if (tag == "VERB" || tag == "AUX") {
        if (i >= tokens.size()) return std::nullopt;  // tokenization drift
        return i;
      }
    }
    return std::nullopt;
  };
}

namespace detail {

struct QaRef {
  Paragraph* paragraph;
  QaExample* qa;
};

inline std::vector<QaRef> collect_qas(Dataset& d) {
  std::vector<QaRef> out;
  for (auto& art : d.articles)
    for (auto& para : art.paragraphs)
      for (auto& qa : para.qas) out.push_back({&para, &qa});
  return out;
}

inline std::vector<std::pair<std::size_t, std::size_t>> answer_ranges(
    const std::vector<AnswerSpan>& answers) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& a : answers) {
    auto b = static_cast<std::size_t>(a.answer_start);
    out.emplace_back(b, b + cp_length(a.text));
  }
  return out;
}

}  // namespace detail

// Replaces the gold answer of a seeded round(rate * A)-size subset of the A
// answerable examples with a random span from the same context: word aligned,
// same whitespace-token count, character range disjoint from every original
// gold span. Impossible examples are never touched. Selection is exact-count
// (rank answerable ids by keyed hash, take the first round(rate * A)) rather
// than per-example coin flips, so the requested rate is hit exactly.
inline std::pair<Dataset, TransformReport> corrupt_labels(Dataset d, double rate,
                                                          ProbeSeed seed,
                                                          int threads = 1) {
  auto qas = detail::collect_qas(d);

  struct Ranked {
    std::uint64_t hash;
    std::size_t index;
  };
  std::vector<Ranked> eligible;
  for (std::size_t i = 0; i < qas.size(); ++i) {
    const QaExample& qa = *qas[i].qa;
    if (!qa.is_impossible && !qa.answers.empty())
      eligible.push_back({derive_seed(seed.master, qa.id), i});
  }
  auto requested = static_cast<std::int64_t>(
      std::llround(rate * static_cast<double>(eligible.size())));
  requested = std::clamp<std::int64_t>(requested, 0,
                                       static_cast<std::int64_t>(eligible.size()));
  std::sort(eligible.begin(), eligible.end(), [&](const Ranked& a, const Ranked& b) {
    if (a.hash != b.hash) return a.hash < b.hash;
    return qas[a.index].qa->id < qas[b.index].qa->id;
  });
  std::vector<char> selected(qas.size(), 0);
  for (std::int64_t i = 0; i < requested; ++i)
    selected[eligible[static_cast<std::size_t>(i)].index] = 1;

  enum class Outcome : std::uint8_t { kUntouched, kImpossible, kAltered, kNoReplacement };
  std::vector<Outcome> outcome(qas.size(), Outcome::kUntouched);

  parallel_for(qas.size(), threads, [&](std::size_t i) {
    QaExample& qa = *qas[i].qa;
    if (qa.is_impossible) {
      outcome[i] = Outcome::kImpossible;
      return;
    }
    if (!selected[i]) return;

    std::u32string ctx = utf8_decode(qas[i].paragraph->context);
    std::vector<CpSpan> words = ws_tokens(ctx);
    std::size_t want = ws_tokens(utf8_decode(qa.answers.front().text)).size();
    auto ranges = detail::answer_ranges(qa.answers);

    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    if (want >= 1 && words.size() >= want) {
      for (std::size_t w = 0; w + want <= words.size(); ++w) {
        std::size_t b = words[w].begin;
        std::size_t e = words[w + want - 1].end;
        bool overlaps = false;
        for (const auto& [rb, re] : ranges)
          if (b < re && rb < e) {
            overlaps = true;
            break;
          }
        if (!overlaps) candidates.emplace_back(b, e);
      }
    }
    if (candidates.empty()) {
      outcome[i] = Outcome::kNoReplacement;
      return;
    }
    Rng rng(derive_seed(seed.master, qa.id));
    auto [b, e] = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
    qa.answers = {AnswerSpan{utf8_encode(std::u32string_view(ctx).substr(b, e - b)),
                             static_cast<std::int64_t>(b)}};
    outcome[i] = Outcome::kAltered;
  });

  TransformReport r;
  r.probe = "random-labels";
  r.seed = seed.master;
  r.metadata["rate"] = rate;
  r.metadata["eligible"] = static_cast<std::int64_t>(eligible.size());
  r.metadata["requested"] = requested;
  for (auto o : outcome) {
    ++r.seen;
    switch (o) {
      case Outcome::kAltered:
        ++r.altered;
        break;
      case Outcome::kImpossible:
        ++r.skipped[kSkipImpossible];
        break;
      case Outcome::kNoReplacement:
        ++r.skipped[kSkipNoReplacement];
        break;
      case Outcome::kUntouched:
        break;
    }
  }
  return {std::move(d), std::move(r)};
}

namespace detail {

struct ChunkPlan {
  std::vector<std::u32string> chunks;  // trimmed chunk texts, original order
  std::size_t sentence_count = 0;      // segments before answer gluing
  bool glued = false;
};

// Splits a context into sentence chunks for shuffling. Sentences crossed by
// any answer span are glued into one atomic chunk so the answer text survives
// the permutation; chunk edges are trimmed of whitespace except where a span
// claims the position.
inline ChunkPlan plan_chunks(
    const std::u32string& ctx,
    const std::vector<std::pair<std::size_t, std::size_t>>& spans,
    const SentenceSplitFn& split) {
  ChunkPlan plan;
  std::vector<std::size_t> bounds;
  bounds.push_back(0);
  for (std::size_t c : split(ctx))
    if (c > 0 && c < ctx.size()) bounds.push_back(c);
  bounds.push_back(ctx.size());
  const std::size_t nseg = bounds.size() - 1;
  plan.sentence_count = nseg;

  std::vector<char> merge_next(nseg, 0);
  auto seg_of = [&](std::size_t pos) -> std::size_t {
    auto it = std::upper_bound(bounds.begin(), bounds.end(), pos);
    return static_cast<std::size_t>(it - bounds.begin()) - 1;
  };
  for (const auto& [b, e] : spans) {
    if (b >= e || b >= ctx.size()) continue;
    std::size_t last = std::min(e, ctx.size()) - 1;
    for (std::size_t j = seg_of(b); j < seg_of(last); ++j) {
      if (!merge_next[j]) {
        merge_next[j] = 1;
        plan.glued = true;
      }
    }
  }
  auto covered = [&](std::size_t pos) {
    for (const auto& [b, e] : spans)
      if (pos >= b && pos < e) return true;
    return false;
  };
  for (std::size_t i = 0; i < nseg;) {
    std::size_t j = i;
    while (j < nseg && merge_next[j]) ++j;
    std::size_t b = bounds[i];
    std::size_t e = bounds[j + 1];
    while (b < e && is_py_space(ctx[b]) && !covered(b)) ++b;
    while (e > b && is_py_space(ctx[e - 1]) && !covered(e - 1)) --e;
    if (e > b) plan.chunks.push_back(ctx.substr(b, e - b));
    i = j + 1;
  }
  return plan;
}

}  // namespace detail

// Splits each context into sentences, permutes them with the paragraph-keyed
// generator, rejoins with single spaces and re-anchors every answer at the
// first occurrence of its text in the new context.
inline std::pair<Dataset, TransformReport> shuffle_context(
    Dataset d, ProbeSeed seed,
    const SentenceSplitFn& split = default_sentence_splitter(),
    int threads = 1) {
  std::vector<Paragraph*> paras;
  for (auto& art : d.articles)
    for (auto& para : art.paragraphs) paras.push_back(&para);

  struct ParaOutcome {
    bool changed = false;
    bool glued_whole = false;
  };
  std::vector<ParaOutcome> outcome(paras.size());

  parallel_for(paras.size(), threads, [&](std::size_t i) {
    Paragraph& para = *paras[i];
    if (para.paragraph_key.empty()) para.refresh_key();
    std::u32string ctx = utf8_decode(para.context);

    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const auto& qa : para.qas) {
      for (const auto& r : detail::answer_ranges(qa.answers)) spans.push_back(r);
      if (qa.plausible_answers)
        for (const auto& r : detail::answer_ranges(*qa.plausible_answers))
          spans.push_back(r);
    }
    detail::ChunkPlan plan = detail::plan_chunks(ctx, spans, split);
    outcome[i].glued_whole =
        plan.glued && plan.chunks.size() <= 1 && plan.sentence_count > 1;
    if (plan.chunks.empty()) return;

    Rng rng(derive_seed(seed.master, para.paragraph_key));
    rng.shuffle(plan.chunks);
    std::u32string shuffled;
    for (std::size_t c = 0; c < plan.chunks.size(); ++c) {
      if (c) shuffled.push_back(U' ');
      shuffled.append(plan.chunks[c]);
    }
    if (shuffled == ctx) return;

    auto relocate = [&](std::vector<AnswerSpan>& answers) {
      for (auto& a : answers) {
        std::size_t pos = shuffled.find(utf8_decode(a.text));
        if (pos == std::u32string::npos)
          throw std::logic_error("answer text lost while shuffling context " +
                                 para.paragraph_key);
        a.answer_start = static_cast<std::int64_t>(pos);
      }
    };
    for (auto& qa : para.qas) {
      relocate(qa.answers);
      if (qa.plausible_answers) relocate(*qa.plausible_answers);
    }
    para.context = utf8_encode(shuffled);
    para.refresh_key();
    outcome[i].changed = true;
  });

  TransformReport r;
  r.probe = "shuffle";
  r.seed = seed.master;
  for (std::size_t i = 0; i < paras.size(); ++i) {
    for (std::size_t q = 0; q < paras[i]->qas.size(); ++q) {
      ++r.seen;
      if (outcome[i].changed) {
        ++r.altered;
      } else if (outcome[i].glued_whole) {
        ++r.skipped[kSkipGlued];
      }
    }
  }
  return {std::move(d), std::move(r)};
}

enum class TruncateMode { kFirstHalf, kFirstWord, kNoWords };

inline std::optional<TruncateMode> truncate_mode_from_string(std::string_view s) {
  if (s == "first_half") return TruncateMode::kFirstHalf;
  if (s == "first_word") return TruncateMode::kFirstWord;
  if (s == "no_words") return TruncateMode::kNoWords;
  return std::nullopt;
}

inline std::string_view to_string(TruncateMode m) {
  switch (m) {
    case TruncateMode::kFirstHalf:
      return "first_half";
    case TruncateMode::kFirstWord:
      return "first_word";
    case TruncateMode::kNoWords:
      return "no_words";
  }
  return "";
}

// Keeps the first max(1, floor(n/2)) tokens, the first token, or no tokens of
// each question; original inter-token spacing is preserved. Answers are left
// untouched.
inline std::pair<Dataset, TransformReport> truncate_questions(Dataset d,
                                                              TruncateMode mode,
                                                              int threads = 1) {
  auto qas = detail::collect_qas(d);
  std::vector<char> changed(qas.size(), 0);
  parallel_for(qas.size(), threads, [&](std::size_t i) {
    QaExample& qa = *qas[i].qa;
    std::u32string q = utf8_decode(qa.question);
    std::vector<CpSpan> toks = ws_tokens(q);
    std::u32string out;
    if (!toks.empty() && mode != TruncateMode::kNoWords) {
      std::size_t keep = mode == TruncateMode::kFirstWord
                             ? 1
                             : std::max<std::size_t>(1, toks.size() / 2);
      out = q.substr(toks.front().begin, toks[keep - 1].end - toks.front().begin);
    }
    if (out != q) {
      qa.question = utf8_encode(out);
      changed[i] = 1;
    }
  });

  TransformReport r;
  r.probe = "truncate";
  r.metadata["mode"] = std::string(to_string(mode));
  r.seen = static_cast<std::int64_t>(qas.size());
  for (char c : changed) r.altered += c;
  return {std::move(d), std::move(r)};
}

inline constexpr std::array<std::string_view, 3> kFillerWords = {
    "really", "definitely", "actually"};

// Inserts a seeded choice of filler word immediately before the main verb of
// each question. Questions with no identifiable verb are left unchanged.
inline std::pair<Dataset, TransformReport> add_filler(
    Dataset d, ProbeSeed seed, const MainVerbFinder& find_verb = heuristic_verb_finder(),
    int threads = 1) {
  auto qas = detail::collect_qas(d);
  enum class Outcome : std::uint8_t { kAltered, kNoVerb };
  std::vector<Outcome> outcome(qas.size(), Outcome::kNoVerb);

  parallel_for(qas.size(), threads, [&](std::size_t i) {
    QaExample& qa = *qas[i].qa;
    std::u32string q = utf8_decode(qa.question);
    std::vector<CpSpan> toks = ws_tokens(q);
    std::optional<std::size_t> verb =
        find_verb(qa.id, detail::question_tokens_utf8(q));
    if (!verb || *verb >= toks.size()) return;
    Rng rng(derive_seed(seed.master, qa.id));
    std::string_view filler = kFillerWords[static_cast<std::size_t>(rng.below(3))];
    std::u32string insert = utf8_decode(filler);
    insert.push_back(U' ');
    q.insert(toks[*verb].begin, insert);
    qa.question = utf8_encode(q);
    outcome[i] = Outcome::kAltered;
  });

  TransformReport r;
  r.probe = "filler";
  r.seed = seed.master;
  {
    ordered_json words = ordered_json::array();
    for (auto w : kFillerWords) words.push_back(std::string(w));
    r.metadata["fillers"] = std::move(words);
  }
  for (auto o : outcome) {
    ++r.seen;
    if (o == Outcome::kAltered)
      ++r.altered;
    else
      ++r.skipped[kSkipNoVerb];
  }
  return {std::move(d), std::move(r)};
}

// Auxiliary -> contracted negative, in lookup priority order.
inline const std::vector<std::pair<std::string, std::string>>& negation_table() {
  static const std::vector<std::pair<std::string, std::string>> kTable = {
      {"is", "isn't"},         {"are", "aren't"},   {"was", "wasn't"},
      {"were", "weren't"},     {"do", "don't"},     {"does", "doesn't"},
      {"did", "didn't"},       {"has", "hasn't"},   {"have", "haven't"},
      {"had", "hadn't"},       {"can", "can't"},    {"will", "won't"},
      {"would", "wouldn't"},   {"should", "shouldn't"},
      {"could", "couldn't"},   {"must", "mustn't"}};
  return kTable;
}

namespace detail {

inline const std::string* negated_form(const std::string& lower_core) {
  for (const auto& [from, to] : negation_table())
    if (from == lower_core) return &to;
  return nullptr;
}

}  // namespace detail

// Negates each question once: the first token present in the negation table
// is replaced by its contracted negative; otherwise "never" is inserted
// before the main verb. Gold answers are deliberately kept, so lower scores
// on the output mean better model behaviour. Deterministic, no seed.
inline std::pair<Dataset, TransformReport> negate_questions(
    Dataset d, const MainVerbFinder& find_verb = heuristic_verb_finder(),
    int threads = 1) {
  auto qas = detail::collect_qas(d);
  enum class Outcome : std::uint8_t { kSubstituted, kInserted, kNoVerb };
  std::vector<Outcome> outcome(qas.size(), Outcome::kNoVerb);

  parallel_for(qas.size(), threads, [&](std::size_t i) {
    QaExample& qa = *qas[i].qa;
    std::u32string q = utf8_decode(qa.question);
    std::vector<CpSpan> toks = ws_tokens(q);

    for (const CpSpan& tok : toks) {
      CpSpan core = strip_edge_punct(q, tok);
      if (core.begin >= core.end) continue;
      std::string lower = utf8_encode(
          py_lower(std::u32string_view(q).substr(core.begin, core.size())));
      const std::string* neg = detail::negated_form(lower);
      if (!neg) continue;
      std::u32string repl = utf8_decode(*neg);
      if (is_upper_cp(q[core.begin])) repl[0] = repl[0] - U'a' + U'A';
      q.replace(core.begin, core.size(), repl);
      qa.question = utf8_encode(q);
      outcome[i] = Outcome::kSubstituted;
      return;
    }

    std::optional<std::size_t> verb =
        find_verb(qa.id, detail::question_tokens_utf8(q));
    if (!verb || *verb >= toks.size()) return;
    q.insert(toks[*verb].begin, U"never ");
    qa.question = utf8_encode(q);
    outcome[i] = Outcome::kInserted;
  });

  TransformReport r;
  r.probe = "negate";
  {
    ordered_json table = ordered_json::object();
    for (const auto& [from, to] : negation_table()) table[from] = to;
    r.metadata["negation_table"] = std::move(table);
    r.metadata["fallback"] = "insert never before main verb";
  }
  for (auto o : outcome) {
    ++r.seen;
    if (o == Outcome::kNoVerb)
      ++r.skipped[kSkipNoVerb];
    else
      ++r.altered;
  }
  return {std::move(d), std::move(r)};
}

}  // namespace qaprobe

#endif  // QAPROBE_PROBES_HPP_
