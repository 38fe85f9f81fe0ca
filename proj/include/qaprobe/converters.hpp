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

#ifndef QAPROBE_CONVERTERS_HPP_
#define QAPROBE_CONVERTERS_HPP_

// Converts five upstream distribution formats into the unified dataset shape.
// Converters are permissive: malformed source entries are dropped and counted
// per reason, never fatal, and every emitted dataset passes validate_dataset.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qaprobe/dataset.hpp"
#include "qaprobe/io.hpp"
#include "qaprobe/text.hpp"
#include "qaprobe/version.hpp"

namespace qaprobe {

// Drop reasons.
inline constexpr const char* kDropNoLongAnswer = "no-long-answer";
inline constexpr const char* kDropNonParagraph = "non-paragraph-answer";
inline constexpr const char* kDropNotLocatable = "answer-not-locatable";
inline constexpr const char* kDropNoConsensus = "no-consensus-answer";
inline constexpr const char* kDropOther = "other";

struct ConversionReport {
  std::int64_t read = 0;
  std::int64_t emitted = 0;
  std::map<std::string, std::int64_t> dropped;  // reason -> count

  std::int64_t dropped_total() const {
    std::int64_t n = 0;
    for (const auto& [_, c] : dropped) n += c;
    return n;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["read"] = read;
    j["emitted"] = emitted;
    ordered_json dr = ordered_json::object();
    for (const auto& [reason, n] : dropped) dr[reason] = n;
    j["dropped"] = std::move(dr);
    j["dropped_total"] = dropped_total();
    return j;
  }
};

namespace detail {

// Tracks id uniqueness across one conversion; duplicate ids would fail
// validation downstream, so later occurrences are dropped.
struct IdGuard {
  std::unordered_set<std::string> seen;
  bool claim(const std::string& id) { return seen.insert(id).second; }
};

inline std::string json_to_string_id(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  throw SchemaError("id", "expected a string or integer id");
}

// Case-folding that keeps one code point per code point so offsets stay
// aligned during case-insensitive search.
inline std::u32string fold_1to1(std::u32string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (char32_t c : s) out.push_back(lower_1to1(c));
  return out;
}

}  // namespace detail

// Pass-through for sources already in the unified shape; entries that would
// fail validation are dropped and counted instead of aborting the run.
inline std::pair<Dataset, ConversionReport> convert_squad(const ordered_json& src) {
  Dataset out;
  out.version = kSchemaVersion;
  ConversionReport rep;
  detail::IdGuard ids;

  if (!src.is_object() || !src.contains("data") || !src["data"].is_array())
    throw SchemaError("data", "expected an object with a data array");
  if (src.contains("version") && src["version"].is_string())
    out.version = src["version"].get<std::string>();
  out.extra = detail::collect_extra(src, {"version", "data"});

  for (std::size_t ai = 0; ai < src["data"].size(); ++ai) {
    const ordered_json& a = src["data"][ai];
    if (!a.is_object() || !a.contains("paragraphs") || !a["paragraphs"].is_array()) {
      ++rep.read;
      ++rep.dropped[kDropOther];
      continue;
    }
    Article art;
    art.title = a.contains("title") && a["title"].is_string()
                    ? a["title"].get<std::string>()
                    : "";
    if (art.title.empty()) art.title = "article-" + std::to_string(ai);
    art.extra = detail::collect_extra(a, {"title", "paragraphs"});

    for (const ordered_json& p : a["paragraphs"]) {
      std::int64_t qa_count = 0;
      if (p.is_object() && p.contains("qas") && p["qas"].is_array())
        qa_count = static_cast<std::int64_t>(p["qas"].size());
      if (!p.is_object() || !p.contains("context") || !p["context"].is_string() ||
          p["context"].get<std::string>().empty()) {
        rep.read += std::max<std::int64_t>(qa_count, 1);
        rep.dropped[kDropOther] += std::max<std::int64_t>(qa_count, 1);
        continue;
      }
      Paragraph para;
      para.context = p["context"].get<std::string>();
      para.extra = detail::collect_extra(p, {"context", "qas"});
      std::u32string ctx = utf8_decode(para.context);

      if (p.contains("qas") && p["qas"].is_array()) {
        for (const ordered_json& q : p["qas"]) {
          ++rep.read;
          try {
            if (!q.is_object()) throw SchemaError("qas", "expected an object");
            QaExample qa;
            qa.id = detail::json_to_string_id(detail::require_field(q, "id", "qas"));
            qa.question =
                detail::as_string(detail::require_field(q, "question", "qas"), "question");
            if (q.contains("is_impossible"))
              qa.is_impossible = q["is_impossible"].get<bool>();
            if (q.contains("answers"))
              qa.answers = detail::parse_answers(q["answers"], "answers");
            if (q.contains("plausible_answers"))
              qa.plausible_answers =
                  detail::parse_answers(q["plausible_answers"], "plausible_answers");
            qa.extra = detail::collect_extra(
                q, {"id", "question", "is_impossible", "answers", "plausible_answers"});

            if (qa.is_impossible != qa.answers.empty())
              throw SchemaError(qa.id, "is_impossible inconsistent with answers");
            if (!ids.claim(qa.id)) throw SchemaError(qa.id, "duplicate id");

            bool anchored = true;
            auto check = [&](const std::vector<AnswerSpan>& spans) {
              for (const auto& s : spans) {
                std::size_t len = cp_length(s.text);
                if (s.answer_start < 0 ||
                    static_cast<std::size_t>(s.answer_start) + len > ctx.size() ||
                    ctx.compare(static_cast<std::size_t>(s.answer_start), len,
                                utf8_decode(s.text)) != 0)
                  anchored = false;
              }
            };
            check(qa.answers);
            if (qa.plausible_answers) check(*qa.plausible_answers);
            if (!anchored) {
              ++rep.dropped[kDropNotLocatable];
              continue;
            }
            para.qas.push_back(std::move(qa));
            ++rep.emitted;
          } catch (const std::exception&) {
            ++rep.dropped[kDropOther];
          }
        }
      }
      para.refresh_key();
      art.paragraphs.push_back(std::move(para));
    }
    out.articles.push_back(std::move(art));
  }
  return {std::move(out), std::move(rep)};
}

// Supplies evidence document text by upstream filename.
using EvidenceReader = std::function<std::optional<std::string>(const std::string&)>;

inline EvidenceReader evidence_dir_reader(std::filesystem::path dir) {
  return [dir = std::move(dir)](const std::string& name) -> std::optional<std::string> {
    for (const auto& candidate :
         {dir / name, dir / "wikipedia" / name, dir / "evidence" / "wikipedia" / name}) {
      std::error_code ec;
      if (std::filesystem::is_regular_file(candidate, ec)) return read_file(candidate);
    }
    return std::nullopt;
  };
}

// One unit of work is a (question, evidence document) pairing. Gold spans are
// synthesized by locating each distinct answer alias in the document text at
// its first occurrence, case-sensitive first and case-insensitive as a
// fallback; questions whose aliases never occur become impossible.
inline std::pair<Dataset, ConversionReport> convert_triviaqa(
    const ordered_json& src, const EvidenceReader& evidence) {
  Dataset out;
  out.version = kSchemaVersion;
  ConversionReport rep;
  detail::IdGuard ids;

  if (!src.is_object() || !src.contains("Data") || !src["Data"].is_array())
    throw SchemaError("Data", "expected an object with a Data array");

  for (const ordered_json& item : src["Data"]) {
    std::int64_t pages = 0;
    if (item.is_object() && item.contains("EntityPages") &&
        item["EntityPages"].is_array())
      pages = static_cast<std::int64_t>(item["EntityPages"].size());

    std::string question, qid;
    std::vector<std::string> aliases;
    bool header_ok = true;
    try {
      question = detail::as_string(detail::require_field(item, "Question", "Data"),
                                   "Question");
      qid = detail::json_to_string_id(detail::require_field(item, "QuestionId", "Data"));
      const ordered_json& ans = detail::require_field(item, "Answer", "Data");
      std::unordered_set<std::string> seen_alias;
      auto add_alias = [&](const ordered_json& v) {
        if (!v.is_string()) return;
        std::string s = v.get<std::string>();
        if (!s.empty() && seen_alias.insert(s).second) aliases.push_back(std::move(s));
      };
      if (ans.contains("Value")) add_alias(ans["Value"]);
      if (ans.contains("Aliases") && ans["Aliases"].is_array())
        for (const auto& v : ans["Aliases"]) add_alias(v);
    } catch (const std::exception&) {
      header_ok = false;
    }
    if (!header_ok || pages == 0) {
      rep.read += std::max<std::int64_t>(pages, 1);
      rep.dropped[kDropOther] += std::max<std::int64_t>(pages, 1);
      continue;
    }

    Article art;
    art.title = qid;
    for (const ordered_json& page : item["EntityPages"]) {
      ++rep.read;
      try {
        std::string filename = detail::as_string(
            detail::require_field(page, "Filename", "EntityPages"), "Filename");
        std::optional<std::string> doc = evidence(filename);
        if (!doc || doc->empty()) {
          ++rep.dropped[kDropOther];
          continue;
        }
        std::string example_id = qid + "--" + filename;
        if (!ids.claim(example_id)) {
          ++rep.dropped[kDropOther];
          continue;
        }

        Paragraph para;
        para.context = *doc;
        std::u32string ctx = utf8_decode(para.context);
        std::u32string folded = detail::fold_1to1(ctx);

        QaExample qa;
        qa.id = example_id;
        qa.question = question;
        std::unordered_set<std::string> taken;
        for (const std::string& alias : aliases) {
          std::u32string needle = utf8_decode(alias);
          std::size_t pos = ctx.find(needle);
          if (pos == std::u32string::npos)
            pos = folded.find(detail::fold_1to1(needle));
          if (pos == std::u32string::npos) continue;
          std::string text =
              utf8_encode(std::u32string_view(ctx).substr(pos, needle.size()));
          std::string key = std::to_string(pos) + "\x1f" + text;
          if (!taken.insert(key).second) continue;
          qa.answers.push_back({std::move(text), static_cast<std::int64_t>(pos)});
        }
        qa.is_impossible = qa.answers.empty();
        para.qas.push_back(std::move(qa));
        para.refresh_key();
        art.paragraphs.push_back(std::move(para));
        ++rep.emitted;
      } catch (const std::exception&) {
        ++rep.dropped[kDropOther];
      }
    }
    if (!art.paragraphs.empty()) out.articles.push_back(std::move(art));
  }
  return {std::move(out), std::move(rep)};
}

inline std::pair<Dataset, ConversionReport> convert_triviaqa(
    const ordered_json& src, const std::filesystem::path& evidence_dir) {
  return convert_triviaqa(src, evidence_dir_reader(evidence_dir));
}

namespace detail {

inline bool is_html_token(std::u32string_view tok) {
  return tok.size() >= 2 && tok.front() == U'<' && tok.back() == U'>';
}

}  // namespace detail

// Simplified-format records, one JSON document per line. The long answer
// becomes the context (HTML tokens stripped), short answers are re-anchored
// as code-point offsets, records whose long answer is missing or not a
// paragraph (tables, lists) are dropped, and records with a long answer but
// no short answer become impossible.
inline std::pair<Dataset, ConversionReport> convert_nq(const std::string& jsonl) {
  Dataset out;
  out.version = kSchemaVersion;
  ConversionReport rep;
  detail::IdGuard ids;

  std::size_t line_start = 0;
  while (line_start <= jsonl.size()) {
    std::size_t line_end = jsonl.find('\n', line_start);
    if (line_end == std::string::npos) line_end = jsonl.size();
    std::string_view line(jsonl.data() + line_start, line_end - line_start);
    line_start = line_end + 1;
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;

    ++rep.read;
    try {
      ordered_json rec = parse_json_text(std::string(line));
      std::string id =
          detail::json_to_string_id(detail::require_field(rec, "example_id", "record"));
      std::string question = detail::as_string(
          detail::require_field(rec, "question_text", "record"), "question_text");
      std::string doc = detail::as_string(
          detail::require_field(rec, "document_text", "record"), "document_text");

      if (!rec.contains("annotations") || !rec["annotations"].is_array() ||
          rec["annotations"].empty()) {
        ++rep.dropped[kDropNoLongAnswer];
        continue;
      }
      const ordered_json& ann = rec["annotations"][0];
      if (!ann.is_object() || !ann.contains("long_answer") ||
          !ann["long_answer"].is_object()) {
        ++rep.dropped[kDropNoLongAnswer];
        continue;
      }
      const ordered_json& la = ann["long_answer"];
      std::int64_t la_start = la.value("start_token", std::int64_t{-1});
      std::int64_t la_end = la.value("end_token", std::int64_t{-1});
      std::int64_t ci = la.value("candidate_index", std::int64_t{-1});
      if ((la_start < 0 || la_end <= la_start) && ci >= 0 &&
          rec.contains("long_answer_candidates") &&
          rec["long_answer_candidates"].is_array() &&
          static_cast<std::size_t>(ci) < rec["long_answer_candidates"].size()) {
        const ordered_json& cand = rec["long_answer_candidates"][static_cast<std::size_t>(ci)];
        la_start = cand.value("start_token", std::int64_t{-1});
        la_end = cand.value("end_token", std::int64_t{-1});
      }
      if (ci < 0 || la_start < 0 || la_end <= la_start) {
        ++rep.dropped[kDropNoLongAnswer];
        continue;
      }

      std::u32string doc32 = utf8_decode(doc);
      std::vector<CpSpan> toks = ws_tokens(doc32);
      if (static_cast<std::size_t>(la_end) > toks.size()) {
        ++rep.dropped[kDropNotLocatable];
        continue;
      }
      auto tok_view = [&](std::int64_t t) {
        return std::u32string_view(doc32).substr(toks[static_cast<std::size_t>(t)].begin,
                                                 toks[static_cast<std::size_t>(t)].size());
      };
      if (!detail::is_html_token(tok_view(la_start)) ||
          py_lower(tok_view(la_start)) != U"<p>") {
        ++rep.dropped[kDropNonParagraph];
        continue;
      }

      // Rebuild the paragraph text without HTML tokens, tracking where each
      // kept token lands.
      std::u32string ctx;
      std::unordered_map<std::int64_t, CpSpan> placed;
      for (std::int64_t t = la_start; t < la_end; ++t) {
        std::u32string_view tok = tok_view(t);
        if (detail::is_html_token(tok)) continue;
        if (!ctx.empty()) ctx.push_back(U' ');
        std::size_t b = ctx.size();
        ctx.append(tok);
        placed[t] = CpSpan{b, ctx.size()};
      }
      if (ctx.empty()) {
        ++rep.dropped[kDropOther];
        continue;
      }

      std::string yes_no = ann.value("yes_no_answer", std::string("NONE"));
      if (yes_no != "NONE") {
        ++rep.dropped[kDropOther];  // yes/no answers are not extractive
        continue;
      }

      QaExample qa;
      qa.id = id;
      qa.question = question;
      bool anchored = true;
      if (ann.contains("short_answers") && ann["short_answers"].is_array()) {
        for (const ordered_json& sa : ann["short_answers"]) {
          std::int64_t s = sa.value("start_token", std::int64_t{-1});
          std::int64_t e = sa.value("end_token", std::int64_t{-1});
          if (s < la_start || e <= s || e > la_end) {
            anchored = false;
            break;
          }
          for (std::int64_t t = s; t < e; ++t)
            if (!placed.count(t)) anchored = false;
          if (!anchored) break;
          std::size_t b = placed[s].begin;
          std::size_t cpe = placed[e - 1].end;
          qa.answers.push_back(
              {utf8_encode(std::u32string_view(ctx).substr(b, cpe - b)),
               static_cast<std::int64_t>(b)});
        }
      }
      if (!anchored) {
        ++rep.dropped[kDropNotLocatable];
        continue;
      }
      qa.is_impossible = qa.answers.empty();
      if (!ids.claim(qa.id)) {
        ++rep.dropped[kDropOther];
        continue;
      }

      Article art;
      art.title = id;
      Paragraph para;
      para.context = utf8_encode(ctx);
      para.qas.push_back(std::move(qa));
      para.refresh_key();
      art.paragraphs.push_back(std::move(para));
      out.articles.push_back(std::move(art));
      ++rep.emitted;
    } catch (const std::exception&) {
      ++rep.dropped[kDropOther];
    }
  }
  return {std::move(out), std::move(rep)};
}

namespace detail {

inline std::u32string strip_cannotanswer(std::u32string ctx) {
  static const std::u32string kTag = U"CANNOTANSWER";
  if (ctx.size() >= kTag.size() &&
      ctx.compare(ctx.size() - kTag.size(), kTag.size(), kTag) == 0) {
    ctx.erase(ctx.size() - kTag.size());
    while (!ctx.empty() && is_py_space(ctx.back())) ctx.pop_back();
  }
  return ctx;
}

}  // namespace detail

// Each dialog turn becomes an independent example; dialog-linking fields are
// discarded. The upstream " CANNOTANSWER" sentinel is stripped from the
// context, turns answered only with CANNOTANSWER become impossible, and
// answer references that fail to anchor into the stripped context drop the
// turn.
inline std::pair<Dataset, ConversionReport> convert_quac(const ordered_json& src) {
  Dataset out;
  out.version = kSchemaVersion;
  ConversionReport rep;
  detail::IdGuard ids;

  if (!src.is_object() || !src.contains("data") || !src["data"].is_array())
    throw SchemaError("data", "expected an object with a data array");

  for (std::size_t di = 0; di < src["data"].size(); ++di) {
    const ordered_json& dlg = src["data"][di];
    if (!dlg.is_object() || !dlg.contains("paragraphs") ||
        !dlg["paragraphs"].is_array()) {
      ++rep.read;
      ++rep.dropped[kDropOther];
      continue;
    }
    Article art;
    std::string title = dlg.value("title", std::string());
    std::string section = dlg.value("section_title", std::string());
    art.title = title;
    if (!section.empty())
      art.title += art.title.empty() ? section : " - " + section;
    if (art.title.empty()) art.title = "dialog-" + std::to_string(di);

    for (const ordered_json& p : dlg["paragraphs"]) {
      std::int64_t qa_count = 0;
      if (p.is_object() && p.contains("qas") && p["qas"].is_array())
        qa_count = static_cast<std::int64_t>(p["qas"].size());
      if (!p.is_object() || !p.contains("context") || !p["context"].is_string()) {
        rep.read += std::max<std::int64_t>(qa_count, 1);
        rep.dropped[kDropOther] += std::max<std::int64_t>(qa_count, 1);
        continue;
      }
      std::u32string ctx =
          detail::strip_cannotanswer(utf8_decode(p["context"].get<std::string>()));
      if (ctx.empty()) {
        rep.read += std::max<std::int64_t>(qa_count, 1);
        rep.dropped[kDropOther] += std::max<std::int64_t>(qa_count, 1);
        continue;
      }
      Paragraph para;
      para.context = utf8_encode(ctx);

      if (p.contains("qas") && p["qas"].is_array()) {
        for (const ordered_json& q : p["qas"]) {
          ++rep.read;
          try {
            QaExample qa;
            qa.id = detail::json_to_string_id(detail::require_field(q, "id", "qas"));
            qa.question =
                detail::as_string(detail::require_field(q, "question", "qas"), "question");

            bool saw_cannot = false;
            bool saw_span = false;
            std::unordered_set<std::string> taken;
            if (q.contains("answers") && q["answers"].is_array()) {
              for (const ordered_json& a : q["answers"]) {
                std::string text = detail::as_string(
                    detail::require_field(a, "text", "answers"), "text");
                if (text == "CANNOTANSWER") {
                  saw_cannot = true;
                  continue;
                }
                saw_span = true;
                std::int64_t start = detail::as_int(
                    detail::require_field(a, "answer_start", "answers"), "answer_start");
                std::u32string t32 = utf8_decode(text);
                if (start < 0 ||
                    static_cast<std::size_t>(start) + t32.size() > ctx.size() ||
                    ctx.compare(static_cast<std::size_t>(start), t32.size(), t32) != 0)
                  continue;  // unanchorable reference
                std::string key = std::to_string(start) + "\x1f" + text;
                if (taken.insert(key).second) qa.answers.push_back({text, start});
              }
            }
            if (qa.answers.empty()) {
              if (saw_span) {
                ++rep.dropped[kDropNotLocatable];
                continue;
              }
              if (!saw_cannot) {
                ++rep.dropped[kDropOther];
                continue;
              }
              qa.is_impossible = true;
            }
            if (!ids.claim(qa.id)) {
              ++rep.dropped[kDropOther];
              continue;
            }
            para.qas.push_back(std::move(qa));
            ++rep.emitted;
          } catch (const std::exception&) {
            ++rep.dropped[kDropOther];
          }
        }
      }
      para.refresh_key();
      art.paragraphs.push_back(std::move(para));
    }
    out.articles.push_back(std::move(art));
  }
  return {std::move(out), std::move(rep)};
}

namespace detail {

struct NewsqaVerdict {
  enum Kind { kSpan, kNoAnswer, kBadQuestion } kind = kNoAnswer;
  std::int64_t s = 0;
  std::int64_t e = 0;
};

inline std::optional<NewsqaVerdict> newsqa_verdict_of(const ordered_json& entry) {
  if (!entry.is_object()) return std::nullopt;
  NewsqaVerdict v;
  if (entry.value("badQuestion", false)) {
    v.kind = NewsqaVerdict::kBadQuestion;
    return v;
  }
  if (entry.value("noAnswer", false)) {
    v.kind = NewsqaVerdict::kNoAnswer;
    return v;
  }
  if (entry.contains("s") && entry.contains("e")) {
    v.kind = NewsqaVerdict::kSpan;
    v.s = entry["s"].get<std::int64_t>();
    v.e = entry["e"].get<std::int64_t>();
    return v;
  }
  return std::nullopt;
}

}  // namespace detail

// Picks each question's verdict by majority of validators (an entry with more
// than half the validation votes), falling back to the precomputed consensus
// field; no-answer verdicts are emitted as impossible questions, bad-question
// verdicts are dropped.
inline std::pair<Dataset, ConversionReport> convert_newsqa(const ordered_json& src) {
  Dataset out;
  out.version = kSchemaVersion;
  ConversionReport rep;
  detail::IdGuard ids;

  if (!src.is_object() || !src.contains("data") || !src["data"].is_array())
    throw SchemaError("data", "expected an object with a data array");

  for (std::size_t si = 0; si < src["data"].size(); ++si) {
    const ordered_json& story = src["data"][si];
    std::int64_t q_count = 0;
    if (story.is_object() && story.contains("questions") &&
        story["questions"].is_array())
      q_count = static_cast<std::int64_t>(story["questions"].size());
    if (!story.is_object() || !story.contains("text") || !story["text"].is_string() ||
        story["text"].get<std::string>().empty()) {
      rep.read += std::max<std::int64_t>(q_count, 1);
      rep.dropped[kDropOther] += std::max<std::int64_t>(q_count, 1);
      continue;
    }
    std::string story_id = story.value("storyId", std::string());
    if (story_id.empty()) story_id = "story-" + std::to_string(si);

    Article art;
    art.title = story_id;
    Paragraph para;
    para.context = story["text"].get<std::string>();
    std::u32string ctx = utf8_decode(para.context);

    if (story.contains("questions") && story["questions"].is_array()) {
      for (std::size_t qi = 0; qi < story["questions"].size(); ++qi) {
        const ordered_json& q = story["questions"][qi];
        ++rep.read;
        try {
          QaExample qa;
          qa.id = story_id + ":" + std::to_string(qi);
          qa.question =
              detail::as_string(detail::require_field(q, "q", "questions"), "q");

          std::optional<detail::NewsqaVerdict> verdict;
          if (q.contains("validatedAnswers") && q["validatedAnswers"].is_array() &&
              !q["validatedAnswers"].empty()) {
            std::int64_t total = 0;
            for (const auto& entry : q["validatedAnswers"])
              total += entry.is_object() ? entry.value("count", std::int64_t{0})
                                         : std::int64_t{0};
            for (const auto& entry : q["validatedAnswers"]) {
              std::int64_t votes =
                  entry.is_object() ? entry.value("count", std::int64_t{0})
                                    : std::int64_t{0};
              if (2 * votes > total) {
                verdict = detail::newsqa_verdict_of(entry);
                break;
              }
            }
          } else if (q.contains("consensus")) {
            verdict = detail::newsqa_verdict_of(q["consensus"]);
          }
          if (!verdict) {
            ++rep.dropped[kDropNoConsensus];
            continue;
          }
          if (verdict->kind == detail::NewsqaVerdict::kBadQuestion) {
            ++rep.dropped[kDropOther];
            continue;
          }
          if (verdict->kind == detail::NewsqaVerdict::kSpan) {
            std::int64_t s = verdict->s, e = verdict->e;
            if (s < 0 || e <= s || static_cast<std::size_t>(e) > ctx.size()) {
              ++rep.dropped[kDropNotLocatable];
              continue;
            }
            auto b = static_cast<std::size_t>(s);
            auto end = static_cast<std::size_t>(e);
            while (b < end && is_py_space(ctx[b])) ++b;
            while (end > b && is_py_space(ctx[end - 1])) --end;
            if (b == end) {
              ++rep.dropped[kDropNotLocatable];
              continue;
            }
            qa.answers.push_back(
                {utf8_encode(std::u32string_view(ctx).substr(b, end - b)),
                 static_cast<std::int64_t>(b)});
          } else {
            qa.is_impossible = true;
          }
          if (!ids.claim(qa.id)) {
            ++rep.dropped[kDropOther];
            continue;
          }
          para.qas.push_back(std::move(qa));
          ++rep.emitted;
        } catch (const std::exception&) {
          ++rep.dropped[kDropOther];
        }
      }
    }
    para.refresh_key();
    art.paragraphs.push_back(std::move(para));
    out.articles.push_back(std::move(art));
  }
  return {std::move(out), std::move(rep)};
}

}  // namespace qaprobe

#endif  // QAPROBE_CONVERTERS_HPP_
