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

#ifndef QAPROBE_DATASET_HPP_
#define QAPROBE_DATASET_HPP_

// The unified dataset representation and its file format.
//
// A dataset file is a SQuAD-2.0-shaped JSON document:
//
//   {"version": str,
//    "data": [{"title": str,
//              "paragraphs": [{"context": str,
//                              "qas": [{"id": str,
//                                       "question": str,
//                                       "answers": [{"text": str,
//                                                    "answer_start": int}],
//                                       "is_impossible": bool,
//                                       "plausible_answers": [...]}]}]}]}
//
// answer_start counts Unicode code points into the owning context. Unknown
// fields are carried through load/save untouched. Loading is permissive
// (shape errors reject the file, semantic problems like a bad offset do
// not); validate_dataset() is the strict check.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "qaprobe/io.hpp"
#include "qaprobe/text.hpp"

namespace qaprobe {

using ordered_json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SchemaError : std::runtime_error {
  SchemaError(const std::string& path, const std::string& msg)
      : std::runtime_error("schema error at " + path + ": " + msg),
        field_path(path) {}
  std::string field_path;
};

struct AnswerSpan {
  std::string text;
  std::int64_t answer_start = 0;  // code points into the owning context

  bool operator==(const AnswerSpan&) const = default;
};

struct QaExample {
  std::string id;
  std::string question;
  bool is_impossible = false;
  std::vector<AnswerSpan> answers;
  std::optional<std::vector<AnswerSpan>> plausible_answers;
  ordered_json extra = ordered_json::object();  // unknown fields, round-tripped

  bool operator==(const QaExample&) const = default;
};

struct Paragraph {
  std::string context;
  std::vector<QaExample> qas;
  // Content digest of context (SHA-256 hex of the UTF-8 bytes). Derived, not
  // serialized; entity sidecar files join on it.
  std::string paragraph_key;
  ordered_json extra = ordered_json::object();

  void refresh_key() { paragraph_key = sha256_hex(context); }

  bool operator==(const Paragraph& o) const {
    return context == o.context && qas == o.qas && extra == o.extra;
  }
};

inline std::string paragraph_key_for(std::string_view context) {
  return sha256_hex(context);
}

struct Article {
  std::string title;
  std::vector<Paragraph> paragraphs;
  ordered_json extra = ordered_json::object();

  bool operator==(const Article&) const = default;
};

struct Dataset {
  std::string version;
  std::vector<Article> articles;
  ordered_json extra = ordered_json::object();

  bool operator==(const Dataset&) const = default;

  std::size_t question_count() const {
    std::size_t n = 0;
    for (const auto& a : articles)
      for (const auto& p : a.paragraphs) n += p.qas.size();
    return n;
  }

  template <class Fn>  // Fn(const Paragraph&, const QaExample&)
  void for_each_qa(Fn&& fn) const {
    for (const auto& a : articles)
      for (const auto& p : a.paragraphs)
        for (const auto& qa : p.qas) fn(p, qa);
  }
};

// --- validation ---

struct ValidationEntry {
  std::string id;  // question id, or a location path for paragraph errors
  std::string kind;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;

  std::size_t error_count() const { return entries.size(); }
  bool pass() const { return entries.empty(); }

  ordered_json to_json() const {
    ordered_json j;
    j["pass"] = pass();
    j["error_count"] = error_count();
    auto arr = ordered_json::array();
    for (const auto& e : entries)
      arr.push_back({{"id", e.id}, {"kind", e.kind}, {"message", e.message}});
    j["errors"] = arr;
    return j;
  }
};

namespace detail {

inline void check_span(const std::u32string& context, const AnswerSpan& a,
                       const std::string& qa_id, const char* which,
                       ValidationReport& report) {
  std::u32string text = utf8_decode(a.text);
  const auto ctx_len = static_cast<std::int64_t>(context.size());
  const auto txt_len = static_cast<std::int64_t>(text.size());
  if (a.answer_start < 0 || a.answer_start > ctx_len - txt_len) {
    report.entries.push_back(
        {qa_id, "offset-out-of-range",
         std::string(which) + " answer_start " + std::to_string(a.answer_start) +
             " with length " + std::to_string(txt_len) +
             " does not fit a context of length " + std::to_string(ctx_len)});
    return;
  }
  if (context.compare(static_cast<std::size_t>(a.answer_start), text.size(),
                      text) != 0) {
    report.entries.push_back(
        {qa_id, "span-mismatch",
         std::string(which) + " text \"" + a.text +
             "\" does not equal the context substring at offset " +
             std::to_string(a.answer_start)});
  }
}

}  // namespace detail

// Reports every invariant violation: span mismatches, offsets out of range,
// duplicate question ids, is_impossible/answers inconsistencies and empty
// contexts. Never throws; all problems are report entries.
inline ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport report;
  std::unordered_map<std::string, std::string> first_location;
  for (std::size_t ai = 0; ai < d.articles.size(); ++ai) {
    const Article& art = d.articles[ai];
    for (std::size_t pi = 0; pi < art.paragraphs.size(); ++pi) {
      const Paragraph& par = art.paragraphs[pi];
      std::string where =
          "data[" + std::to_string(ai) + "].paragraphs[" + std::to_string(pi) + "]";
      if (par.context.empty()) {
        report.entries.push_back({where, "empty-context", "context is empty"});
      }
      std::u32string ctx = utf8_decode(par.context);
      for (std::size_t qi = 0; qi < par.qas.size(); ++qi) {
        const QaExample& qa = par.qas[qi];
        std::string here = where + ".qas[" + std::to_string(qi) + "]";
        auto [it, inserted] = first_location.emplace(qa.id, here);
        if (!inserted) {
          report.entries.push_back(
              {qa.id, "duplicate-id",
               "question id appears at " + it->second + " and " + here});
        }
        if (qa.is_impossible && !qa.answers.empty()) {
          report.entries.push_back(
              {qa.id, "impossible-with-answers",
               "is_impossible is true but answers is non-empty"});
        }
        if (!qa.is_impossible && qa.answers.empty()) {
          report.entries.push_back(
              {qa.id, "answerable-without-answers",
               "is_impossible is false but answers is empty"});
        }
        for (const auto& a : qa.answers)
          detail::check_span(ctx, a, qa.id, "gold", report);
        if (qa.plausible_answers)
          for (const auto& a : *qa.plausible_answers)
            detail::check_span(ctx, a, qa.id, "plausible", report);
      }
    }
  }
  return report;
}

// --- JSON (de)serialization ---

namespace detail {

inline std::string join_path(const std::string& base, const char* key) {
  return base + "/" + key;
}
inline std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

inline const ordered_json& require_field(const ordered_json& obj,
                                         const char* key,
                                         const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw SchemaError(join_path(path, key), "required field is missing");
  return *it;
}

inline std::string as_string(const ordered_json& v, const std::string& path) {
  if (!v.is_string()) throw SchemaError(path, "expected a string");
  return v.get<std::string>();
}

inline std::int64_t as_int(const ordered_json& v, const std::string& path) {
  if (!v.is_number_integer())
    throw SchemaError(path, "expected an integer");
  return v.get<std::int64_t>();
}

inline std::vector<AnswerSpan> parse_answers(const ordered_json& v,
                                             const std::string& path) {
  if (!v.is_array()) throw SchemaError(path, "expected an array");
  std::vector<AnswerSpan> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    std::string apath = index_path(path, i);
    if (!a.is_object()) throw SchemaError(apath, "expected an object");
    AnswerSpan span;
    span.text = as_string(require_field(a, "text", apath), join_path(apath, "text"));
    span.answer_start = as_int(require_field(a, "answer_start", apath),
                               join_path(apath, "answer_start"));
    out.push_back(std::move(span));
  }
  return out;
}

inline ordered_json answers_to_json(const std::vector<AnswerSpan>& answers) {
  auto arr = ordered_json::array();
  for (const auto& a : answers)
    arr.push_back({{"text", a.text}, {"answer_start", a.answer_start}});
  return arr;
}

// Collects fields other than the known ones, keyed in lexicographic order so
// serialization is deterministic.
inline ordered_json collect_extra(const ordered_json& obj,
                                  std::initializer_list<const char*> known) {
  std::map<std::string, ordered_json> extras;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (const char* k : known)
      if (it.key() == k) {
        is_known = true;
        break;
      }
    if (!is_known) extras.emplace(it.key(), it.value());
  }
  ordered_json out = ordered_json::object();
  for (auto& [k, v] : extras) out[k] = std::move(v);
  return out;
}

inline void append_extra(ordered_json& obj, const ordered_json& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it) obj[it.key()] = it.value();
}

}  // namespace detail

inline Dataset dataset_from_json(const ordered_json& root) {
  if (!root.is_object()) throw SchemaError("", "expected a top-level object");
  Dataset d;
  if (auto it = root.find("version"); it != root.end())
    d.version = detail::as_string(*it, "/version");
  const auto& data = detail::require_field(root, "data", "");
  if (!data.is_array()) throw SchemaError("/data", "expected an array");
  d.extra = detail::collect_extra(root, {"version", "data"});

  std::unordered_map<std::string, std::string> id_locations;
  for (std::size_t ai = 0; ai < data.size(); ++ai) {
    std::string apath = detail::index_path("/data", ai);
    const auto& ja = data[ai];
    if (!ja.is_object()) throw SchemaError(apath, "expected an object");
    Article art;
    if (auto it = ja.find("title"); it != ja.end())
      art.title = detail::as_string(*it, detail::join_path(apath, "title"));
    art.extra = detail::collect_extra(ja, {"title", "paragraphs"});
    const auto& paras = detail::require_field(ja, "paragraphs", apath);
    if (!paras.is_array())
      throw SchemaError(detail::join_path(apath, "paragraphs"), "expected an array");
    for (std::size_t pi = 0; pi < paras.size(); ++pi) {
      std::string ppath = detail::index_path(apath + "/paragraphs", pi);
      const auto& jp = paras[pi];
      if (!jp.is_object()) throw SchemaError(ppath, "expected an object");
      Paragraph par;
      par.context = detail::as_string(detail::require_field(jp, "context", ppath),
                                      detail::join_path(ppath, "context"));
      par.extra = detail::collect_extra(jp, {"context", "qas"});
      const auto& qas = detail::require_field(jp, "qas", ppath);
      if (!qas.is_array())
        throw SchemaError(detail::join_path(ppath, "qas"), "expected an array");
      for (std::size_t qi = 0; qi < qas.size(); ++qi) {
        std::string qpath = detail::index_path(ppath + "/qas", qi);
        const auto& jq = qas[qi];
        if (!jq.is_object()) throw SchemaError(qpath, "expected an object");
        QaExample qa;
        qa.id = detail::as_string(detail::require_field(jq, "id", qpath),
                                  detail::join_path(qpath, "id"));
        qa.question = detail::as_string(detail::require_field(jq, "question", qpath),
                                        detail::join_path(qpath, "question"));
        if (auto it = jq.find("is_impossible"); it != jq.end()) {
          if (!it->is_boolean())
            throw SchemaError(detail::join_path(qpath, "is_impossible"),
                              "expected a boolean");
          qa.is_impossible = it->get<bool>();
        }
        if (auto it = jq.find("answers"); it != jq.end())
          qa.answers = detail::parse_answers(*it, detail::join_path(qpath, "answers"));
        if (auto it = jq.find("plausible_answers"); it != jq.end())
          qa.plausible_answers = detail::parse_answers(
              *it, detail::join_path(qpath, "plausible_answers"));
        qa.extra = detail::collect_extra(
            jq, {"id", "question", "is_impossible", "answers", "plausible_answers"});
        auto [loc, inserted] = id_locations.emplace(qa.id, qpath);
        if (!inserted)
          throw SchemaError(qpath, "duplicate question id \"" + qa.id +
                                       "\" also present at " + loc->second);
        par.qas.push_back(std::move(qa));
      }
      par.refresh_key();
      art.paragraphs.push_back(std::move(par));
    }
    d.articles.push_back(std::move(art));
  }
  return d;
}

inline ordered_json dataset_to_json(const Dataset& d) {
  ordered_json root;
  root["version"] = d.version;
  auto data = ordered_json::array();
  for (const auto& art : d.articles) {
    ordered_json ja;
    ja["title"] = art.title;
    auto paras = ordered_json::array();
    for (const auto& par : art.paragraphs) {
      ordered_json jp;
      jp["context"] = par.context;
      auto qas = ordered_json::array();
      for (const auto& qa : par.qas) {
        ordered_json jq;
        jq["id"] = qa.id;
        jq["question"] = qa.question;
        jq["answers"] = detail::answers_to_json(qa.answers);
        jq["is_impossible"] = qa.is_impossible;
        if (qa.plausible_answers)
          jq["plausible_answers"] = detail::answers_to_json(*qa.plausible_answers);
        detail::append_extra(jq, qa.extra);
        qas.push_back(std::move(jq));
      }
      jp["qas"] = std::move(qas);
      detail::append_extra(jp, par.extra);
      paras.push_back(std::move(jp));
    }
    ja["paragraphs"] = std::move(paras);
    detail::append_extra(ja, art.extra);
    data.push_back(std::move(ja));
  }
  root["data"] = std::move(data);
  detail::append_extra(root, d.extra);
  return root;
}

inline ordered_json parse_json_text(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON at byte ") +
                     std::to_string(e.byte) + ": " + e.what());
  }
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_json(parse_json_text(read_file(path)));
}

inline std::string serialize_dataset(const Dataset& d) {
  return dataset_to_json(d).dump();
}

inline void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  atomic_write_file(path, serialize_dataset(d));
}

// --- prediction sets ---

// A model's answers keyed by question id; "" means "no answer". std::map
// keeps serialization order stable.
struct PredictionSet {
  std::map<std::string, std::string> by_id;

  bool contains(const std::string& id) const { return by_id.count(id) != 0; }
  const std::string& at(const std::string& id) const { return by_id.at(id); }
};

inline PredictionSet predictions_from_json(const ordered_json& root) {
  if (!root.is_object())
    throw SchemaError("", "expected an object mapping question id to answer text");
  PredictionSet p;
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (!it.value().is_string())
      throw SchemaError("/" + it.key(), "expected a string answer");
    p.by_id[it.key()] = it.value().get<std::string>();
  }
  return p;
}

inline PredictionSet load_predictions(const std::filesystem::path& path) {
  return predictions_from_json(parse_json_text(read_file(path)));
}

inline void save_predictions(const PredictionSet& p,
                             const std::filesystem::path& path) {
  ordered_json j = ordered_json::object();
  for (const auto& [id, text] : p.by_id) j[id] = text;
  atomic_write_file(path, j.dump());
}

}  // namespace qaprobe

#endif  // QAPROBE_DATASET_HPP_
