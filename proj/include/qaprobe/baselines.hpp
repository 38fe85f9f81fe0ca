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

#ifndef QAPROBE_BASELINES_HPP_
#define QAPROBE_BASELINES_HPP_

// No-training NER baselines. Entity annotations come from a sidecar file
// keyed by paragraph_key so any external tagger can be plugged in; the
// bundled naive_tagger is a deliberately simple rule-based fallback so the
// toolkit runs stand-alone ("approximate NER").

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "qaprobe/dataset.hpp"
#include "qaprobe/io.hpp"
#include "qaprobe/text.hpp"

namespace qaprobe {

enum class EntityLabel { kPerson, kDate, kLoc, kGpe, kOrg, kEvent, kWorkOfArt };

inline std::string_view to_string(EntityLabel l) {
  switch (l) {
    case EntityLabel::kPerson:
      return "PERSON";
    case EntityLabel::kDate:
      return "DATE";
    case EntityLabel::kLoc:
      return "LOC";
    case EntityLabel::kGpe:
      return "GPE";
    case EntityLabel::kOrg:
      return "ORG";
    case EntityLabel::kEvent:
      return "EVENT";
    case EntityLabel::kWorkOfArt:
      return "WORK_OF_ART";
  }
  return "";
}

inline std::optional<EntityLabel> entity_label_from_string(std::string_view s) {
  if (s == "PERSON") return EntityLabel::kPerson;
  if (s == "DATE") return EntityLabel::kDate;
  if (s == "LOC") return EntityLabel::kLoc;
  if (s == "GPE") return EntityLabel::kGpe;
  if (s == "ORG") return EntityLabel::kOrg;
  if (s == "EVENT") return EntityLabel::kEvent;
  if (s == "WORK_OF_ART") return EntityLabel::kWorkOfArt;
  return std::nullopt;
}

struct EntitySpan {
  std::string text;
  std::int64_t start = 0;  // code-point offset into the context
  EntityLabel label = EntityLabel::kPerson;
};

struct EntityAnnotationSet {
  std::map<std::string, std::vector<EntitySpan>> by_key;  // paragraph_key -> spans

  ordered_json to_json() const {
    ordered_json out = ordered_json::object();
    for (const auto& [key, spans] : by_key) {
      ordered_json arr = ordered_json::array();
      for (const auto& s : spans) {
        ordered_json j;
        j["text"] = s.text;
        j["start"] = s.start;
        j["label"] = std::string(to_string(s.label));
        arr.push_back(std::move(j));
      }
      out[key] = std::move(arr);
    }
    return out;
  }
};

inline EntityAnnotationSet entities_from_json(const ordered_json& root) {
  if (!root.is_object())
    throw SchemaError("$", "entity sidecar must be an object keyed by paragraph_key");
  EntityAnnotationSet out;
  for (const auto& [key, spans] : root.items()) {
    if (!spans.is_array()) throw SchemaError(key, "expected an array of entity spans");
    auto& list = out.by_key[key];
    for (std::size_t i = 0; i < spans.size(); ++i) {
      const ordered_json& s = spans[i];
      const std::string path = key + "[" + std::to_string(i) + "]";
      if (!s.is_object()) throw SchemaError(path, "expected an entity span object");
      EntitySpan span;
      span.text = detail::as_string(detail::require_field(s, "text", path), path);
      span.start = detail::as_int(detail::require_field(s, "start", path), path);
      std::string label =
          detail::as_string(detail::require_field(s, "label", path), path);
      auto parsed = entity_label_from_string(label);
      if (!parsed) throw SchemaError(path, "unknown entity label \"" + label + "\"");
      span.label = *parsed;
      if (span.start < 0) throw SchemaError(path, "negative start offset");
      list.push_back(std::move(span));
    }
    std::stable_sort(list.begin(), list.end(),
                     [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
  }
  return out;
}

inline EntityAnnotationSet load_entities(const std::filesystem::path& path) {
  return entities_from_json(parse_json_text(read_file(path)));
}

namespace detail {

inline const std::unordered_set<std::u32string>& month_names() {
  static const std::unordered_set<std::u32string> kSet = {
      U"January", U"February", U"March", U"April", U"May", U"June", U"July",
      U"August", U"September", U"October", U"November", U"December"};
  return kSet;
}

inline const std::unordered_set<std::u32string>& weekday_names() {
  static const std::unordered_set<std::u32string> kSet = {
      U"Monday", U"Tuesday", U"Wednesday", U"Thursday",
      U"Friday", U"Saturday", U"Sunday"};
  return kSet;
}

// Adjectives of origin and similar capitalized non-names; single-token runs
// of these are not entities.
inline const std::unordered_set<std::u32string>& demonym_blocklist() {
  static const std::unordered_set<std::u32string> kSet = {
      U"Norse", U"Norman", U"Normans", U"French", U"English", U"British",
      U"Latin", U"Roman", U"Romans", U"Viking", U"Vikings", U"Danish",
      U"Frankish", U"Franks", U"German", U"Germans", U"European",
      U"Europeans", U"American", U"Americans", U"Christian", U"Christians",
      U"Catholic", U"Muslim", U"Jewish", U"Greek", U"Greeks", U"Italian",
      U"Spanish", U"Russian", U"Chinese", U"Japanese", U"Indian",
      U"Egyptian", U"Scottish", U"Irish", U"Welsh", U"Dutch", U"Swedish",
      U"Norwegian", U"Icelandic", U"Arab", U"Arabic", U"Persian",
      U"Turkish", U"Celtic", U"Saxon", U"Saxons", U"Byzantine", U"Ottoman",
      U"Carolingian", U"I"};
  return kSet;
}

inline const std::unordered_set<std::u32string>& gpe_gazetteer() {
  static const std::unordered_set<std::u32string> kSet = {
      U"France", U"England", U"Normandy", U"Paris", U"London", U"Rome",
      U"Europe", U"America", U"Germany", U"Italy", U"Spain", U"Russia",
      U"China", U"Japan", U"India", U"Egypt", U"Greece", U"Scotland",
      U"Ireland", U"Wales", U"Britain", U"Denmark", U"Norway", U"Sweden",
      U"Iceland", U"United States", U"United Kingdom", U"New York",
      U"New York City", U"California", U"Texas", U"Chicago", U"Boston",
      U"Washington", U"Canada", U"Mexico", U"Brazil", U"Australia"};
  return kSet;
}

inline const std::unordered_set<std::u32string>& loc_gazetteer() {
  static const std::unordered_set<std::u32string> kSet = {
      U"Seine", U"Thames", U"Alps", U"Mediterranean", U"Atlantic",
      U"Pacific", U"Nile", U"Rhine", U"Danube", U"Everest", U"Sahara"};
  return kSet;
}

inline const std::unordered_set<std::u32string>& event_keywords() {
  static const std::unordered_set<std::u32string> kSet = {
      U"War", U"Battle", U"Revolution", U"Siege", U"Crusade", U"Conquest",
      U"Invasion", U"Treaty", U"Olympics"};
  return kSet;
}

inline const std::unordered_set<std::u32string>& org_keywords() {
  static const std::unordered_set<std::u32string> kSet = {
      U"University", U"College", U"Institute", U"Corporation", U"Company",
      U"Inc", U"Ltd", U"Corp", U"Church", U"Council", U"Parliament",
      U"Congress", U"Senate", U"Ministry", U"Bank", U"Army", U"Navy",
      U"Association", U"Society", U"Union", U"League", U"Party"};
  return kSet;
}

inline const std::unordered_set<std::u32string>& gpe_keywords() {
  static const std::unordered_set<std::u32string> kSet = {
      U"City", U"Kingdom", U"Republic", U"Empire", U"State", U"County",
      U"Duchy", U"Province"};
  return kSet;
}

inline const std::unordered_set<std::u32string>& loc_keywords() {
  static const std::unordered_set<std::u32string> kSet = {
      U"River", U"Mountain", U"Mountains", U"Sea", U"Ocean", U"Lake",
      U"Valley", U"Island", U"Islands", U"Bay", U"Desert", U"Forest",
      U"Mount", U"Cape"};
  return kSet;
}

inline bool all_digits(std::u32string_view s) {
  if (s.empty()) return false;
  for (char32_t c : s)
    if (!is_ascii_digit(c)) return false;
  return true;
}

inline bool is_year_token(std::u32string_view s) {
  if (s.size() != 4 || !all_digits(s)) return false;
  int v = 0;
  for (char32_t c : s) v = v * 10 + static_cast<int>(c - U'0');
  return v >= 1000 && v <= 2999;
}

inline bool is_day_number(std::u32string_view s) {
  if (s.empty() || s.size() > 2 || !all_digits(s)) return false;
  int v = 0;
  for (char32_t c : s) v = v * 10 + static_cast<int>(c - U'0');
  return v >= 1 && v <= 31;
}

inline bool is_ordinal_token(std::u32string_view s) {
  if (s.size() < 3) return false;
  std::size_t digits = 0;
  while (digits < s.size() && is_ascii_digit(s[digits])) ++digits;
  if (digits == 0 || digits + 2 != s.size()) return false;
  std::u32string suffix = py_lower(s.substr(digits));
  return suffix == U"st" || suffix == U"nd" || suffix == U"rd" || suffix == U"th";
}

inline bool is_name_shaped(std::u32string_view core) {
  if (core.empty() || !is_upper_cp(core[0])) return false;
  for (char32_t c : core)
    if (!is_alpha_cp(c) && c != U'.' && c != U'-' && c != U'\'' && c != 0x2019)
      return false;
  return true;
}

inline bool is_all_caps(std::u32string_view core) {
  if (core.size() < 2) return false;
  for (char32_t c : core)
    if (!is_upper_cp(c)) return false;
  return true;
}

}  // namespace detail

// Rule-based, deliberately approximate entity extraction: date patterns
// (month + day/year, standalone years, ordinals, weekdays), small gazetteers
// for places/organizations/events, and capitalized runs away from sentence
// starts as person candidates, with an adjective-of-origin blocklist.
inline std::vector<EntitySpan> naive_tagger(std::string_view context) {
  std::u32string ctx = utf8_decode(context);
  std::vector<CpSpan> toks = ws_tokens(ctx);
  std::vector<EntitySpan> out;
  if (toks.empty()) return out;

  std::vector<CpSpan> core(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) core[i] = strip_edge_punct(ctx, toks[i]);
  auto core_text = [&](std::size_t i) {
    return std::u32string_view(ctx).substr(core[i].begin, core[i].size());
  };

  std::vector<char> sent_start(toks.size(), 0);
  sent_start[0] = 1;
  {
    std::size_t ti = 0;
    for (std::size_t cut : sentence_cuts(ctx)) {
      while (ti < toks.size() && toks[ti].begin < cut) ++ti;
      if (ti < toks.size()) sent_start[ti] = 1;
    }
  }

  auto emit = [&](std::size_t first, std::size_t last, EntityLabel label) {
    std::size_t b = core[first].begin;
    std::size_t e = core[last].end;
    out.push_back({utf8_encode(std::u32string_view(ctx).substr(b, e - b)),
                   static_cast<std::int64_t>(b), label});
  };

  std::vector<char> used(toks.size(), 0);

  // Date patterns first; they may start at sentence openings.
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (used[i] || core[i].begin >= core[i].end) continue;
    std::u32string_view w = core_text(i);
    if (detail::month_names().count(std::u32string(w))) {
      std::size_t last = i;
      for (std::size_t j = i + 1; j < toks.size() && j <= i + 3; ++j) {
        std::u32string_view nxt = core_text(j);
        if (detail::is_day_number(nxt) || detail::is_ordinal_token(nxt) ||
            detail::is_year_token(nxt))
          last = j;
        else
          break;
      }
      for (std::size_t j = i; j <= last; ++j) used[j] = 1;
      emit(i, last, EntityLabel::kDate);
    } else if (detail::weekday_names().count(std::u32string(w)) ||
               detail::is_year_token(w) || detail::is_ordinal_token(w)) {
      used[i] = 1;
      emit(i, i, EntityLabel::kDate);
    }
  }

  // Capitalized runs.
  std::size_t i = 0;
  while (i < toks.size()) {
    if (used[i] || !detail::is_name_shaped(core_text(i))) {
      ++i;
      continue;
    }
    std::size_t first = i;
    std::size_t last = i;
    while (last + 1 < toks.size() && !used[last + 1] && !sent_start[last + 1] &&
           detail::is_name_shaped(core_text(last + 1)))
      ++last;
    i = last + 1;

    std::u32string full(std::u32string_view(ctx).substr(
        core[first].begin, core[last].end - core[first].begin));
    bool any_event = false, any_org = false, all_blocked = true, all_caps_run = true;
    for (std::size_t j = first; j <= last; ++j) {
      std::u32string w(core_text(j));
      if (detail::event_keywords().count(w)) any_event = true;
      if (detail::org_keywords().count(w)) any_org = true;
      if (!detail::demonym_blocklist().count(w)) all_blocked = false;
      if (!detail::is_all_caps(w)) all_caps_run = false;
    }
    std::u32string last_word(core_text(last));
    std::u32string first_word(core_text(first));

    if (detail::gpe_gazetteer().count(full)) {
      emit(first, last, EntityLabel::kGpe);
    } else if (detail::loc_gazetteer().count(full)) {
      emit(first, last, EntityLabel::kLoc);
    } else if (any_event) {
      emit(first, last, EntityLabel::kEvent);
    } else if (any_org || all_caps_run) {
      emit(first, last, EntityLabel::kOrg);
    } else if (detail::gpe_keywords().count(last_word)) {
      emit(first, last, EntityLabel::kGpe);
    } else if (detail::loc_keywords().count(last_word) ||
               detail::loc_keywords().count(first_word)) {
      emit(first, last, EntityLabel::kLoc);
    } else if (all_blocked) {
      // adjectives of origin, not entities
    } else if (!sent_start[first]) {
      emit(first, last, EntityLabel::kPerson);
    }
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
  return out;
}

inline EntityAnnotationSet annotate_dataset(const Dataset& d, int threads = 1) {
  std::vector<const Paragraph*> paras;
  for (const auto& art : d.articles)
    for (const auto& para : art.paragraphs) paras.push_back(&para);
  std::vector<std::vector<EntitySpan>> spans(paras.size());
  parallel_for(paras.size(), threads,
               [&](std::size_t i) { spans[i] = naive_tagger(paras[i]->context); });
  EntityAnnotationSet out;
  for (std::size_t i = 0; i < paras.size(); ++i) {
    std::string key = paras[i]->paragraph_key.empty()
                          ? paragraph_key_for(paras[i]->context)
                          : paras[i]->paragraph_key;
    out.by_key[key] = std::move(spans[i]);
  }
  return out;
}

namespace detail {

inline const std::vector<EntitySpan>& spans_for(const Paragraph& para,
                                                const EntityAnnotationSet& ents) {
  const std::string& key =
      para.paragraph_key.empty() ? paragraph_key_for(para.context) : para.paragraph_key;
  auto it = ents.by_key.find(key);
  if (it == ents.by_key.end())
    throw std::runtime_error("no entity annotations for paragraph_key " + key);
  return it->second;
}

inline std::string first_entity_text(const std::vector<EntitySpan>& spans,
                                     std::initializer_list<EntityLabel> labels) {
  for (const auto& s : spans)
    for (EntityLabel l : labels)
      if (s.label == l) return s.text;
  return "";
}

// Lowercased first whitespace token with edge punctuation stripped and a
// trailing possessive/contraction 's removed ("Who's" matches "who").
inline std::string question_first_word(const std::string& question) {
  std::u32string q = utf8_decode(question);
  std::vector<CpSpan> toks = ws_tokens(q);
  if (toks.empty()) return "";
  CpSpan core = strip_edge_punct(q, toks[0]);
  std::u32string w = py_lower(std::u32string_view(q).substr(core.begin, core.size()));
  if (w.size() >= 2 && w[w.size() - 1] == U's' &&
      (w[w.size() - 2] == U'\'' || w[w.size() - 2] == 0x2019))
    w.erase(w.size() - 2);
  return utf8_encode(w);
}

}  // namespace detail

// who -> first person, when -> first date, where -> first location, what ->
// first organization/event/work of art; any other first word predicts the
// empty string.
inline PredictionSet first_word_ner_baseline(const Dataset& d,
                                             const EntityAnnotationSet& ents) {
  PredictionSet out;
  for (const auto& art : d.articles) {
    for (const auto& para : art.paragraphs) {
      if (para.qas.empty()) continue;
      const std::vector<EntitySpan>& spans = detail::spans_for(para, ents);
      for (const auto& qa : para.qas) {
        std::string first = detail::question_first_word(qa.question);
        std::string pred;
        if (first == "who") {
          pred = detail::first_entity_text(spans, {EntityLabel::kPerson});
        } else if (first == "when") {
          pred = detail::first_entity_text(spans, {EntityLabel::kDate});
        } else if (first == "where") {
          pred = detail::first_entity_text(spans, {EntityLabel::kLoc, EntityLabel::kGpe});
        } else if (first == "what") {
          pred = detail::first_entity_text(
              spans, {EntityLabel::kOrg, EntityLabel::kEvent, EntityLabel::kWorkOfArt});
        }
        out.by_id[qa.id] = std::move(pred);
      }
    }
  }
  return out;
}

// Every question in a paragraph predicts that paragraph's first person
// entity, or the empty string when there is none.
inline PredictionSet person_ner_baseline(const Dataset& d,
                                         const EntityAnnotationSet& ents) {
  PredictionSet out;
  for (const auto& art : d.articles) {
    for (const auto& para : art.paragraphs) {
      if (para.qas.empty()) continue;
      std::string pred =
          detail::first_entity_text(detail::spans_for(para, ents), {EntityLabel::kPerson});
      for (const auto& qa : para.qas) out.by_id[qa.id] = pred;
    }
  }
  return out;
}

}  // namespace qaprobe

#endif  // QAPROBE_BASELINES_HPP_
