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

// Acceptance harness. Runs one scenario per release criterion and prints a
// single PASS or FAIL line for each; exits nonzero when any scenario fails.
// argv[1] names the qaprobe binary used by the pipeline determinism scenario.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qaprobe/qaprobe.hpp"

namespace fs = std::filesystem;
using namespace qaprobe;

namespace {

int g_failures = 0;

void check(bool cond, const std::string& what) {
  if (!cond) throw std::runtime_error(what);
}

bool near(double a, double b) { return std::fabs(a - b) <= 1e-9; }

void run_criterion(int n, const char* what, double limit_seconds,
                   const std::function<void()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  std::string reason;
  try {
    body();
  } catch (const std::exception& e) {
    reason = e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (reason.empty() && limit_seconds > 0.0 && secs > limit_seconds) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "runtime %.2fs exceeds %.0fs limit", secs,
                  limit_seconds);
    reason = buf;
  }
  if (reason.empty()) {
    std::printf("PASS criterion %d: %s\n", n, what);
  } else {
    std::printf("FAIL criterion %d: %s (%s)\n", n, what, reason.c_str());
    ++g_failures;
  }
  std::fflush(stdout);
}

// --- shared builders ---

QaExample make_qa(std::string id, std::string question,
                  std::vector<AnswerSpan> answers, bool impossible = false) {
  QaExample qa;
  qa.id = std::move(id);
  qa.question = std::move(question);
  qa.is_impossible = impossible;
  qa.answers = std::move(answers);
  return qa;
}

std::int64_t pos_of(const std::string& context, const std::string& text) {
  auto pos = utf8_decode(context).find(utf8_decode(text));
  check(pos != std::u32string::npos, "fixture answer '" + text + "' not in context");
  return static_cast<std::int64_t>(pos);
}

Dataset single_question(const std::string& context, const std::string& id,
                        const std::string& question, const std::string& answer) {
  Dataset d;
  d.version = "v2.0";
  Article art;
  art.title = "t";
  Paragraph p;
  p.context = context;
  p.qas.push_back(make_qa(id, question, {{answer, pos_of(context, answer)}}));
  p.refresh_key();
  art.paragraphs.push_back(std::move(p));
  d.articles.push_back(std::move(art));
  return d;
}

const char* kNorseContext =
    "The Norse leader Rollo agreed to swear fealty to King Charles and became "
    "the first ruler of Normandy. Rollo was succeeded by his son William.";

const std::string& question_of(const Dataset& d) {
  return d.articles.at(0).paragraphs.at(0).qas.at(0).question;
}

// --- criterion 1: evaluation vs the frozen scoring fixture ---

void criterion_metric_oracle() {
  Dataset gold = load_dataset(fs::path(QAPROBE_TEST_DATA) / "metric_oracle_dataset.json");
  PredictionSet preds =
      load_predictions(fs::path(QAPROBE_TEST_DATA) / "metric_oracle_predictions.json");
  ordered_json expected = parse_json_text(
      read_file(fs::path(QAPROBE_TEST_DATA) / "metric_oracle_expected.json"));

  check(gold.question_count() >= 200, "fixture must hold at least 200 questions");

  EvalReport rep = evaluate(gold, preds);
  check(near(rep.exact, expected.at("exact").get<double>()), "exact drifted");
  check(near(rep.f1, expected.at("f1").get<double>()), "f1 drifted");
  check(rep.total == expected.at("total").get<std::int64_t>(), "total drifted");
  check(rep.has_ans_total == expected.at("HasAns_total").get<std::int64_t>(),
        "HasAns_total drifted");
  check(near(*rep.has_ans_exact, expected.at("HasAns_exact").get<double>()),
        "HasAns_exact drifted");
  check(near(*rep.has_ans_f1, expected.at("HasAns_f1").get<double>()),
        "HasAns_f1 drifted");
  check(rep.no_ans_total == expected.at("NoAns_total").get<std::int64_t>(),
        "NoAns_total drifted");
  check(near(*rep.no_ans_exact, expected.at("NoAns_exact").get<double>()),
        "NoAns_exact drifted");
  check(near(*rep.no_ans_f1, expected.at("NoAns_f1").get<double>()), "NoAns_f1 drifted");

  std::map<std::string, std::pair<int, double>> scored;
  for (const auto& q : rep.per_question) scored[q.id] = {q.exact, q.f1};
  const ordered_json& per = expected.at("per_question");
  check(scored.size() == per.size(), "per-question coverage drifted");
  for (auto it = per.begin(); it != per.end(); ++it) {
    auto found = scored.find(it.key());
    check(found != scored.end(), "missing per-question score for " + it.key());
    check(found->second.first == it.value().at("exact").get<int>(),
          "per-question exact drifted for " + it.key());
    check(near(found->second.second, it.value().at("f1").get<double>()),
          "per-question f1 drifted for " + it.key());
  }

  EvalReport threaded = evaluate(gold, preds, 4);
  check(threaded.to_json().dump() == rep.to_json().dump(),
        "thread count changed the evaluation report");
}

// --- criterion 2: pinned probe outputs on the reference question ---

void criterion_pinned_probes() {
  Dataset norse =
      single_question(kNorseContext, "norse-1", "Who was the Norse leader", "Rollo");

  auto expect_question = [&](const Dataset& out, const std::string& want,
                             const char* probe) {
    check(question_of(out) == want, std::string(probe) + " produced '" +
                                        question_of(out) + "', wanted '" + want + "'");
  };

  expect_question(truncate_questions(norse, TruncateMode::kFirstHalf).first, "Who was",
                  "truncate first-half");
  expect_question(truncate_questions(norse, TruncateMode::kFirstWord).first, "Who",
                  "truncate first-word");
  expect_question(truncate_questions(norse, TruncateMode::kNoWords).first, "",
                  "truncate no-words");
  expect_question(add_filler(norse, ProbeSeed{1}).first,
                  "Who really was the Norse leader", "filler");
  expect_question(negate_questions(norse).first, "Who wasn't the Norse leader",
                  "negate");
}

// --- criterion 3: exact-count label corruption ---

Dataset make_corruption_fixture() {
  Dataset d;
  d.version = "v2.0";
  Article art;
  art.title = "generated";
  for (int i = 0; i < 1000; ++i) {
    Paragraph p;
    std::string answer;
    std::int64_t start = 0;
    for (int j = 0; j < 21; ++j) {
      std::string word = "w" + std::to_string(i) + "x" + std::to_string(j);
      if (j) p.context += " ";
      if (j == (i * 5) % 21) {
        answer = word;
        start = static_cast<std::int64_t>(p.context.size());
      }
      p.context += word;
    }
    p.qas.push_back(make_qa("ans-" + std::to_string(i), "which token stands out",
                            {{answer, start}}));
    p.refresh_key();
    art.paragraphs.push_back(std::move(p));
  }
  for (int i = 0; i < 200; ++i) {
    Paragraph p;
    p.context = "Imp" + std::to_string(i) + " alpha beta gamma.";
    QaExample qa = make_qa("imp-" + std::to_string(i), "what is absent", {}, true);
    qa.plausible_answers = {{std::vector<AnswerSpan>{{"beta", pos_of(p.context, "beta")}}}};
    p.qas.push_back(std::move(qa));
    p.refresh_key();
    art.paragraphs.push_back(std::move(p));
  }
  d.articles.push_back(std::move(art));
  return d;
}

void criterion_label_corruption() {
  Dataset fixture = make_corruption_fixture();
  check(validate_dataset(fixture).pass(), "generated fixture must validate");

  for (double rate : {0.1, 0.5, 0.9}) {
    auto [out, rep] = corrupt_labels(fixture, rate, ProbeSeed{2026}, 4);
    std::int64_t want = std::llround(rate * 1000.0);
    check(rep.altered == want, "rate " + std::to_string(rate) + " altered " +
                                   std::to_string(rep.altered) + ", wanted " +
                                   std::to_string(want));
    check(rep.skipped.at(kSkipImpossible) == 200, "impossible skip count drifted");
    check(rep.metadata.at("eligible").get<std::int64_t>() == 1000, "eligible drifted");
    check(rep.metadata.at("requested").get<std::int64_t>() == want, "requested drifted");
    check(validate_dataset(out).pass(), "corrupted dataset must validate");

    std::int64_t changed = 0;
    const auto& orig_paras = fixture.articles[0].paragraphs;
    const auto& new_paras = out.articles[0].paragraphs;
    check(orig_paras.size() == new_paras.size(), "paragraph count changed");
    for (std::size_t i = 0; i < orig_paras.size(); ++i) {
      const QaExample& before = orig_paras[i].qas.at(0);
      const QaExample& after = new_paras[i].qas.at(0);
      if (before.is_impossible) {
        check(orig_paras[i] == new_paras[i], "impossible paragraph was touched");
        continue;
      }
      check(new_paras[i].context == orig_paras[i].context,
            "corruption must not edit contexts");
      if (after.answers == before.answers) continue;
      ++changed;

      std::u32string ctx = utf8_decode(new_paras[i].context);
      std::vector<CpSpan> words = ws_tokens(ctx);
      check(after.answers.size() == 1, "replacement must be a single span");
      const AnswerSpan& repl = after.answers.front();
      auto b = static_cast<std::size_t>(repl.answer_start);
      std::size_t e = b + utf8_decode(repl.text).size();
      bool starts_on_word = false, ends_on_word = false;
      for (const CpSpan& w : words) {
        if (w.begin == b) starts_on_word = true;
        if (w.end == e) ends_on_word = true;
      }
      check(starts_on_word && ends_on_word, "replacement is not word aligned");
      check(ws_tokens(utf8_decode(repl.text)).size() ==
                ws_tokens(utf8_decode(before.answers.front().text)).size(),
            "replacement changed the token count");
      auto ob = static_cast<std::size_t>(before.answers.front().answer_start);
      std::size_t oe = ob + utf8_decode(before.answers.front().text).size();
      check(e <= ob || oe <= b, "replacement overlaps the original span");
    }
    check(changed == rep.altered, "changed answers disagree with the report");
  }
}

// --- criterion 4: sentence shuffling ---

struct ShuffleCase {
  bool single_sentence = false;
};

Dataset make_shuffle_fixture(std::vector<ShuffleCase>& cases) {
  Dataset d;
  d.version = "v2.0";
  Article art;
  art.title = "generated";
  for (int i = 0; i < 1000; ++i) {
    Paragraph p;
    ShuffleCase sc;
    std::string tag = std::to_string(i);
    if (i % 11 == 0) {
      sc.single_sentence = true;
      p.context = "  Solo" + tag + " nine ten.  ";
      p.qas.push_back(
          make_qa("sh-" + tag, "which word", {{"nine", pos_of(p.context, "nine")}}));
    } else {
      p.context = "Aa" + tag + " ax" + tag + " bx" + tag + ". Bb" + tag + " cx" + tag +
                  " dx" + tag + ". Cc" + tag + " ex" + tag + " fx" + tag + ". Dd" + tag +
                  " gx" + tag + " hx" + tag + ".";
      std::string answer = (i % 7 == 3) ? "dx" + tag + ". Cc" + tag
                                        : "cx" + tag + " dx" + tag;
      p.qas.push_back(make_qa("sh-" + tag, "which words",
                              {{answer, pos_of(p.context, answer)}}));
    }
    p.refresh_key();
    cases.push_back(sc);
    art.paragraphs.push_back(std::move(p));
  }
  d.articles.push_back(std::move(art));
  return d;
}

std::multiset<std::u32string> chunk_multiset(const Paragraph& p) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& qa : p.qas)
    for (const auto& r : detail::answer_ranges(qa.answers)) spans.push_back(r);
  detail::ChunkPlan plan =
      detail::plan_chunks(utf8_decode(p.context), spans, default_sentence_splitter());
  return {plan.chunks.begin(), plan.chunks.end()};
}

std::string trim_spaces(const std::string& s) {
  std::size_t b = s.find_first_not_of(' ');
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(' ');
  return s.substr(b, e - b + 1);
}

void criterion_shuffle() {
  std::vector<ShuffleCase> cases;
  Dataset fixture = make_shuffle_fixture(cases);
  check(validate_dataset(fixture).pass(), "generated fixture must validate");

  auto [out, rep] = shuffle_context(fixture, ProbeSeed{31}, default_sentence_splitter(), 4);
  check(rep.seen == 1000, "seen count drifted");
  check(validate_dataset(out).pass(), "shuffled dataset must validate");

  const auto& orig_paras = fixture.articles[0].paragraphs;
  const auto& new_paras = out.articles[0].paragraphs;
  for (std::size_t i = 0; i < orig_paras.size(); ++i) {
    check(chunk_multiset(orig_paras[i]) == chunk_multiset(new_paras[i]),
          "chunk multiset changed for paragraph " + std::to_string(i));
    if (cases[i].single_sentence) {
      check(new_paras[i].context == trim_spaces(orig_paras[i].context),
            "single-sentence context changed beyond joining whitespace");
    }
    for (const auto& qa : new_paras[i].qas) {
      for (const auto& a : qa.answers) {
        std::u32string ctx = utf8_decode(new_paras[i].context);
        check(ctx.find(utf8_decode(a.text)) ==
                  static_cast<std::size_t>(a.answer_start),
              "answer not re-anchored at first occurrence");
      }
    }
  }
}

// --- criterion 5: byte-deterministic pipeline through the binary ---

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) {
    dir = fs::temp_directory_path() / (name + "-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

int run_cli(const fs::path& bin, const fs::path& log_dir, const std::string& args) {
  std::string cmd = bin.string() + " " + args + " > " + (log_dir / "stdout.txt").string() +
                    " 2> " + (log_dir / "stderr.txt").string();
  int rc = std::system(cmd.c_str());
  if (rc == -1 || !WIFEXITED(rc)) return -1;
  return WEXITSTATUS(rc);
}

Dataset make_pipeline_source() {
  Dataset d;
  d.version = "v2.0";
  for (int ai = 0; ai < 3; ++ai) {
    Article art;
    art.title = "article-" + std::to_string(ai);
    for (int pi = 0; pi < 2; ++pi) {
      std::string t = std::to_string(ai * 2 + pi);
      Paragraph p;
      p.context = "Alpha" + t + " bravo" + t + " charlie" + t + " delta" + t + " echo" +
                  t + ". Foxtrot" + t + " golf" + t + " hotel" + t + " india" + t +
                  " juliet" + t + ". Kilo" + t + " lima" + t + " mike" + t +
                  " november" + t + " oscar" + t + ".";
      std::string base = "a" + std::to_string(ai) + "p" + std::to_string(pi) + "q";
      p.qas.push_back(make_qa(base + "0", "Who was the Norse leader of region " + t,
                              {{"bravo" + t, pos_of(p.context, "bravo" + t)}}));
      p.qas.push_back(make_qa(base + "1", "Wasn't the siege of site " + t + " long",
                              {{"golf" + t, pos_of(p.context, "golf" + t)}}));
      QaExample imp =
          make_qa(base + "2", "Did the king never visit place " + t, {}, true);
      imp.plausible_answers = {
          {std::vector<AnswerSpan>{{"lima" + t, pos_of(p.context, "lima" + t)}}}};
      p.qas.push_back(std::move(imp));
      p.qas.push_back(make_qa(base + "3", "Name the first ruler of zone " + t,
                              {{"november" + t, pos_of(p.context, "november" + t)}}));
      p.refresh_key();
      art.paragraphs.push_back(std::move(p));
    }
    d.articles.push_back(std::move(art));
  }
  return d;
}

void criterion_pipeline_determinism(const fs::path& bin) {
  check(!bin.empty(), "qaprobe binary path not supplied as argv[1]");
  check(fs::exists(bin), "qaprobe binary not found at " + bin.string());

  Scratch scratch("qaprobe-acceptance");
  Dataset src = make_pipeline_source();
  fs::path src_path = scratch.dir / "src.json";
  save_dataset(src, src_path);
  std::string src_bytes = read_file(src_path);

  PredictionSet exact, noisy;
  src.for_each_qa([&](const Paragraph&, const QaExample& qa) {
    exact.by_id[qa.id] = qa.is_impossible ? "" : qa.answers.front().text;
    noisy.by_id[qa.id] = qa.is_impossible ? "nothing" : qa.answers.front().text + " extra";
  });
  fs::path preds_path = scratch.dir / "preds.json";
  fs::path preds2_path = scratch.dir / "preds2.json";
  save_predictions(exact, preds_path);
  save_predictions(noisy, preds2_path);

  const std::vector<std::string> outputs = {
      "conv.json", "conv_rep.json", "p1.json", "r1.json",  "p2.json",
      "r2.json",   "p3.json",       "r3.json", "p4.json",  "r4.json",
      "eval.json", "bias.json",     "overlap.json", "agree.json"};

  auto run_pipeline = [&](const std::string& name, int threads) {
    fs::path dir = scratch.dir / name;
    fs::create_directories(dir);
    std::string T = "--threads " + std::to_string(threads) + " ";
    auto step = [&](const std::string& args) {
      int rc = run_cli(bin, dir, T + args);
      check(rc == 0, "command exited " + std::to_string(rc) + ": " + args);
    };
    auto at = [&](const char* f) { return (dir / f).string(); };
    step("convert --from squad --in " + src_path.string() + " --out " + at("conv.json") +
         " --report " + at("conv_rep.json"));
    step("probe --kind random-labels --rate 0.5 --seed 5 --in " + at("conv.json") +
         " --out " + at("p1.json") + " --report " + at("r1.json"));
    step("probe --kind shuffle --seed 5 --in " + at("p1.json") + " --out " +
         at("p2.json") + " --report " + at("r2.json"));
    step("probe --kind filler --seed 5 --in " + at("p2.json") + " --out " +
         at("p3.json") + " --report " + at("r3.json"));
    step("probe --kind negate --in " + at("p3.json") + " --out " + at("p4.json") +
         " --report " + at("r4.json"));
    step("evaluate --dataset " + at("p4.json") + " --predictions " +
         preds_path.string() + " --out " + at("eval.json"));
    step("analyze negation-bias --dataset " + at("p4.json") + " --out " +
         at("bias.json"));
    step("analyze overlap --dataset " + at("p4.json") + " --predictions " +
         preds_path.string() + " --buckets 4 --threshold 0.5 --out " +
         at("overlap.json"));
    step("analyze agreement --dataset " + at("p4.json") + " --predictions " +
         preds_path.string() + " --predictions " + preds2_path.string() +
         " --threshold 0.5 --out " + at("agree.json"));
    std::map<std::string, std::string> bytes;
    for (const auto& f : outputs) bytes[f] = read_file(dir / f);
    return bytes;
  };

  auto reference = run_pipeline("t1a", 1);
  for (const auto& [name, threads] :
       std::vector<std::pair<std::string, int>>{{"t1b", 1}, {"t8a", 8}, {"t8b", 8}}) {
    auto got = run_pipeline(name, threads);
    for (const auto& f : outputs)
      check(got.at(f) == reference.at(f),
            f + " differs between runs t1a and " + name);
  }
  check(read_file(src_path) == src_bytes, "pipeline mutated its input file");
}

// --- criterion 6: negation marker recount ---

Dataset make_bias_fixture() {
  Dataset d;
  d.version = "v2.0";
  Article art;
  art.title = "generated";
  Paragraph p;
  int para_count = 0;
  auto flush = [&] {
    if (p.qas.empty()) return;
    p.context = "Rollo ruled region " + std::to_string(para_count++) + ".";
    for (auto& qa : p.qas)
      if (!qa.is_impossible) qa.answers = {{"Rollo", 0}};
    p.refresh_key();
    art.paragraphs.push_back(std::move(p));
    p = Paragraph{};
  };
  for (int i = 0; i < 500; ++i) {
    std::string q;
    bool impossible = false;
    if (i < 120) {
      q = "Wasn't the duke of region " + std::to_string(i) + " strong";
      impossible = i < 40;
    } else if (i < 200) {
      q = "Did the king never visit site " + std::to_string(i);
      impossible = i < 140;
    } else if (i % 3 == 0) {
      q = "Nevertheless what happened in year " + std::to_string(i);
    } else if (i % 3 == 1) {
      q = "What is entry " + std::to_string(i);
    } else {
      q = "Who led cohort " + std::to_string(i);
    }
    p.qas.push_back(make_qa("bias-" + std::to_string(i), q, {}, impossible));
    if (p.qas.size() == 50) flush();
  }
  flush();
  d.articles.push_back(std::move(art));
  return d;
}

void criterion_negation_bias() {
  Dataset fixture = make_bias_fixture();
  check(fixture.question_count() == 500, "fixture must hold 500 questions");
  BiasReport rep = negation_bias(fixture);

  // Independent recount over lowercased ASCII: "n't" as a substring, "never"
  // as a run of alphanumeric characters.
  std::int64_t nt_count = 0, nt_imp = 0, never_count = 0, never_imp = 0;
  fixture.for_each_qa([&](const Paragraph&, const QaExample& qa) {
    std::string low;
    for (char c : qa.question)
      low += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    if (low.find("n't") != std::string::npos) {
      ++nt_count;
      if (qa.is_impossible) ++nt_imp;
    }
    bool has_never = false;
    std::size_t i = 0;
    auto alnum = [](char c) {
      return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    };
    while (i < low.size()) {
      if (!alnum(low[i])) {
        ++i;
        continue;
      }
      std::size_t b = i;
      while (i < low.size() && alnum(low[i])) ++i;
      if (low.substr(b, i - b) == "never") has_never = true;
    }
    if (has_never) {
      ++never_count;
      if (qa.is_impossible) ++never_imp;
    }
  });
  check(nt_count == 120 && nt_imp == 40, "planted n't counts drifted");
  check(never_count == 80 && never_imp == 20, "planted never counts drifted");

  check(rep.markers.size() == 2, "expected exactly two markers");
  for (const auto& m : rep.markers) {
    std::int64_t want_count = m.marker == "n't" ? nt_count : never_count;
    std::int64_t want_imp = m.marker == "n't" ? nt_imp : never_imp;
    check(m.marker == "n't" || m.marker == "never", "unexpected marker " + m.marker);
    check(m.count == want_count, m.marker + " count disagrees with the recount");
    check(m.impossible == want_imp, m.marker + " impossible disagrees with the recount");
    check(m.fraction ==
              static_cast<double>(want_imp) / static_cast<double>(want_count),
          m.marker + " fraction disagrees with the recount");
  }
}

// --- criterion 7: agreement and overlap conservation ---

struct AgreementFixture {
  Dataset d;
  std::vector<PredictionSet> preds;   // five models
  std::vector<int> ratio_class;      // per question, overlap = class / 4
  std::vector<bool> impossible;      // per question
  std::vector<std::vector<double>> f1;  // [model][question], analytic
};

AgreementFixture make_agreement_fixture() {
  AgreementFixture fx;
  fx.d.version = "v2.0";
  Article art;
  art.title = "generated";
  fx.preds.resize(5);
  fx.f1.assign(5, std::vector<double>(300, 0.0));

  for (int i = 0; i < 300; ++i) {
    std::string tag = std::to_string(i);
    int cls = i % 5;
    bool imp = (i / 5) % 5 == cls;
    fx.ratio_class.push_back(cls);
    fx.impossible.push_back(imp);

    Paragraph p;
    std::vector<std::string> ctx_words = {"filler" + tag + "a", "filler" + tag + "b",
                                          "filler" + tag + "c"};
    std::vector<std::string> gold_words = {"gold" + tag + "a", "gold" + tag + "b",
                                           "gold" + tag + "c", "gold" + tag + "d"};
    p.context = ctx_words[0] + " " + ctx_words[1] + " " + ctx_words[2] + " " +
                gold_words[0] + " " + gold_words[1] + " " + gold_words[2] + " " +
                gold_words[3] + ".";
    std::string gold = gold_words[0] + " " + gold_words[1] + " " + gold_words[2] + " " +
                       gold_words[3];

    // classes 0..4 put 0..4 context words into a 4-token question; the context
    // only holds 3 filler words, so class 4 borrows a gold word.
    std::string question;
    for (int t = 0; t < 4; ++t) {
      if (t) question += " ";
      if (t >= cls)
        question += "nov" + tag + std::to_string(t);
      else
        question += t < 3 ? ctx_words[static_cast<std::size_t>(t)] : gold_words[0];
    }

    std::string id = "ag-" + tag;
    QaExample qa = imp ? make_qa(id, question, {}, true)
                       : make_qa(id, question, {{gold, pos_of(p.context, gold)}});
    p.qas.push_back(std::move(qa));
    p.refresh_key();
    art.paragraphs.push_back(std::move(p));

    for (int m = 0; m < 5; ++m) {
      std::string pred;
      double f1 = 0.0;
      if (imp) {
        if ((i + m) % 3 == 0) {
          pred = "";
          f1 = 1.0;
        } else {
          pred = gold_words[0];
          f1 = 0.0;
        }
      } else {
        int t = (i + 2 * m + 1) % 5;
        for (int w = 0; w < t; ++w) {
          if (w) pred += " ";
          pred += gold_words[w];
        }
        if (t > 0) {
          double precision = 1.0;
          double recall = t / 4.0;
          f1 = 2.0 * precision * recall / (precision + recall);
        }
      }
      fx.preds[m].by_id[id] = pred;
      fx.f1[m][i] = f1;
    }
  }
  fx.d.articles.push_back(std::move(art));
  return fx;
}

void criterion_agreement_overlap() {
  AgreementFixture fx = make_agreement_fixture();
  check(fx.d.question_count() == 300, "fixture must hold 300 questions");
  check(validate_dataset(fx.d).pass(), "generated fixture must validate");

  for (int k : {1, 2, 5}) {
    std::vector<PredictionSet> preds(fx.preds.begin(), fx.preds.begin() + k);
    for (double thr : {0.1, 0.5, 0.9}) {
      AgreementHistogram h = agreement_histogram(fx.d, preds, thr, 3);
      check(h.models == k, "model count drifted");
      check(h.total == 300, "histogram total drifted");
      check(h.counts.size() == static_cast<std::size_t>(k) + 1,
            "histogram size drifted");
      std::int64_t sum = 0;
      for (std::int64_t c : h.counts) sum += c;
      check(sum == 300, "histogram counts do not sum to the question count");

      std::vector<std::int64_t> recount(static_cast<std::size_t>(k) + 1, 0);
      for (int i = 0; i < 300; ++i) {
        std::size_t correct = 0;
        for (int m = 0; m < k; ++m) correct += fx.f1[m][i] >= thr;
        ++recount[correct];
      }
      check(h.counts == recount, "histogram disagrees with the analytic recount");

      OverlapReport rep = overlap_report(fx.d, preds, 4, thr, 3);
      check(rep.buckets == 4 && rep.models == k, "report shape drifted");
      std::vector<std::vector<std::int64_t>> want_ans(
          4, std::vector<std::int64_t>(static_cast<std::size_t>(k) + 1, 0));
      auto want_imp = want_ans;
      for (int i = 0; i < 300; ++i) {
        double ratio = fx.ratio_class[i] / 4.0;
        auto bin = static_cast<std::size_t>(std::min(3.0, std::floor(ratio * 4.0)));
        std::size_t correct = 0;
        for (int m = 0; m < k; ++m) correct += fx.f1[m][i] >= thr;
        ++(fx.impossible[i] ? want_imp : want_ans)[bin][correct];
      }
      std::int64_t ans_total = 0, imp_total = 0;
      for (std::size_t b = 0; b < 4; ++b) {
        check(near(rep.answerable[b].lo, b / 4.0) &&
                  near(rep.answerable[b].hi, (b + 1) / 4.0),
              "bin edges drifted");
        check(rep.answerable[b].by_models_correct == want_ans[b],
              "answerable bin " + std::to_string(b) + " disagrees with the recount");
        check(rep.impossible[b].by_models_correct == want_imp[b],
              "impossible bin " + std::to_string(b) + " disagrees with the recount");
        std::int64_t ans_bin = 0, imp_bin = 0;
        for (std::size_t j = 0; j <= static_cast<std::size_t>(k); ++j) {
          ans_bin += want_ans[b][j];
          imp_bin += want_imp[b][j];
        }
        check(rep.answerable[b].total == ans_bin && rep.impossible[b].total == imp_bin,
              "bin totals disagree with the per-correctness counts");
        ans_total += rep.answerable[b].total;
        imp_total += rep.impossible[b].total;
      }
      check(ans_total == 240 && imp_total == 60,
            "bin populations do not sum to the partition sizes");
    }
  }
}

// --- criterion 8: converter fixtures ---

std::int64_t dropped(const ConversionReport& rep, const char* reason) {
  auto it = rep.dropped.find(reason);
  return it == rep.dropped.end() ? 0 : it->second;
}

void expect_counts(const ConversionReport& rep, std::int64_t read, std::int64_t emitted,
                   const std::map<std::string, std::int64_t>& drops, const char* who) {
  check(rep.read == read, std::string(who) + ": read " + std::to_string(rep.read) +
                              ", wanted " + std::to_string(read));
  check(rep.emitted == emitted, std::string(who) + ": emitted " +
                                    std::to_string(rep.emitted) + ", wanted " +
                                    std::to_string(emitted));
  check(rep.read == rep.emitted + rep.dropped_total(),
        std::string(who) + ": accounting identity broken");
  std::int64_t listed = 0;
  for (const auto& [reason, n] : drops) {
    check(dropped(rep, reason.c_str()) == n,
          std::string(who) + ": dropped[" + reason + "] drifted");
    listed += n;
  }
  check(rep.dropped_total() == listed, std::string(who) + ": unexpected drop reasons");
}

void criterion_converters() {
  {
    ordered_json src = parse_json_text(R"({
      "version": "v2.0",
      "data": [{"title": "T", "paragraphs": [{
        "context": "Rollo ruled Normandy.",
        "qas": [
          {"id": "s1", "question": "Who ruled", "is_impossible": false,
           "answers": [{"text": "Rollo", "answer_start": 0}]},
          {"id": "s2", "question": "Missing", "is_impossible": false,
           "answers": [{"text": "Paris", "answer_start": 0}]}
        ]}]}]
    })");
    auto [out, rep] = convert_squad(src);
    expect_counts(rep, 2, 1, {{kDropNotLocatable, 1}}, "squad");
    check(validate_dataset(out).pass(), "squad output must validate");
    check(out.question_count() == 1, "squad output question count drifted");
  }
  {
    ordered_json src = parse_json_text(R"({
      "Data": [
        {"QuestionId": "t1", "Question": "Who founded Normandy",
         "Answer": {"Value": "Rollo", "Aliases": ["Hrolf"]},
         "EntityPages": [{"Filename": "doc1.txt"}]},
        {"QuestionId": "t2", "Question": "Lost evidence",
         "Answer": {"Value": "Paris"},
         "EntityPages": [{"Filename": "missing.txt"}]}
      ]
    })");
    EvidenceReader reader = [](const std::string& name) -> std::optional<std::string> {
      if (name == "doc1.txt") return "Rollo founded Normandy.";
      return std::nullopt;
    };
    auto [out, rep] = convert_triviaqa(src, reader);
    expect_counts(rep, 2, 1, {{kDropOther, 1}}, "triviaqa");
    check(validate_dataset(out).pass(), "triviaqa output must validate");
    check(out.articles.at(0).paragraphs.at(0).qas.at(0).id == "t1--doc1.txt",
          "triviaqa id scheme drifted");
  }
  {
    const std::string doc =
        "<html> <body> <p> Rollo founded the duchy of Normandy in 911 . </p> "
        "<p> Other text . </p> </body> </html>";
    ordered_json base = parse_json_text(R"({
      "example_id": 0, "question_text": "q", "document_text": "",
      "annotations": [{"long_answer": {}, "short_answers": [],
                        "yes_no_answer": "NONE"}],
      "long_answer_candidates": [{"start_token": 2, "end_token": 13}]
    })");
    auto record = [&](std::int64_t id, const std::string& text, std::int64_t s,
                      std::int64_t e, std::int64_t ci, ordered_json shorts,
                      const char* yes_no) {
      ordered_json r = base;
      r["example_id"] = id;
      r["document_text"] = text;
      r["annotations"][0]["long_answer"] =
          ordered_json{{"start_token", s}, {"end_token", e}, {"candidate_index", ci}};
      r["annotations"][0]["short_answers"] = std::move(shorts);
      r["annotations"][0]["yes_no_answer"] = yes_no;
      return r.dump();
    };
    ordered_json one_short =
        parse_json_text(R"([{"start_token": 3, "end_token": 4}])");
    std::string jsonl =
        record(1, doc, 2, 13, 0, one_short, "NONE") + "\n" +
        record(2, "<table> Rollo 911 </table>", 0, 4, 0, ordered_json::array(),
               "NONE") + "\n" +
        record(3, doc, -1, -1, -1, ordered_json::array(), "NONE") + "\n" +
        record(4, doc, 2, 13, 0, ordered_json::array(), "YES") + "\n";
    auto [out, rep] = convert_nq(jsonl);
    expect_counts(rep, 4, 1,
                  {{kDropNonParagraph, 1}, {kDropNoLongAnswer, 1}, {kDropOther, 1}},
                  "nq");
    check(validate_dataset(out).pass(), "nq output must validate");
    check(out.articles.at(0).paragraphs.at(0).context ==
              "Rollo founded the duchy of Normandy in 911 .",
          "nq context recomposition drifted");
  }
  {
    const std::string raw = "Rollo was a Viking. CANNOTANSWER";
    ordered_json src;
    src["data"] = ordered_json::array();
    ordered_json dlg;
    dlg["title"] = "Rollo";
    dlg["section_title"] = "Life";
    ordered_json para;
    para["context"] = raw;
    para["qas"] = ordered_json::array(
        {ordered_json{{"id", "q1"},
                      {"question", "Who"},
                      {"answers", ordered_json::array({ordered_json{
                                      {"text", "a Viking"}, {"answer_start", 10}}})}},
         ordered_json{{"id", "q2"},
                      {"question", "Unknown"},
                      {"answers", ordered_json::array({ordered_json{
                                      {"text", "CANNOTANSWER"}, {"answer_start", 20}}})}},
         ordered_json{{"id", "q3"},
                      {"question", "Broken"},
                      {"answers", ordered_json::array({ordered_json{
                                      {"text", "XYZ"}, {"answer_start", 0}}})}}});
    dlg["paragraphs"] = ordered_json::array({para});
    src["data"].push_back(dlg);
    auto [out, rep] = convert_quac(src);
    expect_counts(rep, 3, 2, {{kDropNotLocatable, 1}}, "quac");
    check(validate_dataset(out).pass(), "quac output must validate");
    const Paragraph& p = out.articles.at(0).paragraphs.at(0);
    check(p.context == "Rollo was a Viking.", "quac sentinel strip drifted");
    check(!p.qas.at(0).is_impossible && p.qas.at(1).is_impossible,
          "quac sentinel-only turn must be impossible");
  }
  {
    const std::string story = "Rollo led the raid.";
    ordered_json src;
    src["data"] = ordered_json::array();
    ordered_json st;
    st["storyId"] = "sid";
    st["text"] = story;
    st["questions"] = ordered_json::array(
        {ordered_json{{"q", "Who led"}, {"consensus", ordered_json{{"s", 0}, {"e", 5}}}},
         ordered_json{{"q", "Bad"},
                      {"consensus", ordered_json{{"badQuestion", true}}}},
         ordered_json{{"q", "None"}, {"consensus", ordered_json{{"noAnswer", true}}}},
         ordered_json{{"q", "Split"},
                      {"validatedAnswers",
                       ordered_json::array(
                           {ordered_json{{"s", 0}, {"e", 5}, {"count", 1}},
                            ordered_json{{"noAnswer", true}, {"count", 1}}})}}});
    src["data"].push_back(st);
    auto [out, rep] = convert_newsqa(src);
    expect_counts(rep, 4, 2, {{kDropOther, 1}, {kDropNoConsensus, 1}}, "newsqa");
    check(validate_dataset(out).pass(), "newsqa output must validate");
    const Paragraph& p = out.articles.at(0).paragraphs.at(0);
    check(p.qas.at(0).answers == std::vector<AnswerSpan>{{"Rollo", 0}},
          "newsqa consensus span drifted");
    check(p.qas.at(1).is_impossible, "newsqa no-answer consensus must be impossible");
  }
}

// --- criterion 9: baseline shape and first-word routing ---

void criterion_baselines() {
  Dataset d;
  d.version = "v2.0";
  Article art;
  art.title = "t";

  Paragraph p1;
  p1.context = "Rollo Walker visited Paris in 911. The Senate Council met.";
  p1.qas.push_back(make_qa("w1", "Who led the Norsemen", {}, true));
  p1.qas.push_back(make_qa("w2", "When was the siege", {}, true));
  p1.qas.push_back(make_qa("w3", "Where did he go", {}, true));
  p1.qas.push_back(make_qa("w4", "What met there", {}, true));
  p1.qas.push_back(make_qa("w5", "Why did it happen", {}, true));
  p1.qas.push_back(make_qa("w6", "How long was it", {}, true));
  p1.refresh_key();

  Paragraph p2;
  p2.context = "The committee met in 1066.";
  p2.qas.push_back(make_qa("p1", "Who chaired it", {}, true));
  p2.qas.push_back(make_qa("p2", "Who attended it", {}, true));
  p2.refresh_key();

  ordered_json sidecar = ordered_json::object();
  auto span = [&](const std::string& ctx, const char* text, const char* label) {
    return ordered_json{{"text", text}, {"start", pos_of(ctx, text)}, {"label", label}};
  };
  sidecar[p1.paragraph_key] = ordered_json::array(
      {span(p1.context, "Rollo Walker", "PERSON"), span(p1.context, "Paris", "GPE"),
       span(p1.context, "911", "DATE"), span(p1.context, "Senate Council", "ORG")});
  sidecar[p2.paragraph_key] =
      ordered_json::array({span(p2.context, "1066", "DATE")});
  EntityAnnotationSet ents = entities_from_json(sidecar);

  art.paragraphs.push_back(std::move(p1));
  art.paragraphs.push_back(std::move(p2));
  d.articles.push_back(std::move(art));

  PredictionSet fw = first_word_ner_baseline(d, ents);
  check(fw.by_id.size() == 8, "first-word baseline must predict once per question");
  check(fw.at("w1") == "Rollo Walker", "who must route to the first person");
  check(fw.at("w2") == "911", "when must route to the first date");
  check(fw.at("w3") == "Paris", "where must route to the first location");
  check(fw.at("w4") == "Senate Council", "what must route to the first organization");
  check(fw.at("w5").empty(), "why is unmapped and must predict empty");
  check(fw.at("w6").empty(), "how is unmapped and must predict empty");
  check(fw.at("p1").empty() && fw.at("p2").empty(),
        "who without a person entity must predict empty");

  PredictionSet pn = person_ner_baseline(d, ents);
  check(pn.by_id.size() == 8, "person baseline must predict once per question");
  for (const char* id : {"w1", "w2", "w3", "w4", "w5", "w6"})
    check(pn.at(id) == "Rollo Walker", "person baseline must be constant per paragraph");
  check(pn.at("p1").empty() && pn.at("p2").empty(),
        "person baseline must be empty without a person entity");

  PredictionSet fw2 = first_word_ner_baseline(d, ents);
  PredictionSet pn2 = person_ner_baseline(d, ents);
  check(fw2.by_id == fw.by_id && pn2.by_id == pn.by_id,
        "baselines must be deterministic");
}

// --- criterion 10: generalization matrix rendering ---

void criterion_matrix() {
  std::vector<std::string> labels = {"SQuAD", "TriviaQA", "NQ", "QuAC", "NewsQA"};
  std::vector<std::vector<double>> values = {{75.6, 46.7, 48.7, 20.2, 41.1},
                                             {49.8, 58.7, 42.1, 20.4, 10.5},
                                             {53.5, 46.3, 73.5, 21.6, 24.7},
                                             {39.4, 33.1, 33.8, 33.3, 13.8},
                                             {52.1, 38.4, 41.7, 20.4, 60.1}};
  std::vector<std::vector<std::optional<double>>> cells;
  for (const auto& row : values) cells.emplace_back(row.begin(), row.end());

  GeneralizationMatrix m = generalization_matrix(cells, labels);
  std::string want =
      "trained-on\tSQuAD\tTriviaQA\tNQ\tQuAC\tNewsQA\n"
      "SQuAD\t75.6*\t46.7\t48.7\t20.2\t41.1\n"
      "TriviaQA\t49.8\t58.7*\t42.1\t20.4\t10.5\n"
      "NQ\t53.5\t46.3\t73.5*\t21.6\t24.7\n"
      "QuAC\t39.4\t33.1\t33.8\t33.3*\t13.8\n"
      "NewsQA\t52.1\t38.4\t41.7\t20.4\t60.1*\n"
      "* model evaluated on its own dataset\n";
  std::string got = m.render_text();
  check(got == want, "rendered matrix differs from the expected grid:\n" + got);
}

}  // namespace

int main(int argc, char** argv) {
  fs::path bin = argc > 1 ? fs::path(argv[1]) : fs::path();

  run_criterion(1, "evaluation matches the frozen scoring fixture on every field", 5.0,
                criterion_metric_oracle);
  run_criterion(2, "question probes reproduce the pinned reference outputs", 1.0,
                criterion_pinned_probes);
  run_criterion(3, "label corruption alters the exact requested count with valid spans",
                10.0, criterion_label_corruption);
  run_criterion(4, "sentence shuffling preserves chunk multisets and keeps answers anchored",
                10.0, criterion_shuffle);
  run_criterion(5, "command pipeline is byte-deterministic across reruns and thread counts",
                0.0, [&] { criterion_pipeline_determinism(bin); });
  run_criterion(6, "negation marker report matches an independent recount", 0.0,
                criterion_negation_bias);
  run_criterion(7, "agreement and overlap reports conserve counts and match a recount",
                0.0, criterion_agreement_overlap);
  run_criterion(8, "converters emit validated datasets with expected drop accounting",
                0.0, criterion_converters);
  run_criterion(9, "entity baselines predict once per question with first-word routing",
                0.0, criterion_baselines);
  run_criterion(10, "generalization matrix renders the score grid with a starred diagonal",
                0.0, criterion_matrix);

  if (g_failures) {
    std::printf("acceptance: %d criteria failed\n", g_failures);
    return 1;
  }
  std::printf("acceptance: all criteria passed\n");
  return 0;
}
