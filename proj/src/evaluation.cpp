#include "gec/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <sstream>

#include "gec/errors.hpp"

namespace gec {

namespace {

TypeScore type_score(const Counts& c, double alpha) {
  return {c, precision(c), recall(c), f_score(c, alpha)};
}

std::string fixed(double value, int width, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%*.*f", width, decimals, value);
  return buf;
}

std::string padded(const std::string& text, int width) {
  if (static_cast<int>(text.size()) >= width) return text + ' ';
  return text + std::string(static_cast<std::size_t>(width) - text.size(), ' ');
}

std::string f_label(double alpha) {
  std::ostringstream out;
  out << "F" << alpha;
  return out.str();
}

std::string counts_row(const Counts& c, double p, double r, double f) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%8lld %8lld %8lld ", static_cast<long long>(c.tp), static_cast<long long>(c.fp),
                static_cast<long long>(c.fn));
  return std::string(buf) + fixed(p, 8) + ' ' + fixed(r, 8) + ' ' + fixed(f, 8);
}

SubsetComparison compare_subset(std::string label, const std::vector<std::size_t>& members, const EvalReport& a,
                                const EvalReport& b, const EvalReport& combined, double alpha) {
  SubsetComparison out;
  out.label = std::move(label);
  out.sentences = members.size();
  if (members.empty()) return out;
  Counts ca, cb, cc;
  double fa = 0.0, fb = 0.0, fc = 0.0;
  for (std::size_t s : members) {
    ca += a.per_sentence[s].counts;
    cb += b.per_sentence[s].counts;
    cc += combined.per_sentence[s].counts;
    fa += a.per_sentence[s].f;
    fb += b.per_sentence[s].f;
    fc += combined.per_sentence[s].f;
  }
  const auto n = static_cast<double>(members.size());
  out.a_micro = f_score(ca, alpha);
  out.b_micro = f_score(cb, alpha);
  out.combined_micro = f_score(cc, alpha);
  out.a_macro = fa / n;
  out.b_macro = fb / n;
  out.combined_macro = fc / n;
  return out;
}

nlohmann::json counts_json(const Counts& c) { return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}}; }

}  // namespace

EvalReport evaluate(const CorpusEdits& hypothesis, const CorpusEdits& reference, double alpha,
                    const AnnotatorPolicy& annotators) {
  check_alignment(hypothesis, reference);
  EvalReport report;
  report.alpha = alpha;
  std::map<std::string, Counts> per_type;
  for (std::size_t s = 0; s < reference.size(); ++s) {
    const auto hyp = hypothesis.sentences[s].hypothesis_edits();
    const SentenceMatch sm = match_sentence(hyp, reference.sentences[s], alpha, annotators);
    for (const auto& [h, r] : sm.match.matched) per_type[r.error_type].tp += 1;
    for (const Edit& h : sm.match.unmatched_hypothesis) per_type[h.error_type].fp += 1;
    for (const Edit& r : sm.match.unmatched_reference) per_type[r.error_type].fn += 1;
    const Counts c = sm.match.totals();
    report.totals += c;
    report.per_sentence.push_back({s, c, f_score(c, alpha), sm.annotator});
  }
  for (const auto& [type, c] : per_type) report.per_type.emplace(type, type_score(c, alpha));
  report.precision = precision(report.totals);
  report.recall = recall(report.totals);
  report.f_alpha = f_score(report.totals, alpha);
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json per_type = nlohmann::json::object();
  for (const auto& [type, score] : report.per_type) {
    auto row = counts_json(score.counts);
    row["precision"] = score.precision;
    row["recall"] = score.recall;
    row["f"] = score.f;
    per_type[type] = std::move(row);
  }
  nlohmann::json per_sentence = nlohmann::json::array();
  for (const SentenceScore& s : report.per_sentence) {
    auto row = counts_json(s.counts);
    row["index"] = s.index;
    row["f"] = s.f;
    row["annotator"] = s.annotator;
    per_sentence.push_back(std::move(row));
  }
  auto doc = counts_json(report.totals);
  doc["alpha"] = report.alpha;
  doc["precision"] = report.precision;
  doc["recall"] = report.recall;
  doc["f"] = report.f_alpha;
  doc["per_type"] = std::move(per_type);
  doc["per_sentence"] = std::move(per_sentence);
  return doc;
}

std::string format_table(const EvalReport& report, bool per_type) {
  std::ostringstream out;
  const std::string header = "      TP       FP       FN     Prec      Rec " + padded(f_label(report.alpha), 8);
  if (per_type) {
    out << padded("Category", 14) << header << '\n';
    for (const auto& [type, score] : report.per_type) {
      out << padded(type, 14) << counts_row(score.counts, score.precision, score.recall, score.f) << '\n';
    }
    out << '\n';
  }
  out << header << '\n'
      << counts_row(report.totals, report.precision, report.recall, report.f_alpha) << '\n';
  return out.str();
}

AnalysisReport split_half_analysis(const CorpusEdits& system_a, const CorpusEdits& system_b,
                                   const CorpusEdits& reference, const CorpusEdits& combined, double alpha,
                                   const AnnotatorPolicy& annotators) {
  const EvalReport a = evaluate(system_a, reference, alpha, annotators);
  const EvalReport b = evaluate(system_b, reference, alpha, annotators);
  const EvalReport c = evaluate(combined, reference, alpha, annotators);

  AnalysisReport report;
  report.alpha = alpha;
  report.total = reference.size();
  std::vector<std::size_t> same, same_improved, diff, diff_improved;
  for (std::size_t s = 0; s < reference.size(); ++s) {
    const double fa = a.per_sentence[s].f;
    const double fb = b.per_sentence[s].f;
    const double fc = c.per_sentence[s].f;
    if (fa == fb) {
      same.push_back(s);
      if (fc >= fa) same_improved.push_back(s);
    } else {
      diff.push_back(s);
      if (fc > (fa + fb) / 2.0) diff_improved.push_back(s);
      if (fc >= std::max(fa, fb)) ++report.at_least_best_in_diff;
    }
  }
  report.class_same = same.size();
  report.class_diff = diff.size();
  report.improved_or_equal_in_same = same_improved.size();
  report.improved_in_diff = diff_improved.size();
  report.subsets.push_back(compare_subset("same", same, a, b, c, alpha));
  report.subsets.push_back(compare_subset("same/improved_or_equal", same_improved, a, b, c, alpha));
  report.subsets.push_back(compare_subset("diff", diff, a, b, c, alpha));
  report.subsets.push_back(compare_subset("diff/improved", diff_improved, a, b, c, alpha));
  return report;
}

nlohmann::json to_json(const AnalysisReport& report) {
  nlohmann::json subsets = nlohmann::json::array();
  for (const SubsetComparison& s : report.subsets) {
    const double mean_micro = (s.a_micro + s.b_micro) / 2.0;
    const double mean_macro = (s.a_macro + s.b_macro) / 2.0;
    subsets.push_back({{"label", s.label},
                       {"sentences", s.sentences},
                       {"micro", {{"combined", s.combined_micro}, {"a", s.a_micro}, {"b", s.b_micro}}},
                       {"macro", {{"combined", s.combined_macro}, {"a", s.a_macro}, {"b", s.b_macro}}},
                       {"delta_micro",
                        {{"vs_a", s.combined_micro - s.a_micro},
                         {"vs_b", s.combined_micro - s.b_micro},
                         {"vs_mean", s.combined_micro - mean_micro}}},
                       {"delta_macro",
                        {{"vs_a", s.combined_macro - s.a_macro},
                         {"vs_b", s.combined_macro - s.b_macro},
                         {"vs_mean", s.combined_macro - mean_macro}}}});
  }
  return {{"alpha", report.alpha},
          {"total", report.total},
          {"class_same", report.class_same},
          {"class_diff", report.class_diff},
          {"improved_or_equal_in_same", report.improved_or_equal_in_same},
          {"improved_in_diff", report.improved_in_diff},
          {"at_least_best_in_diff", report.at_least_best_in_diff},
          {"subsets", std::move(subsets)}};
}

std::string format_table(const AnalysisReport& report) {
  std::ostringstream out;
  out << "test sentences              " << report.total << '\n'
      << "same score in a and b       " << report.class_same << "  (combined >= both: "
      << report.improved_or_equal_in_same << ")\n"
      << "different score in a and b  " << report.class_diff << "  (combined > mean: " << report.improved_in_diff
      << ", >= best: " << report.at_least_best_in_diff << ")\n\n";
  out << padded("subset", 24) << padded("n", 7) << "   micro:  comb        a        b   macro:  comb        a        b\n";
  for (const SubsetComparison& s : report.subsets) {
    out << padded(s.label, 24) << padded(std::to_string(s.sentences), 7) << "        " << fixed(s.combined_micro, 6)
        << ' ' << fixed(s.a_micro, 8) << ' ' << fixed(s.b_micro, 8) << "        " << fixed(s.combined_macro, 6) << ' '
        << fixed(s.a_macro, 8) << ' ' << fixed(s.b_macro, 8) << '\n';
  }
  return out.str();
}

SplitMode parse_split_mode(std::string_view name) {
  if (name == "first-half-train") return SplitMode::first_half_train;
  if (name == "even-index-train") return SplitMode::even_index_train;
  throw ContractError("unknown split mode '" + std::string(name) + "'");
}

std::pair<CorpusEdits, CorpusEdits> split_corpus(const CorpusEdits& corpus, SplitMode mode) {
  if (corpus.size() < 2) {
    throw DataError("corpus '" + corpus.system_id + "' has " + std::to_string(corpus.size()) +
                    " sentences; at least 2 are needed to split");
  }
  CorpusEdits train{corpus.system_id, {}};
  CorpusEdits test{corpus.system_id, {}};
  const std::size_t half = corpus.size() / 2;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const bool to_train = mode == SplitMode::first_half_train ? s < half : s % 2 == 0;
    (to_train ? train : test).sentences.push_back(corpus.sentences[s]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace gec
