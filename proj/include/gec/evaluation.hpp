#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gec/counting.hpp"
#include "gec/fscore.hpp"
#include "gec/m2.hpp"

namespace gec {

struct TypeScore {
  Counts counts;
  double precision = 1.0;
  double recall = 1.0;
  double f = 1.0;
};

struct SentenceScore {
  std::size_t index = 0;
  Counts counts;
  double f = 1.0;
  // Reference annotator the sentence was scored against.
  int annotator = 0;
};

// Edit-level scores. P and R use the 0/0 -> 1 convention; F is computed from
// them, which matches the count formula whenever any count is nonzero.
struct EvalReport {
  double alpha = 0.5;
  Counts totals;
  double precision = 1.0;
  double recall = 1.0;
  double f_alpha = 1.0;
  std::map<std::string, TypeScore> per_type;
  std::vector<SentenceScore> per_sentence;
};

EvalReport evaluate(const CorpusEdits& hypothesis, const CorpusEdits& reference, double alpha = 0.5,
                    const AnnotatorPolicy& annotators = {});

nlohmann::json to_json(const EvalReport& report);
// Fixed-width TP FP FN Prec Rec F table; per-type rows first when requested.
std::string format_table(const EvalReport& report, bool per_type = false);

// Micro (pooled counts) and macro (mean sentence F) scores of the three
// systems over one subset of test sentences.
struct SubsetComparison {
  std::string label;
  std::size_t sentences = 0;
  double combined_micro = 0.0;
  double a_micro = 0.0;
  double b_micro = 0.0;
  double combined_macro = 0.0;
  double a_macro = 0.0;
  double b_macro = 0.0;
};

struct AnalysisReport {
  double alpha = 0.5;
  std::size_t total = 0;
  // Sentences where system a and b score the same sentence F.
  std::size_t class_same = 0;
  std::size_t class_diff = 0;
  // Same class: combined F >= the shared F of a and b.
  std::size_t improved_or_equal_in_same = 0;
  // Diff class: combined F above the mean of a and b.
  std::size_t improved_in_diff = 0;
  // Diff class: combined F at least the better of a and b.
  std::size_t at_least_best_in_diff = 0;
  // "same", "same/improved_or_equal", "diff", "diff/improved"
  std::vector<SubsetComparison> subsets;
};

AnalysisReport split_half_analysis(const CorpusEdits& system_a, const CorpusEdits& system_b,
                                   const CorpusEdits& reference, const CorpusEdits& combined, double alpha = 0.5,
                                   const AnnotatorPolicy& annotators = {});

nlohmann::json to_json(const AnalysisReport& report);
std::string format_table(const AnalysisReport& report);

enum class SplitMode { first_half_train, even_index_train };

SplitMode parse_split_mode(std::string_view name);

// (train, test). first_half_train puts the first floor(n/2) sentences in
// train; even_index_train trains on even indices. Throws DataError below two
// sentences.
std::pair<CorpusEdits, CorpusEdits> split_corpus(const CorpusEdits& corpus, SplitMode mode);

}  // namespace gec
