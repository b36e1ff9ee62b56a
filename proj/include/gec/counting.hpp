#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gec/fscore.hpp"
#include "gec/grid.hpp"
#include "gec/m2.hpp"

namespace gec {

// Sorted, de-duplicated error-type labels; the position of a label is its
// column in every count and selection matrix.
class ErrorTypeIndex {
 public:
  ErrorTypeIndex() = default;
  explicit ErrorTypeIndex(std::vector<std::string> types);

  std::size_t size() const noexcept { return types_.size(); }
  const std::vector<std::string>& types() const noexcept { return types_; }
  const std::string& operator[](std::size_t column) const { return types_[column]; }

  std::optional<std::size_t> find(std::string_view type) const;
  // Throws DataError for labels outside the index.
  std::size_t at(std::string_view type) const;

  friend bool operator==(const ErrorTypeIndex& a, const ErrorTypeIndex& b) { return a.types_ == b.types_; }

 private:
  std::vector<std::string> types_;
  std::map<std::string, std::size_t, std::less<>> lookup_;
};

struct CountMatrix {
  std::vector<std::string> system_ids;
  ErrorTypeIndex type_index;
  Grid<std::int64_t> tp;
  Grid<std::int64_t> fp;
  Grid<std::int64_t> fn;

  CountMatrix() = default;
  CountMatrix(std::vector<std::string> systems, ErrorTypeIndex types);

  std::size_t systems() const noexcept { return system_ids.size(); }
  std::size_t types() const noexcept { return type_index.size(); }

  Counts at(std::size_t system, std::size_t type) const {
    return {tp(system, type), fp(system, type), fn(system, type)};
  }
  void add(std::size_t system, std::size_t type, const Counts& c);

  // Sum over all types for one system, i.e. that system's corpus counts.
  Counts row_total(std::size_t system) const;

  // Throws ContractError on inconsistent shapes or negative entries.
  void validate() const;

  friend bool operator==(const CountMatrix&, const CountMatrix&) = default;
};

// JSON document {system_ids, types, tp, fp, fn}; grids are arrays of rows.
nlohmann::json to_json(const CountMatrix& counts);
CountMatrix count_matrix_from_json(const nlohmann::json& doc);
// Header "system\ttype\ttp\tfp\tfn", one row per (system, type).
std::string to_tsv(const CountMatrix& counts);

struct MatchResult {
  // (hypothesis edit, reference edit)
  std::vector<std::pair<Edit, Edit>> matched;
  std::vector<Edit> unmatched_hypothesis;
  std::vector<Edit> unmatched_reference;

  Counts totals() const {
    return {static_cast<std::int64_t>(matched.size()), static_cast<std::int64_t>(unmatched_hypothesis.size()),
            static_cast<std::int64_t>(unmatched_reference.size())};
  }
};

// One-to-one matching on (start, end, replacement). Error types are ignored
// for the match itself; a true positive belongs to the reference edit's
// type, a false positive to the hypothesis edit's type.
MatchResult match_edits(std::span<const Edit> hypothesis, std::span<const Edit> reference);

struct AnnotatorPolicy {
  enum class Mode { best, fixed };
  Mode mode = Mode::best;
  int fixed_annotator = 0;

  static AnnotatorPolicy best() { return {}; }
  static AnnotatorPolicy fixed(int id) { return {Mode::fixed, id}; }
};

struct SentenceMatch {
  int annotator = 0;
  MatchResult match;
};

// Matches a hypothesis against one reference block. Under the best policy
// every annotator is tried and the one giving the highest sentence F wins,
// ties to the lowest id.
SentenceMatch match_sentence(std::span<const Edit> hypothesis, const SentenceAnnotation& reference,
                             double alpha, const AnnotatorPolicy& policy);

struct CountOptions {
  double alpha = 0.5;
  AnnotatorPolicy annotators;
};

// Throws AlignmentError unless both corpora have the same length and the
// same source tokens at every index.
void check_alignment(const CorpusEdits& a, const CorpusEdits& b);

CountMatrix build_count_matrix(std::span<const CorpusEdits> hypotheses, const CorpusEdits& reference,
                               const CountOptions& options = {});

}  // namespace gec
