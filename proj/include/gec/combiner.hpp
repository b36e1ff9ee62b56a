#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gec/m2.hpp"
#include "gec/selection.hpp"

namespace gec {

struct CandidateEdit {
  Edit edit;
  // Row of the selection matrix the edit came from.
  std::size_t source_system = 0;

  friend bool operator==(const CandidateEdit&, const CandidateEdit&) = default;
};

enum class ConflictMode { random, lowest_system_index, skip_all };

std::string_view to_string(ConflictMode mode) noexcept;
// Accepts random, lowest, lowest_system_index, skip, skip_all.
ConflictMode parse_conflict_mode(std::string_view name);

struct ConflictPolicy {
  ConflictMode mode = ConflictMode::random;
  std::uint64_t seed = 0;
};

// What to do with a hypothesis edit whose type the selection never saw.
enum class UnknownTypePolicy { drop, error };

struct CandidateSet {
  std::vector<std::vector<CandidateEdit>> sentences;
  std::size_t unknown_type_dropped = 0;
};

// Keeps the hypothesis edits whose (system, type) cell is 1. Hypotheses are
// matched to selection rows by system label, so file order does not matter.
CandidateSet select_candidates(std::span<const CorpusEdits> hypotheses, const SelectionMatrix& selection,
                               UnknownTypePolicy unknown = UnknownTypePolicy::drop);

// Span conflict between edits of one sentence. Identical edits (same span,
// type and replacement) do not conflict; they are merged instead.
bool edits_conflict(const Edit& a, const Edit& b) noexcept;

struct Resolution {
  // Sorted by span and pairwise non-overlapping.
  std::vector<Edit> edits;
  std::size_t merged_duplicates = 0;
  std::size_t clusters = 0;
  std::size_t discarded = 0;
};

// Merges duplicates, groups the rest into conflict clusters (transitive
// closure of edits_conflict) and keeps one edit per cluster. In random mode
// the generator is seeded from (policy.seed, sentence_index), so sentences
// can be resolved in any order with the same outcome.
Resolution resolve_conflicts(std::span<const CandidateEdit> candidates, const ConflictPolicy& policy,
                             std::uint64_t sentence_index = 0);

struct CombineStats {
  std::size_t sentences = 0;
  std::size_t candidates = 0;
  std::size_t merged_duplicates = 0;
  std::size_t conflict_clusters = 0;
  std::size_t discarded = 0;
  std::size_t unknown_type_dropped = 0;
};

struct CombineResult {
  CorpusEdits combined;
  std::vector<Tokens> corrected;
  CombineStats stats;
};

CombineResult combine_corpus(std::span<const CorpusEdits> hypotheses, const SelectionMatrix& selection,
                             const ConflictPolicy& policy, UnknownTypePolicy unknown = UnknownTypePolicy::drop);

}  // namespace gec
