#include "gec/combiner.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <tuple>

#include "gec/counting.hpp"
#include "gec/errors.hpp"
#include "gec/solver.hpp"

namespace gec {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

bool same_edit(const Edit& a, const Edit& b) {
  return a.start == b.start && a.end == b.end && a.error_type == b.error_type && a.replacement == b.replacement;
}

auto candidate_key(const CandidateEdit& c) {
  return std::tie(c.edit.start, c.edit.end, c.source_system, c.edit.error_type, c.edit.replacement);
}

auto lowest_system_key(const CandidateEdit& c) {
  return std::tie(c.source_system, c.edit.start, c.edit.end, c.edit.error_type, c.edit.replacement);
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::string_view to_string(ConflictMode mode) noexcept {
  switch (mode) {
    case ConflictMode::random:
      return "random";
    case ConflictMode::lowest_system_index:
      return "lowest";
    case ConflictMode::skip_all:
      return "skip";
  }
  return "random";
}

ConflictMode parse_conflict_mode(std::string_view name) {
  if (name == "random") return ConflictMode::random;
  if (name == "lowest" || name == "lowest_system_index") return ConflictMode::lowest_system_index;
  if (name == "skip" || name == "skip_all") return ConflictMode::skip_all;
  throw ContractError("unknown conflict mode '" + std::string(name) + "'");
}

CandidateSet select_candidates(std::span<const CorpusEdits> hypotheses, const SelectionMatrix& selection,
                               UnknownTypePolicy unknown) {
  selection.validate();
  CandidateSet out;
  if (hypotheses.empty()) return out;

  std::vector<std::size_t> rows;
  std::vector<bool> present(selection.systems(), false);
  for (const CorpusEdits& hyp : hypotheses) {
    check_alignment(hyp, hypotheses.front());
    const auto row = selection.system_index(hyp.system_id);
    if (!row) throw DataError("system '" + hyp.system_id + "' does not appear in the selection");
    if (present[*row]) throw DataError("system '" + hyp.system_id + "' given twice");
    present[*row] = true;
    rows.push_back(*row);
  }
  const auto assignment = selection.assignment();
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    const std::string& label = selection.system_ids[assignment[j]];
    if (!present[assignment[j]] && label != kAbstainSystem) {
      throw DataError("selection assigns type '" + selection.type_index[j] + "' to system '" + label +
                      "', which was not provided");
    }
  }

  out.sentences.resize(hypotheses.front().size());
  for (std::size_t k = 0; k < hypotheses.size(); ++k) {
    const std::size_t row = rows[k];
    for (std::size_t s = 0; s < hypotheses[k].size(); ++s) {
      for (const Edit& e : hypotheses[k].sentences[s].hypothesis_edits()) {
        const auto column = selection.type_index.find(e.error_type);
        if (!column) {
          if (unknown == UnknownTypePolicy::error) {
            throw DataError("sentence " + std::to_string(s) + " of '" + hypotheses[k].system_id +
                            "' uses error type '" + e.error_type + "' absent from the selection");
          }
          ++out.unknown_type_dropped;
          continue;
        }
        if (selection.x(row, *column) == 1) out.sentences[s].push_back({e, row});
      }
    }
  }
  return out;
}

bool edits_conflict(const Edit& a, const Edit& b) noexcept {
  if (same_edit(a, b)) return false;
  return spans_overlap(a, b);
}

Resolution resolve_conflicts(std::span<const CandidateEdit> candidates, const ConflictPolicy& policy,
                             std::uint64_t sentence_index) {
  Resolution out;
  std::vector<CandidateEdit> pool(candidates.begin(), candidates.end());
  std::sort(pool.begin(), pool.end(),
            [](const CandidateEdit& a, const CandidateEdit& b) { return candidate_key(a) < candidate_key(b); });

  // Agreement between systems is not a conflict: keep the lowest-system copy.
  std::vector<CandidateEdit> unique;
  for (CandidateEdit& c : pool) {
    auto dup = std::find_if(unique.begin(), unique.end(),
                            [&](const CandidateEdit& u) { return same_edit(u.edit, c.edit); });
    if (dup == unique.end()) {
      unique.push_back(std::move(c));
    } else {
      ++out.merged_duplicates;
      if (c.source_system < dup->source_system) *dup = std::move(c);
    }
  }

  DisjointSets sets(unique.size());
  for (std::size_t a = 0; a < unique.size(); ++a) {
    for (std::size_t b = a + 1; b < unique.size(); ++b) {
      if (edits_conflict(unique[a].edit, unique[b].edit)) sets.unite(a, b);
    }
  }
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> cluster_of(unique.size(), SIZE_MAX);
  for (std::size_t a = 0; a < unique.size(); ++a) {
    const std::size_t root = sets.find(a);
    if (cluster_of[root] == SIZE_MAX) {
      cluster_of[root] = clusters.size();
      clusters.emplace_back();
    }
    clusters[cluster_of[root]].push_back(a);
  }

  std::mt19937_64 rng(splitmix64(policy.seed ^ splitmix64(sentence_index)));
  for (const auto& members : clusters) {
    if (members.size() == 1) {
      out.edits.push_back(unique[members.front()].edit);
      continue;
    }
    ++out.clusters;
    std::size_t keep = members.front();
    switch (policy.mode) {
      case ConflictMode::random: {
        std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
        keep = members[pick(rng)];
        break;
      }
      case ConflictMode::lowest_system_index:
        for (std::size_t m : members) {
          if (lowest_system_key(unique[m]) < lowest_system_key(unique[keep])) keep = m;
        }
        break;
      case ConflictMode::skip_all:
        out.discarded += members.size();
        continue;
    }
    out.discarded += members.size() - 1;
    out.edits.push_back(unique[keep].edit);
  }

  for (Edit& e : out.edits) e.annotator = 0;
  std::stable_sort(out.edits.begin(), out.edits.end(), span_less);
  return out;
}

CombineResult combine_corpus(std::span<const CorpusEdits> hypotheses, const SelectionMatrix& selection,
                             const ConflictPolicy& policy, UnknownTypePolicy unknown) {
  CandidateSet candidates = select_candidates(hypotheses, selection, unknown);
  CombineResult out;
  out.combined.system_id = "combined";
  out.stats.unknown_type_dropped = candidates.unknown_type_dropped;
  if (hypotheses.empty()) return out;

  const CorpusEdits& base = hypotheses.front();
  out.stats.sentences = base.size();
  for (std::size_t s = 0; s < base.size(); ++s) {
    out.stats.candidates += candidates.sentences[s].size();
    Resolution resolved = resolve_conflicts(candidates.sentences[s], policy, s);
    out.stats.merged_duplicates += resolved.merged_duplicates;
    out.stats.conflict_clusters += resolved.clusters;
    out.stats.discarded += resolved.discarded;

    const Tokens& source = base.sentences[s].source_tokens;
    out.corrected.push_back(apply_edits(source, resolved.edits));
    SentenceAnnotation sentence;
    sentence.source_tokens = source;
    sentence.edits = std::move(resolved.edits);
    normalize(sentence);
    out.combined.sentences.push_back(std::move(sentence));
  }
  return out;
}

}  // namespace gec
