#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gec {

using Tokens = std::vector<std::string>;

// A typed span correction against a tokenized source sentence. The span is
// the half-open token range [start, end); start == end is an insertion
// before token `start`. An empty replacement deletes the span.
struct Edit {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string error_type;
  std::string replacement;
  int annotator = 0;

  bool is_insertion() const noexcept { return start == end; }
  Tokens replacement_tokens() const;

  friend bool operator==(const Edit&, const Edit&) = default;
};

// True when the two spans cannot both be applied to one sentence: proper
// overlap, two insertions at the same point, or an insertion strictly inside
// the other span. Identical edits count as overlapping here; callers that
// want agreement semantics must deduplicate first.
bool spans_overlap(const Edit& a, const Edit& b) noexcept;

// Orders edits by (start, end); ties keep their relative order.
bool span_less(const Edit& a, const Edit& b) noexcept;

// One M2 block: the S-line and the A-lines attached to it.
struct SentenceAnnotation {
  Tokens source_tokens;
  // Sorted by (annotator, start, end).
  std::vector<Edit> edits;
  // Every annotator id the block declares, including annotators whose only
  // line is a noop. Sorted, unique, never empty after parsing.
  std::vector<int> annotators{0};

  std::vector<Edit> edits_for(int annotator) const;

  // Edits of the lowest declared annotator. System outputs carry a single
  // annotator (normally 0).
  std::vector<Edit> hypothesis_edits() const;

  friend bool operator==(const SentenceAnnotation&, const SentenceAnnotation&) = default;
};

struct CorpusEdits {
  std::string system_id;
  std::vector<SentenceAnnotation> sentences;

  std::size_t size() const noexcept { return sentences.size(); }

  friend bool operator==(const CorpusEdits&, const CorpusEdits&) = default;
};

CorpusEdits parse_m2(std::istream& in, std::string system_id = {});
CorpusEdits parse_m2(std::string_view text, std::string system_id = {});

// Reads a file and labels the corpus with the file stem.
CorpusEdits read_m2_file(const std::filesystem::path& path);

void serialize_m2(const CorpusEdits& corpus, std::ostream& out);
std::string serialize_m2(const CorpusEdits& corpus);

// Splits on single spaces, dropping empty pieces.
Tokens split_tokens(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);

// Applies non-overlapping edits right to left. Throws ContractError when two
// edits overlap (see spans_overlap) or a span exceeds the sentence.
Tokens apply_edits(std::span<const std::string> source, std::span<const Edit> edits);

// Puts edits into canonical order and fills in the annotator list. Used by
// code that builds SentenceAnnotation values directly.
void normalize(SentenceAnnotation& sentence);

}  // namespace gec
