#include "gec/m2.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "gec/errors.hpp"

namespace gec {

namespace {

constexpr std::string_view kSeparator = "|||";
constexpr std::string_view kNoneReplacement = "-NONE-";
constexpr std::string_view kNoopType = "noop";

std::vector<std::string_view> split_fields(std::string_view text) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = text.find(kSeparator, pos);
    if (next == std::string_view::npos) {
      fields.push_back(text.substr(pos));
      return fields;
    }
    fields.push_back(text.substr(pos, next - pos));
    pos = next + kSeparator.size();
  }
}

bool parse_int(std::string_view text, long& value) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last && !text.empty();
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

bool annotated_less(const Edit& a, const Edit& b) {
  if (a.annotator != b.annotator) return a.annotator < b.annotator;
  return span_less(a, b);
}

class Parser {
 public:
  explicit Parser(std::string system_id) { corpus_.system_id = std::move(system_id); }

  void feed(std::string_view line, std::size_t line_no) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_blank(line)) {
      flush();
      return;
    }
    if (line == "S" || line.starts_with("S ")) {
      flush();
      current_.emplace();
      current_->source_tokens = split_tokens(line.size() > 1 ? line.substr(2) : std::string_view{});
      return;
    }
    if (line.starts_with("A ")) {
      if (!current_) throw ParseError(line_no, "A-line outside of a sentence block");
      parse_annotation(line.substr(2), line_no);
      return;
    }
    throw ParseError(line_no, "expected an S-line, an A-line or a blank line");
  }

  CorpusEdits finish() {
    flush();
    return std::move(corpus_);
  }

 private:
  void parse_annotation(std::string_view body, std::size_t line_no) {
    const auto fields = split_fields(body);
    if (fields.size() != 6) {
      throw ParseError(line_no, "A-line has " + std::to_string(fields.size()) +
                                    " fields, expected 6");
    }
    const std::string_view span = fields[0];
    const std::size_t space = span.find(' ');
    long start = 0;
    long end = 0;
    if (space == std::string_view::npos || !parse_int(span.substr(0, space), start) ||
        !parse_int(span.substr(space + 1), end)) {
      throw ParseError(line_no, "span '" + std::string(span) + "' is not two integers");
    }
    long annotator = 0;
    if (!parse_int(fields[5], annotator) || annotator < 0) {
      throw ParseError(line_no, "annotator id '" + std::string(fields[5]) + "' is not a nonnegative integer");
    }
    seen_annotators_.push_back(static_cast<int>(annotator));

    const std::string_view type = fields[1];
    if (type == kNoopType) {
      if (start != -1 || end != -1) throw ParseError(line_no, "noop annotation must use span -1 -1");
      return;
    }
    if (type.empty()) throw ParseError(line_no, "empty error type");
    if (start < 0 || end < 0) throw ParseError(line_no, "negative span on a non-noop edit");
    if (end < start) throw ParseError(line_no, "span end precedes start");
    const auto token_count = static_cast<long>(current_->source_tokens.size());
    if (end > token_count) {
      throw ParseError(line_no, "span " + std::to_string(start) + " " + std::to_string(end) +
                                    " exceeds sentence length " + std::to_string(token_count));
    }

    Edit edit;
    edit.start = static_cast<std::size_t>(start);
    edit.end = static_cast<std::size_t>(end);
    edit.error_type = std::string(type);
    edit.replacement = fields[2] == kNoneReplacement ? std::string() : join_tokens(split_tokens(fields[2]));
    edit.annotator = static_cast<int>(annotator);
    current_->edits.push_back(std::move(edit));
  }

  void flush() {
    if (!current_) return;
    current_->annotators = std::move(seen_annotators_);
    seen_annotators_.clear();
    normalize(*current_);
    corpus_.sentences.push_back(std::move(*current_));
    current_.reset();
  }

  CorpusEdits corpus_;
  std::optional<SentenceAnnotation> current_;
  std::vector<int> seen_annotators_;
};

}  // namespace

Tokens Edit::replacement_tokens() const { return split_tokens(replacement); }

bool spans_overlap(const Edit& a, const Edit& b) noexcept {
  if (std::max(a.start, b.start) < std::min(a.end, b.end)) return true;
  if (a.is_insertion() && b.is_insertion()) return a.start == b.start;
  if (a.is_insertion()) return b.start < a.start && a.start < b.end;
  if (b.is_insertion()) return a.start < b.start && b.start < a.end;
  return false;
}

bool span_less(const Edit& a, const Edit& b) noexcept {
  if (a.start != b.start) return a.start < b.start;
  return a.end < b.end;
}

std::vector<Edit> SentenceAnnotation::edits_for(int annotator) const {
  std::vector<Edit> out;
  for (const Edit& e : edits) {
    if (e.annotator == annotator) out.push_back(e);
  }
  return out;
}

std::vector<Edit> SentenceAnnotation::hypothesis_edits() const {
  if (annotators.empty()) return edits;
  return edits_for(annotators.front());
}

void normalize(SentenceAnnotation& sentence) {
  std::stable_sort(sentence.edits.begin(), sentence.edits.end(), annotated_less);
  for (const Edit& e : sentence.edits) sentence.annotators.push_back(e.annotator);
  std::sort(sentence.annotators.begin(), sentence.annotators.end());
  sentence.annotators.erase(std::unique(sentence.annotators.begin(), sentence.annotators.end()),
                            sentence.annotators.end());
  if (sentence.annotators.empty()) sentence.annotators.push_back(0);
}

CorpusEdits parse_m2(std::istream& in, std::string system_id) {
  Parser parser(std::move(system_id));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) parser.feed(line, ++line_no);
  return parser.finish();
}

CorpusEdits parse_m2(std::string_view text, std::string system_id) {
  Parser parser(std::move(system_id));
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find('\n', pos);
    if (next == std::string_view::npos) next = text.size();
    parser.feed(text.substr(pos, next - pos), ++line_no);
    pos = next + 1;
  }
  return parser.finish();
}

CorpusEdits read_m2_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return parse_m2(in, path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  }
}

void serialize_m2(const CorpusEdits& corpus, std::ostream& out) {
  bool first = true;
  for (const SentenceAnnotation& sentence : corpus.sentences) {
    if (!first) out << '\n';
    first = false;
    out << "S " << join_tokens(sentence.source_tokens) << '\n';

    std::vector<int> annotators = sentence.annotators;
    for (const Edit& e : sentence.edits) annotators.push_back(e.annotator);
    std::sort(annotators.begin(), annotators.end());
    annotators.erase(std::unique(annotators.begin(), annotators.end()), annotators.end());
    if (annotators.empty()) annotators.push_back(0);

    for (int annotator : annotators) {
      auto edits = sentence.edits_for(annotator);
      if (edits.empty()) {
        out << "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||" << annotator << '\n';
        continue;
      }
      std::stable_sort(edits.begin(), edits.end(), span_less);
      for (const Edit& e : edits) {
        out << "A " << e.start << ' ' << e.end << kSeparator << e.error_type << kSeparator
            << e.replacement << kSeparator << "REQUIRED" << kSeparator << "-NONE-" << kSeparator
            << annotator << '\n';
      }
    }
  }
}

std::string serialize_m2(const CorpusEdits& corpus) {
  std::ostringstream out;
  serialize_m2(corpus, out);
  return out.str();
}

Tokens split_tokens(std::string_view text) {
  Tokens tokens;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find(' ', pos);
    if (next == std::string_view::npos) next = text.size();
    if (next > pos) tokens.emplace_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

Tokens apply_edits(std::span<const std::string> source, std::span<const Edit> edits) {
  std::vector<Edit> ordered(edits.begin(), edits.end());
  std::stable_sort(ordered.begin(), ordered.end(), span_less);
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i].end < ordered[i].start || ordered[i].end > source.size()) {
      throw ContractError("edit span exceeds the source sentence");
    }
    for (std::size_t k = i + 1; k < ordered.size() && ordered[k].start <= ordered[i].end; ++k) {
      if (spans_overlap(ordered[i], ordered[k])) {
        throw ContractError("overlapping edits at tokens " + std::to_string(ordered[i].start) + "-" +
                            std::to_string(ordered[i].end) + " and " + std::to_string(ordered[k].start) +
                            "-" + std::to_string(ordered[k].end));
      }
    }
  }

  Tokens tokens(source.begin(), source.end());
  for (auto it = ordered.rbegin(); it != ordered.rend(); ++it) {
    const auto first = tokens.begin() + static_cast<std::ptrdiff_t>(it->start);
    const auto pos = tokens.erase(first, tokens.begin() + static_cast<std::ptrdiff_t>(it->end));
    const Tokens replacement = it->replacement_tokens();
    tokens.insert(pos, replacement.begin(), replacement.end());
  }
  return tokens;
}

}  // namespace gec
