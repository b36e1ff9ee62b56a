#include "gec/counting.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "gec/errors.hpp"

namespace gec {

ErrorTypeIndex::ErrorTypeIndex(std::vector<std::string> types) : types_(std::move(types)) {
  std::sort(types_.begin(), types_.end());
  types_.erase(std::unique(types_.begin(), types_.end()), types_.end());
  for (std::size_t j = 0; j < types_.size(); ++j) lookup_.emplace(types_[j], j);
}

std::optional<std::size_t> ErrorTypeIndex::find(std::string_view type) const {
  auto it = lookup_.find(type);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t ErrorTypeIndex::at(std::string_view type) const {
  if (auto j = find(type)) return *j;
  throw DataError("unknown error type '" + std::string(type) + "'");
}

CountMatrix::CountMatrix(std::vector<std::string> systems, ErrorTypeIndex types)
    : system_ids(std::move(systems)),
      type_index(std::move(types)),
      tp(system_ids.size(), type_index.size()),
      fp(system_ids.size(), type_index.size()),
      fn(system_ids.size(), type_index.size()) {}

void CountMatrix::add(std::size_t system, std::size_t type, const Counts& c) {
  tp(system, type) += c.tp;
  fp(system, type) += c.fp;
  fn(system, type) += c.fn;
}

Counts CountMatrix::row_total(std::size_t system) const {
  Counts total;
  for (std::size_t j = 0; j < types(); ++j) total += at(system, j);
  return total;
}

void CountMatrix::validate() const {
  const std::size_t m = systems();
  const std::size_t n = types();
  if (m == 0) throw ContractError("count matrix needs at least one system");
  for (const Grid<std::int64_t>* g : {&tp, &fp, &fn}) {
    if (g->rows() != m || g->cols() != n) throw ContractError("count grids disagree in shape");
    for (std::int64_t v : g->data()) {
      if (v < 0) throw ContractError("negative count");
    }
  }
}

nlohmann::json to_json(const CountMatrix& counts) {
  auto grid = [&](const Grid<std::int64_t>& g) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < g.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < g.cols(); ++j) row.push_back(g(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  return {{"system_ids", counts.system_ids},
          {"types", counts.type_index.types()},
          {"tp", grid(counts.tp)},
          {"fp", grid(counts.fp)},
          {"fn", grid(counts.fn)}};
}

CountMatrix count_matrix_from_json(const nlohmann::json& doc) {
  try {
    auto types = doc.at("types").get<std::vector<std::string>>();
    ErrorTypeIndex index(types);
    if (index.types() != types) throw DataError("count matrix types must be sorted and unique");
    CountMatrix counts(doc.at("system_ids").get<std::vector<std::string>>(), std::move(index));
    auto fill = [&](const char* key, Grid<std::int64_t>& g) {
      const auto rows = doc.at(key).get<std::vector<std::vector<std::int64_t>>>();
      if (rows.size() != g.rows()) throw DataError(std::string("wrong row count in '") + key + "'");
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != g.cols()) throw DataError(std::string("wrong column count in '") + key + "'");
        for (std::size_t j = 0; j < rows[i].size(); ++j) g(i, j) = rows[i][j];
      }
    };
    fill("tp", counts.tp);
    fill("fp", counts.fp);
    fill("fn", counts.fn);
    counts.validate();
    return counts;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed count matrix: ") + e.what());
  } catch (const ContractError& e) {
    throw DataError(std::string("malformed count matrix: ") + e.what());
  }
}

std::string to_tsv(const CountMatrix& counts) {
  std::ostringstream out;
  out << "system\ttype\ttp\tfp\tfn\n";
  for (std::size_t i = 0; i < counts.systems(); ++i) {
    for (std::size_t j = 0; j < counts.types(); ++j) {
      out << counts.system_ids[i] << '\t' << counts.type_index[j] << '\t' << counts.tp(i, j) << '\t'
          << counts.fp(i, j) << '\t' << counts.fn(i, j) << '\n';
    }
  }
  return out.str();
}

MatchResult match_edits(std::span<const Edit> hypothesis, std::span<const Edit> reference) {
  MatchResult result;
  std::vector<bool> used(reference.size(), false);
  for (const Edit& h : hypothesis) {
    bool found = false;
    for (std::size_t k = 0; k < reference.size(); ++k) {
      const Edit& r = reference[k];
      if (!used[k] && r.start == h.start && r.end == h.end && r.replacement == h.replacement) {
        used[k] = true;
        result.matched.emplace_back(h, r);
        found = true;
        break;
      }
    }
    if (!found) result.unmatched_hypothesis.push_back(h);
  }
  for (std::size_t k = 0; k < reference.size(); ++k) {
    if (!used[k]) result.unmatched_reference.push_back(reference[k]);
  }
  return result;
}

SentenceMatch match_sentence(std::span<const Edit> hypothesis, const SentenceAnnotation& reference,
                             double alpha, const AnnotatorPolicy& policy) {
  if (policy.mode == AnnotatorPolicy::Mode::fixed) {
    const auto ref = reference.edits_for(policy.fixed_annotator);
    return {policy.fixed_annotator, match_edits(hypothesis, ref)};
  }
  std::optional<SentenceMatch> best;
  double best_f = -1.0;
  for (int annotator : reference.annotators) {
    const auto ref = reference.edits_for(annotator);
    MatchResult match = match_edits(hypothesis, ref);
    const double f = f_score(match.totals(), alpha);
    if (!best || f > best_f) {
      best_f = f;
      best = SentenceMatch{annotator, std::move(match)};
    }
  }
  if (!best) return {0, match_edits(hypothesis, {})};
  return std::move(*best);
}

void check_alignment(const CorpusEdits& a, const CorpusEdits& b) {
  if (a.size() != b.size()) {
    throw AlignmentError("corpus '" + a.system_id + "' has " + std::to_string(a.size()) + " sentences but '" +
                         b.system_id + "' has " + std::to_string(b.size()));
  }
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (a.sentences[s].source_tokens != b.sentences[s].source_tokens) {
      throw AlignmentError("sentence " + std::to_string(s) + " differs between '" + a.system_id + "' and '" +
                           b.system_id + "': \"" + join_tokens(a.sentences[s].source_tokens) + "\"");
    }
  }
}

CountMatrix build_count_matrix(std::span<const CorpusEdits> hypotheses, const CorpusEdits& reference,
                               const CountOptions& options) {
  if (hypotheses.empty()) throw ContractError("build_count_matrix needs at least one system");

  std::vector<std::string> labels;
  std::set<std::string> seen_labels;
  std::vector<std::string> types;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    check_alignment(hypotheses[i], reference);
    std::string label = hypotheses[i].system_id.empty() ? "system_" + std::to_string(i) : hypotheses[i].system_id;
    if (!seen_labels.insert(label).second) throw DataError("duplicate system label '" + label + "'");
    labels.push_back(std::move(label));
    for (const auto& sentence : hypotheses[i].sentences) {
      for (const Edit& e : sentence.edits) types.push_back(e.error_type);
    }
  }
  for (const auto& sentence : reference.sentences) {
    for (const Edit& e : sentence.edits) types.push_back(e.error_type);
  }

  CountMatrix counts(std::move(labels), ErrorTypeIndex(std::move(types)));
  const ErrorTypeIndex& index = counts.type_index;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    for (std::size_t s = 0; s < reference.size(); ++s) {
      const auto hyp = hypotheses[i].sentences[s].hypothesis_edits();
      const SentenceMatch sm = match_sentence(hyp, reference.sentences[s], options.alpha, options.annotators);
      for (const auto& [h, r] : sm.match.matched) counts.tp(i, index.at(r.error_type)) += 1;
      for (const Edit& h : sm.match.unmatched_hypothesis) counts.fp(i, index.at(h.error_type)) += 1;
      for (const Edit& r : sm.match.unmatched_reference) counts.fn(i, index.at(r.error_type)) += 1;
    }
  }
  return counts;
}

}  // namespace gec
