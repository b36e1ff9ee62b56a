#include "gec/selection.hpp"

#include <sstream>

#include "gec/errors.hpp"

namespace gec {

SelectionMatrix::SelectionMatrix(std::vector<std::string> systems, ErrorTypeIndex types)
    : system_ids(std::move(systems)), type_index(std::move(types)), x(system_ids.size(), type_index.size(), 0) {}

SelectionMatrix SelectionMatrix::from_assignment(std::vector<std::string> systems, ErrorTypeIndex types,
                                                 std::span<const std::size_t> assignment) {
  SelectionMatrix sel(std::move(systems), std::move(types));
  if (assignment.size() != sel.types()) throw ContractError("assignment length differs from type count");
  for (std::size_t j = 0; j < assignment.size(); ++j) sel.assign(j, assignment[j]);
  return sel;
}

SelectionMatrix SelectionMatrix::single_system(std::vector<std::string> systems, ErrorTypeIndex types,
                                               std::size_t system) {
  SelectionMatrix sel(std::move(systems), std::move(types));
  for (std::size_t j = 0; j < sel.types(); ++j) sel.assign(j, system);
  return sel;
}

void SelectionMatrix::assign(std::size_t type, std::size_t system) {
  if (type >= types() || system >= systems()) throw ContractError("selection index out of range");
  for (std::size_t i = 0; i < systems(); ++i) x(i, type) = i == system ? 1 : 0;
}

bool SelectionMatrix::feasible() const noexcept {
  if (x.rows() != systems() || x.cols() != types()) return false;
  for (std::size_t j = 0; j < types(); ++j) {
    int ones = 0;
    for (std::size_t i = 0; i < systems(); ++i) {
      if (x(i, j) > 1) return false;
      ones += x(i, j);
    }
    if (ones != 1) return false;
  }
  return true;
}

void SelectionMatrix::validate() const {
  if (x.rows() != systems() || x.cols() != types()) throw ContractError("selection grid has the wrong shape");
  for (std::size_t j = 0; j < types(); ++j) {
    int ones = 0;
    for (std::size_t i = 0; i < systems(); ++i) {
      if (x(i, j) > 1) throw ContractError("selection entry is not binary for type '" + type_index[j] + "'");
      ones += x(i, j);
    }
    if (ones != 1) {
      throw ContractError("type '" + type_index[j] + "' is assigned to " + std::to_string(ones) +
                          " systems, expected exactly 1");
    }
  }
}

std::vector<std::size_t> SelectionMatrix::assignment() const {
  validate();
  std::vector<std::size_t> out(types());
  for (std::size_t j = 0; j < types(); ++j) {
    for (std::size_t i = 0; i < systems(); ++i) {
      if (x(i, j)) out[j] = i;
    }
  }
  return out;
}

std::optional<std::size_t> SelectionMatrix::system_index(std::string_view label) const {
  for (std::size_t i = 0; i < system_ids.size(); ++i) {
    if (system_ids[i] == label) return i;
  }
  return std::nullopt;
}

Counts counts_for_selection(const CountMatrix& counts, const SelectionMatrix& x) {
  if (counts.systems() != x.systems() || counts.types() != x.types() || x.x.rows() != x.systems() ||
      x.x.cols() != x.types()) {
    throw ContractError("count matrix is " + std::to_string(counts.systems()) + "x" +
                        std::to_string(counts.types()) + " but selection is " + std::to_string(x.systems()) +
                        "x" + std::to_string(x.types()));
  }
  if (counts.system_ids != x.system_ids || !(counts.type_index == x.type_index)) {
    throw ContractError("count matrix and selection use different labels");
  }
  Counts total;
  for (std::size_t i = 0; i < counts.systems(); ++i) {
    for (std::size_t j = 0; j < counts.types(); ++j) {
      const std::int64_t w = x.x(i, j);
      total.tp += counts.tp(i, j) * w;
      total.fp += counts.fp(i, j) * w;
      total.fn += counts.fn(i, j) * w;
    }
  }
  return total;
}

nlohmann::json to_json(const SelectionMatrix& selection) {
  const auto chosen = selection.assignment();
  nlohmann::json assignment = nlohmann::json::object();
  for (std::size_t j = 0; j < selection.types(); ++j) {
    assignment[selection.type_index[j]] = selection.system_ids[chosen[j]];
  }
  return {{"system_ids", selection.system_ids},
          {"types", selection.type_index.types()},
          {"assignment", std::move(assignment)}};
}

SelectionMatrix selection_from_json(const nlohmann::json& doc) {
  try {
    auto systems = doc.at("system_ids").get<std::vector<std::string>>();
    auto types = doc.at("types").get<std::vector<std::string>>();
    ErrorTypeIndex index(types);
    if (index.types() != types) throw DataError("selection types must be sorted and unique");
    const auto& assignment = doc.at("assignment");
    if (assignment.size() != types.size()) throw DataError("selection assignment does not cover every type");
    SelectionMatrix sel(std::move(systems), std::move(index));
    for (std::size_t j = 0; j < sel.types(); ++j) {
      const auto label = assignment.at(sel.type_index[j]).get<std::string>();
      const auto system = sel.system_index(label);
      if (!system) throw DataError("type '" + sel.type_index[j] + "' assigned to unknown system '" + label + "'");
      sel.assign(j, *system);
    }
    return sel;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed selection: ") + e.what());
  }
}

std::string to_tsv(const SelectionMatrix& selection, const CountMatrix& counts) {
  counts_for_selection(counts, selection);
  const auto chosen = selection.assignment();
  std::ostringstream out;
  out << "type\tchosen_system\ttp\tfp\tfn\n";
  for (std::size_t j = 0; j < selection.types(); ++j) {
    const Counts c = counts.at(chosen[j], j);
    out << selection.type_index[j] << '\t' << selection.system_ids[chosen[j]] << '\t' << c.tp << '\t' << c.fp
        << '\t' << c.fn << '\n';
  }
  return out.str();
}

}  // namespace gec
