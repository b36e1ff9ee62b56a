#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gec/counting.hpp"
#include "gec/grid.hpp"

namespace gec {

// Binary x[i][j]: system i corrects error type j. A feasible matrix has
// exactly one 1 in every column.
struct SelectionMatrix {
  std::vector<std::string> system_ids;
  ErrorTypeIndex type_index;
  Grid<std::uint8_t> x;

  SelectionMatrix() = default;
  // All zeros; not feasible until every column is assigned.
  SelectionMatrix(std::vector<std::string> systems, ErrorTypeIndex types);

  static SelectionMatrix from_assignment(std::vector<std::string> systems, ErrorTypeIndex types,
                                         std::span<const std::size_t> assignment);
  // Every type assigned to `system`.
  static SelectionMatrix single_system(std::vector<std::string> systems, ErrorTypeIndex types,
                                       std::size_t system);

  std::size_t systems() const noexcept { return system_ids.size(); }
  std::size_t types() const noexcept { return type_index.size(); }

  void assign(std::size_t type, std::size_t system);

  bool feasible() const noexcept;
  // Throws ContractError naming the first violated column.
  void validate() const;

  // Chosen system per type column. Requires a feasible matrix.
  std::vector<std::size_t> assignment() const;

  std::optional<std::size_t> system_index(std::string_view label) const;

  friend bool operator==(const SelectionMatrix&, const SelectionMatrix&) = default;
};

// TP_sum, FP_sum, FN_sum of the counts picked out by x. Throws ContractError
// when the labels or shapes of the two matrices disagree.
Counts counts_for_selection(const CountMatrix& counts, const SelectionMatrix& x);

// {system_ids, types, assignment: {type: system_id}}
nlohmann::json to_json(const SelectionMatrix& selection);
SelectionMatrix selection_from_json(const nlohmann::json& doc);

// Columns: type, chosen_system, tp, fp, fn of the chosen system.
std::string to_tsv(const SelectionMatrix& selection, const CountMatrix& counts);

}  // namespace gec
