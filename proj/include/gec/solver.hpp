#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gec/counting.hpp"
#include "gec/selection.hpp"

namespace gec {

enum class Backend { exhaustive, dinkelbach };

std::string_view to_string(Backend backend) noexcept;
// Throws ContractError for anything but "exhaustive" or "dinkelbach".
Backend parse_backend(std::string_view name);

enum class TieBreak { lowest_system_index };

struct SolverConfig {
  double alpha = 0.5;
  Backend backend = Backend::dinkelbach;
  double dinkelbach_tolerance = 1e-12;
  int max_iterations = 1000;
  TieBreak tie_break = TieBreak::lowest_system_index;
  // Largest M^N the exhaustive backend will enumerate.
  std::uint64_t enumeration_cap = 10'000'000;
  // Adds a pseudo-system that corrects nothing, so a type may be switched
  // off entirely. Off by default; with it on, every column still has
  // exactly one 1, but one of the rows is the abstain row.
  bool allow_abstain = false;

  void validate() const;
};

struct SolveResult {
  SelectionMatrix selection;
  double objective = 0.0;
  int iterations = 0;
  Backend backend_used = Backend::dinkelbach;
  // All counts were zero; the selection is the trivial all-system-0 one.
  bool degenerate = false;
  // Comparisons were done in exact integer arithmetic (rational alpha^2).
  bool exact_arithmetic = false;
  // Dinkelbach parameter after initialisation and after every improving step.
  std::vector<double> lambdas;
};

nlohmann::json to_json(const SolveResult& result);

inline constexpr std::string_view kAbstainSystem = "<abstain>";

// Appends the abstain row: no TP or FP, and every reference edit of the type
// missed (the largest tp + fn of any system in that column).
CountMatrix with_abstain_row(const CountMatrix& counts);

// F_alpha of the counts picked by x. Throws ContractError for an infeasible x.
double f_alpha_objective(const CountMatrix& counts, const SelectionMatrix& x, double alpha);

// Enumerates all M^N assignments in lexicographic order and keeps the first
// maximum. Throws CapacityError above config.enumeration_cap.
SolveResult solve_exhaustive(const CountMatrix& counts, const SolverConfig& config);

// Parametric (Dinkelbach) iteration. For a fixed ratio lambda the problem
// max A(x) - lambda B(x) splits into one argmax per type column, so every
// step is O(M N). Throws NonconvergenceError after max_iterations.
SolveResult solve_dinkelbach(const CountMatrix& counts, const SolverConfig& config);

// Dispatches on config.backend, falling back from exhaustive to dinkelbach
// when the instance is above the enumeration cap. Applies allow_abstain.
SolveResult solve(const CountMatrix& counts, const SolverConfig& config);

}  // namespace gec
