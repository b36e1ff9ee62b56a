#include "gec/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "gec/errors.hpp"

namespace gec {

namespace {

using Wide = __int128;

// A(x) = w_tp TP, B(x) = w_tp TP + w_fp FP + w_fn FN, so F = A / B. When
// alpha is a small-denominator rational the weights are scaled to integers
// and every comparison below is exact.
template <class Num>
struct Problem {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<Num> a;
  std::vector<Num> b;

  Num numer(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  Num denom(std::size_t i, std::size_t j) const { return b[i * n + j]; }

  bool all_zero() const {
    return std::all_of(b.begin(), b.end(), [](Num v) { return v == Num(0); });
  }
};

template <class Num>
struct Ratio {
  Num num;
  Num den;
};

template <class Num>
Ratio<Num> make_ratio(Num num, Num den) {
  if (den == Num(0)) return {Num(0), Num(1)};
  return {num, den};
}

bool greater(const Ratio<Wide>& x, const Ratio<Wide>& y) { return x.num * y.den > y.num * x.den; }
bool greater(const Ratio<double>& x, const Ratio<double>& y) { return x.num / x.den > y.num / y.den; }

double to_double(const Ratio<Wide>& r) { return static_cast<double>(r.num) / static_cast<double>(r.den); }
double to_double(const Ratio<double>& r) { return r.num / r.den; }

std::optional<std::int64_t> small_denominator(double value, std::int64_t max_den) {
  for (std::int64_t q = 1; q <= max_den; ++q) {
    const double p = std::round(value * static_cast<double>(q));
    if (p / static_cast<double>(q) == value) return q;
  }
  return std::nullopt;
}

struct IntegerWeights {
  std::int64_t tp;
  std::int64_t fp;
  std::int64_t fn;
};

std::optional<IntegerWeights> integer_weights(const CountMatrix& counts, double alpha) {
  constexpr std::int64_t kMaxDenominator = 1000;
  std::optional<IntegerWeights> w;
  if (auto q = small_denominator(alpha, kMaxDenominator)) {
    const auto p = static_cast<std::int64_t>(std::llround(alpha * static_cast<double>(*q)));
    w = IntegerWeights{*q * *q + p * p, *q * *q, p * p};
  } else if (auto q2 = small_denominator(alpha * alpha, kMaxDenominator)) {
    const auto p2 = static_cast<std::int64_t>(std::llround(alpha * alpha * static_cast<double>(*q2)));
    w = IntegerWeights{*q2 + p2, *q2, p2};
  }
  if (!w) return std::nullopt;

  // A and B are sums of weighted counts and get multiplied pairwise; keep
  // them below 2^60 so the 128-bit products cannot overflow.
  long double total = 0;
  for (const auto* g : {&counts.tp, &counts.fp, &counts.fn}) {
    for (std::int64_t v : g->data()) total += static_cast<long double>(v);
  }
  if (total * static_cast<long double>(std::max({w->tp, w->fp, w->fn})) > std::ldexp(1.0L, 60)) {
    return std::nullopt;
  }
  return w;
}

Problem<Wide> exact_problem(const CountMatrix& counts, const IntegerWeights& w) {
  Problem<Wide> p{counts.systems(), counts.types(), {}, {}};
  for (std::size_t i = 0; i < p.m; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) {
      const Wide a = static_cast<Wide>(w.tp) * counts.tp(i, j);
      p.a.push_back(a);
      p.b.push_back(a + static_cast<Wide>(w.fp) * counts.fp(i, j) + static_cast<Wide>(w.fn) * counts.fn(i, j));
    }
  }
  return p;
}

Problem<double> float_problem(const CountMatrix& counts, double alpha) {
  const double a2 = alpha * alpha;
  Problem<double> p{counts.systems(), counts.types(), {}, {}};
  for (std::size_t i = 0; i < p.m; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) {
      const double a = (1.0 + a2) * static_cast<double>(counts.tp(i, j));
      p.a.push_back(a);
      p.b.push_back(a + static_cast<double>(counts.fp(i, j)) + a2 * static_cast<double>(counts.fn(i, j)));
    }
  }
  return p;
}

template <class Num>
Ratio<Num> ratio_of(const Problem<Num>& p, const std::vector<std::size_t>& assignment) {
  Num a(0);
  Num b(0);
  for (std::size_t j = 0; j < p.n; ++j) {
    a += p.numer(assignment[j], j);
    b += p.denom(assignment[j], j);
  }
  return make_ratio(a, b);
}

template <class Num>
std::vector<std::size_t> enumerate_best(const Problem<Num>& p) {
  std::vector<std::size_t> current(p.n, 0);
  std::vector<std::size_t> best = current;
  Num a(0);
  Num b(0);
  for (std::size_t j = 0; j < p.n; ++j) {
    a += p.numer(0, j);
    b += p.denom(0, j);
  }
  Ratio<Num> best_ratio = make_ratio(a, b);

  // Odometer over columns, last column fastest: lexicographic order, so the
  // first maximum seen is the lexicographically smallest one.
  for (;;) {
    std::size_t j = p.n;
    while (j > 0) {
      --j;
      a -= p.numer(current[j], j);
      b -= p.denom(current[j], j);
      if (++current[j] < p.m) {
        a += p.numer(current[j], j);
        b += p.denom(current[j], j);
        break;
      }
      current[j] = 0;
      a += p.numer(0, j);
      b += p.denom(0, j);
      if (j == 0) return best;
    }
    if (p.n == 0) return best;
    const Ratio<Num> r = make_ratio(a, b);
    if (greater(r, best_ratio)) {
      best_ratio = r;
      best = current;
    }
  }
}

template <class Num>
struct ParametricStep {
  std::vector<std::size_t> assignment;
  Num value;
};

// argmax_x lambda.den * A(x) - lambda.num * B(x), column by column, ties to
// the lowest system index.
template <class Num>
ParametricStep<Num> parametric_argmax(const Problem<Num>& p, const Ratio<Num>& lambda) {
  ParametricStep<Num> step{std::vector<std::size_t>(p.n, 0), Num(0)};
  for (std::size_t j = 0; j < p.n; ++j) {
    Num best = lambda.den * p.numer(0, j) - lambda.num * p.denom(0, j);
    for (std::size_t i = 1; i < p.m; ++i) {
      const Num term = lambda.den * p.numer(i, j) - lambda.num * p.denom(i, j);
      if (term > best) {
        best = term;
        step.assignment[j] = i;
      }
    }
    step.value += best;
  }
  return step;
}

// At the optimum every column of an optimal assignment attains its
// parametric maximum, so lowest-index argmaxes give the lexicographically
// smallest optimum, unless every chosen cell is empty (B = 0, F = 0). Then
// the last column that has a nonempty tied candidate takes the first one.
template <class Num>
void repair_empty_optimum(const Problem<Num>& p, const Ratio<Num>& lambda, std::vector<std::size_t>& assignment) {
  if (lambda.num == Num(0)) return;
  if (ratio_of(p, assignment).num != Num(0)) return;
  for (std::size_t j = p.n; j-- > 0;) {
    const Num best = lambda.den * p.numer(assignment[j], j) - lambda.num * p.denom(assignment[j], j);
    for (std::size_t i = 0; i < p.m; ++i) {
      const Num term = lambda.den * p.numer(i, j) - lambda.num * p.denom(i, j);
      if (term == best && p.denom(i, j) != Num(0)) {
        assignment[j] = i;
        return;
      }
    }
  }
}

struct RawSolution {
  std::vector<std::size_t> assignment;
  int iterations = 0;
  bool degenerate = false;
  std::vector<double> lambdas;
};

template <class Num>
RawSolution dinkelbach(const Problem<Num>& p, const SolverConfig& config, Num tolerance) {
  RawSolution out;
  out.assignment.assign(p.n, 0);
  if (p.all_zero()) {
    out.degenerate = true;
    return out;
  }

  // Start from the best single-system selection.
  std::vector<std::size_t> current(p.n, 0);
  Ratio<Num> lambda = ratio_of(p, current);
  for (std::size_t i = 1; i < p.m; ++i) {
    std::vector<std::size_t> candidate(p.n, i);
    const Ratio<Num> r = ratio_of(p, candidate);
    if (greater(r, lambda)) {
      lambda = r;
      current = std::move(candidate);
    }
  }
  out.lambdas.push_back(to_double(lambda));

  for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
    ParametricStep<Num> step = parametric_argmax(p, lambda);
    out.iterations = iteration;
    if (step.value <= tolerance) {
      repair_empty_optimum(p, lambda, step.assignment);
      // Float fallback only: rounding can make the tied argmax slightly worse.
      out.assignment = greater(ratio_of(p, current), ratio_of(p, step.assignment)) ? current : step.assignment;
      return out;
    }
    const Ratio<Num> next = ratio_of(p, step.assignment);
    if (!greater(next, lambda)) {
      // No strict progress is only possible through rounding.
      out.assignment = current;
      return out;
    }
    lambda = next;
    current = std::move(step.assignment);
    out.lambdas.push_back(to_double(lambda));
  }
  throw NonconvergenceError("Dinkelbach iteration did not converge in " + std::to_string(config.max_iterations) +
                                " iterations (last lambda " + std::to_string(to_double(lambda)) + ")",
                            to_double(lambda));
}

SolveResult finish(const CountMatrix& counts, const SolverConfig& config, RawSolution raw, Backend backend,
                   bool exact) {
  SolveResult result;
  result.selection = SelectionMatrix::from_assignment(counts.system_ids, counts.type_index, raw.assignment);
  result.selection.validate();
  result.objective = f_alpha_from_counts(counts_for_selection(counts, result.selection), config.alpha);
  result.iterations = raw.iterations;
  result.backend_used = backend;
  result.degenerate = raw.degenerate;
  result.exact_arithmetic = exact;
  result.lambdas = std::move(raw.lambdas);
  return result;
}

std::optional<std::uint64_t> assignment_count(std::size_t m, std::size_t n, std::uint64_t cap) {
  std::uint64_t total = 1;
  for (std::size_t j = 0; j < n; ++j) {
    if (total > cap / std::max<std::size_t>(m, 1)) return std::nullopt;
    total *= m;
  }
  return total;
}

void check_inputs(const CountMatrix& counts, const SolverConfig& config) {
  config.validate();
  counts.validate();
}

}  // namespace

std::string_view to_string(Backend backend) noexcept {
  return backend == Backend::exhaustive ? "exhaustive" : "dinkelbach";
}

Backend parse_backend(std::string_view name) {
  if (name == "exhaustive") return Backend::exhaustive;
  if (name == "dinkelbach") return Backend::dinkelbach;
  throw ContractError("unknown solver backend '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ContractError("alpha must be a finite nonnegative number");
  if (!(dinkelbach_tolerance >= 0.0)) throw ContractError("dinkelbach_tolerance must be nonnegative");
  if (max_iterations <= 0) throw ContractError("max_iterations must be positive");
}

nlohmann::json to_json(const SolveResult& result) {
  return {{"objective", result.objective},
          {"iterations", result.iterations},
          {"backend", std::string(to_string(result.backend_used))},
          {"degenerate", result.degenerate},
          {"exact_arithmetic", result.exact_arithmetic},
          {"lambdas", result.lambdas},
          {"selection", to_json(result.selection)}};
}

CountMatrix with_abstain_row(const CountMatrix& counts) {
  counts.validate();
  auto systems = counts.system_ids;
  systems.emplace_back(kAbstainSystem);
  CountMatrix out(std::move(systems), counts.type_index);
  for (std::size_t i = 0; i < counts.systems(); ++i) {
    for (std::size_t j = 0; j < counts.types(); ++j) out.add(i, j, counts.at(i, j));
  }
  const std::size_t abstain = counts.systems();
  for (std::size_t j = 0; j < counts.types(); ++j) {
    std::int64_t missed = 0;
    for (std::size_t i = 0; i < counts.systems(); ++i) missed = std::max(missed, counts.tp(i, j) + counts.fn(i, j));
    out.fn(abstain, j) = missed;
  }
  return out;
}

double f_alpha_objective(const CountMatrix& counts, const SelectionMatrix& x, double alpha) {
  x.validate();
  return f_alpha_from_counts(counts_for_selection(counts, x), alpha);
}

SolveResult solve_exhaustive(const CountMatrix& counts, const SolverConfig& config) {
  check_inputs(counts, config);
  if (!assignment_count(counts.systems(), counts.types(), config.enumeration_cap)) {
    throw CapacityError(std::to_string(counts.systems()) + "^" + std::to_string(counts.types()) +
                        " assignments exceed the enumeration cap of " + std::to_string(config.enumeration_cap) +
                        "; use the dinkelbach backend");
  }
  RawSolution raw;
  bool exact = false;
  if (auto w = integer_weights(counts, config.alpha)) {
    const auto p = exact_problem(counts, *w);
    raw.assignment = enumerate_best(p);
    raw.degenerate = p.all_zero();
    exact = true;
  } else {
    const auto p = float_problem(counts, config.alpha);
    raw.assignment = enumerate_best(p);
    raw.degenerate = p.all_zero();
  }
  return finish(counts, config, std::move(raw), Backend::exhaustive, exact);
}

SolveResult solve_dinkelbach(const CountMatrix& counts, const SolverConfig& config) {
  check_inputs(counts, config);
  if (auto w = integer_weights(counts, config.alpha)) {
    return finish(counts, config, dinkelbach(exact_problem(counts, *w), config, Wide(0)), Backend::dinkelbach,
                  true);
  }
  return finish(counts, config, dinkelbach(float_problem(counts, config.alpha), config, config.dinkelbach_tolerance),
                Backend::dinkelbach, false);
}

SolveResult solve(const CountMatrix& counts, const SolverConfig& config) {
  check_inputs(counts, config);
  const CountMatrix& problem = config.allow_abstain ? with_abstain_row(counts) : counts;
  if (config.backend == Backend::exhaustive &&
      assignment_count(problem.systems(), problem.types(), config.enumeration_cap)) {
    return solve_exhaustive(problem, config);
  }
  return solve_dinkelbach(problem, config);
}

}  // namespace gec
