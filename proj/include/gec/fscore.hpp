#pragma once

#include <cstdint>

namespace gec {

struct Counts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  Counts& operator+=(const Counts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend Counts operator+(Counts a, const Counts& b) noexcept { return a += b; }
  friend bool operator==(const Counts&, const Counts&) = default;
};

// (1+a^2)TP / ((1+a^2)TP + FP + a^2 FN). Returns 0 when TP == 0, including
// the all-zero case. This is the optimizer's objective.
double f_alpha_from_counts(const Counts& c, double alpha) noexcept;

// tp / (tp + fp); 1.0 when nothing was proposed.
double precision(const Counts& c) noexcept;
// tp / (tp + fn); 1.0 when there was nothing to find.
double recall(const Counts& c) noexcept;

// (1+a^2) p r / (a^2 p + r); 0 when the denominator vanishes.
double f_beta_from_pr(double p, double r, double alpha) noexcept;

// Scorer convention: F from precision and recall with the 0/0 -> 1 rules, so
// an empty hypothesis against an empty reference scores 1. Agrees with
// f_alpha_from_counts whenever any count is nonzero.
double f_score(const Counts& c, double alpha) noexcept;

}  // namespace gec
