#include "gec/fscore.hpp"

namespace gec {

double f_alpha_from_counts(const Counts& c, double alpha) noexcept {
  if (c.tp == 0) return 0.0;
  const double a2 = alpha * alpha;
  const double weighted_tp = (1.0 + a2) * static_cast<double>(c.tp);
  return weighted_tp /
         (weighted_tp + static_cast<double>(c.fp) + a2 * static_cast<double>(c.fn));
}

double precision(const Counts& c) noexcept {
  if (c.tp + c.fp == 0) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

double recall(const Counts& c) noexcept {
  if (c.tp + c.fn == 0) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

double f_beta_from_pr(double p, double r, double alpha) noexcept {
  const double a2 = alpha * alpha;
  const double denom = a2 * p + r;
  if (denom == 0.0) return 0.0;
  return (1.0 + a2) * p * r / denom;
}

double f_score(const Counts& c, double alpha) noexcept {
  return f_beta_from_pr(precision(c), recall(c), alpha);
}

}  // namespace gec
