// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "sidpmm/rng.hpp"

namespace sidpmm {

inline double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;  // all -inf, or a nan propagates
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - m);
  return m + std::log(sum);
}

// sum_{j=0}^{m-1} log(a + j), the log of the rising factorial a^(m).
// Evaluated termwise so large counts cannot overflow a Gamma call.
inline double log_rising_factorial(double a, long m) {
  double s = 0.0;
  for (long j = 0; j < m; ++j) s += std::log(a + static_cast<double>(j));
  return s;
}

// log(sigmoid(x)), stable for large |x|.
inline double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Draws an index from the categorical distribution with the given
// unnormalized log weights.
inline int sample_from_logits(std::span<const double> logits, Rng& rng) {
  if (logits.empty()) throw std::invalid_argument("sample_from_logits: empty input");
  double m = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(m)) throw std::domain_error("sample_from_logits: non-finite max logit");
  double total = 0.0;
  std::vector<double> w(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) {
    w[i] = std::exp(logits[i] - m);
    total += w[i];
  }
  double u = rng.uniform01() * total;
  double acc = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(w.size()) - 1;  // u landed on the rounding edge
}

}  // namespace sidpmm
