// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

#include "sidpmm/corpus.hpp"
#include "sidpmm/numeric.hpp"

namespace sidpmm {

// Per-cluster bag-of-words sufficient statistics under a symmetric Dirichlet
// prior: term counts u_k^t, their sum u_k, the concentration beta and the
// vocabulary size V. The cluster's multinomial parameter is integrated out
// and never materialized.
struct MultinomialStats {
  int vocab_size = 0;
  double beta = 0.0;
  std::unordered_map<int, int64_t> term_counts;
  int64_t total = 0;

  static MultinomialStats prior(int vocab_size, double beta) {
    if (vocab_size <= 0) throw std::invalid_argument("MultinomialStats: V must be > 0");
    if (beta <= 0.0) throw std::invalid_argument("MultinomialStats: beta must be > 0");
    MultinomialStats s;
    s.vocab_size = vocab_size;
    s.beta = beta;
    return s;
  }

  void add(const DocCounts& doc) {
    for (const auto& [t, c] : doc.counts) term_counts[t] += c;
    total += doc.total;
  }

  // Exact inverse of add; entries at zero are erased so that add-then-remove
  // restores the map bit-identically.
  void remove(const DocCounts& doc) {
    for (const auto& [t, c] : doc.counts) {
      auto it = term_counts.find(t);
      if (it == term_counts.end() || it->second < c)
        throw std::runtime_error("MultinomialStats::remove: count underflow for term " +
                                 std::to_string(t));
      it->second -= c;
      if (it->second == 0) term_counts.erase(it);
    }
    if (total < doc.total)
      throw std::runtime_error("MultinomialStats::remove: total underflow");
    total -= doc.total;
  }

  int64_t count_of(int term) const {
    auto it = term_counts.find(term);
    return it == term_counts.end() ? 0 : it->second;
  }
};

// log p(w_i | cluster counts excluding i) for the Dirichlet-multinomial:
//
//   prod_t prod_{j=1..u_i^t} (u_k^t + beta + j - 1)
//   ------------------------------------------------
//     prod_{j=1..u_i} (u_k + V beta + j - 1)
//
// evaluated as a sum of logs of the rising-factorial terms so large counts
// cannot overflow.
inline double mult_log_predictive(const DocCounts& doc, const MultinomialStats& stats) {
  if (stats.vocab_size <= 0 || stats.beta <= 0.0)
    throw std::invalid_argument("mult_log_predictive: stats not configured");
  double lp = 0.0;
  for (const auto& [t, c] : doc.counts) {
    if (t < 0 || t >= stats.vocab_size)
      throw std::out_of_range("mult_log_predictive: term index outside vocabulary");
    lp += log_rising_factorial(static_cast<double>(stats.count_of(t)) + stats.beta, c);
  }
  lp -= log_rising_factorial(
      static_cast<double>(stats.total) + stats.beta * static_cast<double>(stats.vocab_size),
      doc.total);
  return lp;
}

}  // namespace sidpmm
