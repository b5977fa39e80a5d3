// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "sidpmm/model.hpp"
#include "sidpmm/sampler.hpp"

namespace sidpmm {

// Maps arbitrary labels to dense integer codes in first-occurrence order.
template <typename T>
std::vector<int> label_codes(const std::vector<T>& labels) {
  std::unordered_map<T, int> codes;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    auto [it, inserted] = codes.emplace(l, static_cast<int>(codes.size()));
    out.push_back(it->second);
  }
  return out;
}

struct ContingencyTable {
  std::vector<std::vector<int64_t>> counts;  // rows = predicted, cols = truth
  std::vector<int64_t> row_sums;
  std::vector<int64_t> col_sums;
  int64_t total = 0;

  static ContingencyTable build(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size())
      throw std::invalid_argument("ContingencyTable: label vectors differ in length");
    if (pred.empty()) throw std::invalid_argument("ContingencyTable: empty labels");
    std::vector<int> p = label_codes(pred), t = label_codes(truth);
    const int rows = *std::max_element(p.begin(), p.end()) + 1;
    const int cols = *std::max_element(t.begin(), t.end()) + 1;
    ContingencyTable table;
    table.counts.assign(rows, std::vector<int64_t>(cols, 0));
    table.row_sums.assign(rows, 0);
    table.col_sums.assign(cols, 0);
    table.total = static_cast<int64_t>(p.size());
    for (size_t i = 0; i < p.size(); ++i) {
      ++table.counts[p[i]][t[i]];
      ++table.row_sums[p[i]];
      ++table.col_sums[t[i]];
    }
    return table;
  }

  double entropy_rows() const { return entropy(row_sums, total); }
  double entropy_cols() const { return entropy(col_sums, total); }

  double mutual_information() const {
    const double n = static_cast<double>(total);
    double mi = 0.0;
    for (size_t i = 0; i < counts.size(); ++i) {
      for (size_t j = 0; j < counts[i].size(); ++j) {
        if (counts[i][j] == 0) continue;
        const double nij = static_cast<double>(counts[i][j]);
        mi += (nij / n) * std::log(n * nij / (static_cast<double>(row_sums[i]) *
                                              static_cast<double>(col_sums[j])));
      }
    }
    return mi;
  }

 private:
  static double entropy(const std::vector<int64_t>& marginal, int64_t total) {
    double h = 0.0;
    for (int64_t m : marginal) {
      if (m == 0) continue;
      const double p = static_cast<double>(m) / static_cast<double>(total);
      h -= p * std::log(p);
    }
    return h;
  }
};

// Normalized mutual information, MI / sqrt(H_pred * H_true) by default
// (arithmetic-mean normalization behind the flag). Natural logs; two
// single-cluster partitions score 1, any other zero-entropy case scores 0.
inline double nmi(const std::vector<int>& pred, const std::vector<int>& truth,
                  bool arithmetic_norm = false) {
  ContingencyTable table = ContingencyTable::build(pred, truth);
  const double hp = table.entropy_rows();
  const double ht = table.entropy_cols();
  if (hp == 0.0 && ht == 0.0) return 1.0;
  if (hp == 0.0 || ht == 0.0) return 0.0;
  const double norm = arithmetic_norm ? 0.5 * (hp + ht) : std::sqrt(hp * ht);
  return std::clamp(table.mutual_information() / norm, 0.0, 1.0);
}

inline double nmi(const std::vector<std::string>& pred, const std::vector<std::string>& truth,
                  bool arithmetic_norm = false) {
  return nmi(label_codes(pred), label_codes(truth), arithmetic_norm);
}

// 100 * |K_found - K_true| / K_true.
inline double difference_ratio(int k_found, int k_true) {
  if (k_true < 1) throw std::invalid_argument("difference_ratio: K_true must be >= 1");
  return 100.0 * std::abs(k_found - k_true) / static_cast<double>(k_true);
}

struct ClusterReport {
  int k_found = 0;
  std::vector<int64_t> sizes;  // descending
  std::vector<int64_t> thresholds;
  std::vector<int64_t> counts_above;  // clusters with size >= threshold
  std::optional<double> diff_ratio;   // set when K_true is known
};

inline ClusterReport cluster_count_report(const std::vector<int64_t>& sizes,
                                          const std::vector<int64_t>& thresholds,
                                          std::optional<int> k_true = std::nullopt) {
  ClusterReport report;
  report.k_found = static_cast<int>(sizes.size());
  report.sizes = sizes;
  std::sort(report.sizes.begin(), report.sizes.end(), std::greater<>());
  report.thresholds = thresholds;
  for (int64_t th : thresholds) {
    int64_t c = 0;
    for (int64_t s : sizes)
      if (s >= th) ++c;
    report.counts_above.push_back(c);
  }
  if (k_true) report.diff_ratio = difference_ratio(report.k_found, *k_true);
  return report;
}

inline ClusterReport cluster_count_report(const ModelState& state,
                                          const std::vector<int64_t>& thresholds,
                                          std::optional<int> k_true = std::nullopt) {
  return cluster_count_report(state.cluster_sizes(), thresholds, k_true);
}

struct AlphaSweepRow {
  double alpha = 0.0;
  double mean_k = 0.0;
  double sd_k = 0.0;
  std::optional<double> mean_nmi;
  std::optional<double> sd_nmi;
};

// Full clustering run per (alpha, seed) pair; rows aggregate over seeds.
// Chains are independent, so pairs may run on up to `jobs` threads; results
// land in fixed slots, keeping the output deterministic.
inline std::vector<AlphaSweepRow> alpha_sweep(const std::vector<Document>& docs,
                                              const std::optional<std::vector<int>>& truth,
                                              const std::vector<double>& alphas,
                                              const ModelConfig& base,
                                              const std::vector<uint64_t>& seeds, int jobs = 1) {
  if (alphas.empty()) throw std::invalid_argument("alpha_sweep: empty alpha list");
  if (seeds.empty()) throw std::invalid_argument("alpha_sweep: empty seed list");
  struct RunResult {
    int k = 0;
    double score = 0.0;
  };
  const size_t runs = alphas.size() * seeds.size();
  std::vector<RunResult> results(runs);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= runs) return;
      ModelConfig cfg = base;
      cfg.alpha = alphas[i / seeds.size()];
      cfg.seed = seeds[i % seeds.size()];
      Rng rng(cfg.seed);
      GibbsSampler sampler(docs, cfg);
      sampler.initialize(rng);
      sampler.run(rng);
      results[i].k = sampler.state().k();
      if (truth) {
        results[i].score = nmi(sampler.state().assignment, *truth);
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(runs)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::vector<AlphaSweepRow> rows;
  rows.reserve(alphas.size());
  const double ns = static_cast<double>(seeds.size());
  for (size_t a = 0; a < alphas.size(); ++a) {
    AlphaSweepRow row;
    row.alpha = alphas[a];
    double mk = 0.0, ms = 0.0;
    for (size_t s = 0; s < seeds.size(); ++s) {
      mk += results[a * seeds.size() + s].k;
      ms += results[a * seeds.size() + s].score;
    }
    mk /= ns;
    ms /= ns;
    double vk = 0.0, vs = 0.0;
    for (size_t s = 0; s < seeds.size(); ++s) {
      vk += std::pow(results[a * seeds.size() + s].k - mk, 2);
      vs += std::pow(results[a * seeds.size() + s].score - ms, 2);
    }
    row.mean_k = mk;
    row.sd_k = std::sqrt(vk / ns);
    if (truth) {
      row.mean_nmi = ms;
      row.sd_nmi = std::sqrt(vs / ns);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sidpmm
