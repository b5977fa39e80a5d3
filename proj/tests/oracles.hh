// Apache License, Version 2.0, refer to LICENSE.txt
//
// Test-side reference implementations. Everything here is written
// independently of the library code paths it is used to check.

#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace oracle {

// Dirichlet-multinomial predictive via the Gamma-ratio identity:
//   Delta(u_k + beta) / Delta(u_{k,-i} + beta)
// with Delta(v) = prod Gamma(v_t) / Gamma(sum v_t), using dense count
// vectors and lgamma throughout.
inline double dirichlet_multinomial_log_predictive(const std::vector<int64_t>& doc_counts,
                                                   const std::vector<int64_t>& cluster_counts,
                                                   double beta) {
  const size_t v = doc_counts.size();
  double num = 0.0, den = 0.0;
  int64_t doc_total = 0, cluster_total = 0;
  for (size_t t = 0; t < v; ++t) {
    num += std::lgamma(static_cast<double>(cluster_counts[t] + doc_counts[t]) + beta);
    den += std::lgamma(static_cast<double>(cluster_counts[t]) + beta);
    doc_total += doc_counts[t];
    cluster_total += cluster_counts[t];
  }
  num -= std::lgamma(static_cast<double>(cluster_total + doc_total) +
                     beta * static_cast<double>(v));
  den -= std::lgamma(static_cast<double>(cluster_total) + beta * static_cast<double>(v));
  return num - den;
}

// Multivariate Student-t log density with df degrees of freedom, location mu
// and scale matrix S.
inline double student_t_log_density(const Eigen::VectorXd& x, double df,
                                    const Eigen::VectorXd& mu, const Eigen::MatrixXd& scale) {
  const double d = static_cast<double>(x.size());
  Eigen::LLT<Eigen::MatrixXd> llt(scale);
  Eigen::VectorXd sol = llt.matrixL().solve(x - mu);
  const double maha = sol.squaredNorm();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < scale.rows(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return std::lgamma(0.5 * (df + d)) - std::lgamma(0.5 * df) - 0.5 * d * std::log(df * M_PI) -
         0.5 * log_det - 0.5 * (df + d) * std::log1p(maha / df);
}

// Batch NiW posterior parameters from raw points (scatter form).
struct NiwPosterior {
  double lambda;
  double nu;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

inline NiwPosterior niw_batch_posterior(const Eigen::VectorXd& mu0, double lambda0, double nu0,
                                        const Eigen::MatrixXd& sigma0,
                                        const std::vector<Eigen::VectorXd>& points) {
  const double n = static_cast<double>(points.size());
  NiwPosterior post;
  post.lambda = lambda0 + n;
  post.nu = nu0 + n;
  if (points.empty()) {
    post.mu = mu0;
    post.sigma = sigma0;
    return post;
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(mu0.size());
  for (const auto& x : points) mean += x;
  mean /= n;
  post.mu = (lambda0 * mu0 + n * mean) / post.lambda;
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(mu0.size(), mu0.size());
  for (const auto& x : points) scatter += (x - mean) * (x - mean).transpose();
  post.sigma = sigma0 + scatter +
               (lambda0 * n / post.lambda) * (mean - mu0) * (mean - mu0).transpose();
  return post;
}

// Central finite-difference derivative of f at x.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// All set partitions of {0..n-1} as assignment vectors in canonical form
// (block labels appear in first-occurrence order).
inline std::vector<std::vector<int>> all_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> assign(n, 0);
  std::function<void(int, int)> rec = [&](int i, int max_label) {
    if (i == n) {
      out.push_back(assign);
      return;
    }
    for (int label = 0; label <= max_label; ++label) {
      assign[i] = label;
      rec(i + 1, std::max(max_label, label + 1));
    }
  };
  rec(0, 0);
  return out;
}

// Canonical form of an assignment vector: relabel blocks by first occurrence.
inline std::vector<int> canonical_partition(const std::vector<int>& assign) {
  std::map<int, int> relabel;
  std::vector<int> out;
  out.reserve(assign.size());
  for (int a : assign) {
    auto [it, inserted] = relabel.emplace(a, static_cast<int>(relabel.size()));
    out.push_back(it->second);
  }
  return out;
}

// CRP prior over a partition: alpha^K prod_k (r_k - 1)! / prod_{i=0..D-1} (alpha + i).
inline double crp_log_partition_prior(const std::vector<int>& assign, double alpha) {
  std::map<int, int> sizes;
  for (int a : assign) ++sizes[a];
  double lp = static_cast<double>(sizes.size()) * std::log(alpha);
  for (const auto& [label, r] : sizes)
    for (int j = 1; j < r; ++j) lp += std::log(static_cast<double>(j));
  for (size_t i = 0; i < assign.size(); ++i) lp -= std::log(alpha + static_cast<double>(i));
  return lp;
}

}  // namespace oracle
