// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "sidpmm/cholesky.hpp"
#include "sidpmm/util.hpp"

namespace sidpmm {

// Normal-inverse-Wishart hyperparameters {mu0, lambda0, nu0, Sigma0}.
struct NiwHyper {
  Eigen::VectorXd mu0;
  double lambda0 = 1.0;
  double nu0 = 0.0;
  Eigen::MatrixXd sigma0;

  // {mu0 = 0, lambda0 = 1, nu0 = dim, Sigma0 = I}.
  static NiwHyper standard(int dim) {
    NiwHyper h;
    h.mu0 = Eigen::VectorXd::Zero(dim);
    h.lambda0 = 1.0;
    h.nu0 = static_cast<double>(dim);
    h.sigma0 = Eigen::MatrixXd::Identity(dim, dim);
    return h;
  }

  int dim() const { return static_cast<int>(mu0.size()); }

  void validate() const {
    if (mu0.size() == 0) throw std::invalid_argument("NiwHyper: empty mu0");
    if (lambda0 <= 0.0) throw std::invalid_argument("NiwHyper: lambda0 must be > 0");
    if (nu0 < static_cast<double>(dim()))
      throw std::invalid_argument("NiwHyper: nu0 must be >= dim");
    if (sigma0.rows() != dim() || sigma0.cols() != dim())
      throw std::invalid_argument("NiwHyper: Sigma0 shape mismatch");
  }
};

// log of the NiW normalization constant
//   Z = 2^{(nu+1) eps / 2} pi^{eps(eps+1)/4} lambda^{-eps/2} |Sigma|^{-nu/2}
//       prod_{i=1..eps} Gamma((nu + 1 - i) / 2),
// with |Sigma| taken from its Cholesky factor.
inline double niw_log_normalizer(int dim, double lambda, double nu,
                                 const Eigen::MatrixXd& scale_chol) {
  if (lambda <= 0.0) throw std::invalid_argument("niw_log_normalizer: lambda must be > 0");
  if (nu <= static_cast<double>(dim) - 1.0)
    throw std::invalid_argument("niw_log_normalizer: need nu > dim - 1");
  if (scale_chol.rows() != dim || scale_chol.cols() != dim)
    throw std::invalid_argument("niw_log_normalizer: Cholesky shape mismatch");
  for (int i = 0; i < dim; ++i) {
    if (!(scale_chol(i, i) > 0.0))
      throw std::invalid_argument("niw_log_normalizer: scale matrix not positive definite");
  }
  const double eps = static_cast<double>(dim);
  double lz = 0.5 * (nu + 1.0) * eps * std::log(2.0) +
              0.25 * eps * (eps + 1.0) * std::log(M_PI) - 0.5 * eps * std::log(lambda) -
              0.5 * nu * chol_log_det(scale_chol);
  for (int i = 1; i <= dim; ++i) lz += std::lgamma(0.5 * (nu + 1.0 - static_cast<double>(i)));
  return lz;
}

// Posterior NiW state of one Gaussian channel of one cluster. The scale
// matrix is carried as its lower Cholesky factor and moved by rank-one
// update/downdate as documents come and go; a diagonal-covariance mode keeps
// only the variances.
class NiwStats {
 public:
  static NiwStats prior(const NiwHyper& hyper, bool diagonal = false) {
    hyper.validate();
    NiwStats s;
    s.dim_ = hyper.dim();
    s.diagonal_ = diagonal;
    s.lambda_ = hyper.lambda0;
    s.nu_ = hyper.nu0;
    s.mu_ = hyper.mu0;
    if (diagonal) {
      s.scale_diag_ = hyper.sigma0.diagonal();
      for (int i = 0; i < s.dim_; ++i)
        if (!(s.scale_diag_(i) > 0.0))
          throw std::invalid_argument("NiwStats: Sigma0 diagonal must be positive");
      s.log_det_ = s.scale_diag_.array().log().sum();
    } else {
      s.scale_chol_ = robust_llt(hyper.sigma0);
      s.log_det_ = chol_log_det(s.scale_chol_);
    }
    return s;
  }

  // Batch posterior from a set of member points; the reference path used at
  // initialization and for per-sweep drift correction.
  static NiwStats from_points(const NiwHyper& hyper, std::span<const Eigen::VectorXd> points,
                              bool diagonal = false) {
    hyper.validate();
    const int dim = hyper.dim();
    const auto n = static_cast<double>(points.size());
    if (points.empty()) return prior(hyper, diagonal);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (const auto& x : points) mean += x;
    mean /= n;
    NiwStats s;
    s.dim_ = dim;
    s.diagonal_ = diagonal;
    s.n_ = static_cast<int64_t>(points.size());
    s.lambda_ = hyper.lambda0 + n;
    s.nu_ = hyper.nu0 + n;
    s.mu_ = (hyper.lambda0 * hyper.mu0 + n * mean) / s.lambda_;
    const Eigen::VectorXd dm = mean - hyper.mu0;
    const double shrink = hyper.lambda0 * n / s.lambda_;
    if (diagonal) {
      Eigen::VectorXd diag = hyper.sigma0.diagonal();
      for (const auto& x : points) diag += (x - mean).array().square().matrix();
      diag += shrink * dm.array().square().matrix();
      s.scale_diag_ = diag;
      s.log_det_ = diag.array().log().sum();
    } else {
      Eigen::MatrixXd sigma = hyper.sigma0;
      for (const auto& x : points) sigma += (x - mean) * (x - mean).transpose();
      sigma += shrink * dm * dm.transpose();
      s.scale_chol_ = robust_llt(sigma);
      s.log_det_ = chol_log_det(s.scale_chol_);
    }
    return s;
  }

  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  double nu() const { return nu_; }
  int64_t count() const { return n_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  double log_det() const { return log_det_; }
  bool diagonal() const { return diagonal_; }

  // Full scale matrix, reconstructed; for inspection and tests.
  Eigen::MatrixXd scale() const {
    if (diagonal_) return scale_diag_.asDiagonal();
    return scale_chol_ * scale_chol_.transpose();
  }

  const Eigen::MatrixXd& scale_chol() const { return scale_chol_; }

  // Absorb one observation:
  //   lambda' = lambda + 1, nu' = nu + 1, mu' = (lambda mu + x) / (lambda + 1),
  //   Sigma'  = Sigma + lambda/(lambda+1) (x - mu)(x - mu)^T.
  void add(const Eigen::VectorXd& x) {
    check_dim(x);
    const Eigen::VectorXd res = x - mu_;
    const double w = lambda_ / (lambda_ + 1.0);
    if (diagonal_) {
      scale_diag_ += w * res.array().square().matrix();
      log_det_ = scale_diag_.array().log().sum();
    } else {
      chol_rank_one_update(scale_chol_, std::sqrt(w) * res);
      log_det_ = chol_log_det(scale_chol_);
    }
    mu_ = (lambda_ * mu_ + x) / (lambda_ + 1.0);
    lambda_ += 1.0;
    nu_ += 1.0;
    ++n_;
  }

  // Exact inverse of add. Returns false if the rank-one downdate loses
  // positive definiteness; the caller must then rebuild from the member list.
  bool remove(const Eigen::VectorXd& x) {
    check_dim(x);
    if (n_ <= 0) throw std::runtime_error("NiwStats::remove: no absorbed points");
    const double lambda_prev = lambda_ - 1.0;
    const Eigen::VectorXd mu_prev = (lambda_ * mu_ - x) / lambda_prev;
    const Eigen::VectorXd res = x - mu_prev;
    const double w = lambda_prev / lambda_;
    if (diagonal_) {
      scale_diag_ -= w * res.array().square().matrix();
      if ((scale_diag_.array() <= 0.0).any()) return false;
      log_det_ = scale_diag_.array().log().sum();
    } else {
      if (!chol_rank_one_downdate(scale_chol_, std::sqrt(w) * res)) return false;
      log_det_ = chol_log_det(scale_chol_);
    }
    mu_ = mu_prev;
    lambda_ = lambda_prev;
    nu_ -= 1.0;
    --n_;
    return true;
  }

  // Posterior predictive density of x under this state, with the cluster
  // parameters integrated out:
  //
  //   log p = -eps/2 log pi - eps/2 (log lambda' - log lambda)
  //           - nu'/2 log|Sigma'| + nu/2 log|Sigma|
  //           + lgamma(nu'/2) - lgamma((nu' - eps)/2)
  //
  // where primes are the values after absorbing x. |Sigma'| comes from the
  // matrix determinant lemma, so evaluation costs one triangular solve.
  double log_predictive(const Eigen::VectorXd& x) const {
    check_dim(x);
    const double eps = static_cast<double>(dim_);
    const Eigen::VectorXd res = x - mu_;
    const double w = lambda_ / (lambda_ + 1.0);
    double q;  // v^T Sigma^-1 v for v = sqrt(w) res
    if (diagonal_) {
      q = w * (res.array().square() / scale_diag_.array()).sum();
    } else {
      Eigen::VectorXd sol = scale_chol_.triangularView<Eigen::Lower>().solve(res);
      q = w * sol.squaredNorm();
    }
    const double nu_post = nu_ + 1.0;
    return -0.5 * eps * std::log(M_PI) -
           0.5 * eps * (std::log(lambda_ + 1.0) - std::log(lambda_)) - 0.5 * log_det_ -
           0.5 * nu_post * std::log1p(q) + std::lgamma(0.5 * nu_post) -
           std::lgamma(0.5 * (nu_post - eps));
  }

  double log_normalizer() const {
    if (diagonal_) {
      Eigen::MatrixXd chol = scale_diag_.array().sqrt().matrix().asDiagonal();
      return niw_log_normalizer(dim_, lambda_, nu_, chol);
    }
    return niw_log_normalizer(dim_, lambda_, nu_, scale_chol_);
  }

 private:
  void check_dim(const Eigen::VectorXd& x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("NiwStats: vector dimension " + std::to_string(x.size()) +
                                  " does not match " + std::to_string(dim_));
  }

  // LLT with escalating diagonal jitter; duplicate embeddings can make the
  // scale matrix numerically singular.
  static Eigen::MatrixXd robust_llt(const Eigen::MatrixXd& sigma) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    double jitter = 1e-9;
    for (int attempt = 0; attempt < 6; ++attempt, jitter *= 10.0) {
      Eigen::MatrixXd adjusted = sigma + jitter * Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols());
      llt.compute(adjusted);
      if (llt.info() == Eigen::Success) {
        log_warn("NiwStats: scale matrix required jitter " + std::to_string(jitter));
        return llt.matrixL();
      }
    }
    throw std::runtime_error("NiwStats: scale matrix is not positive definite");
  }

  int dim_ = 0;
  bool diagonal_ = false;
  double lambda_ = 0.0;
  double nu_ = 0.0;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd scale_chol_;  // lower triangular, full mode
  Eigen::VectorXd scale_diag_;  // variances, diagonal mode
  double log_det_ = 0.0;
  int64_t n_ = 0;
};

}  // namespace sidpmm
