#ifndef GPSCALE_DENSE_HPP
#define GPSCALE_DENSE_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace gpscale {

struct FactorizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace dense_detail {

// Diagonal regularization relative to the largest diagonal entry. Escalation
// stops at max_rel; beyond that the matrix is treated as genuinely non-PSD.
inline constexpr double kInitialJitterRel = 1e-8;
inline constexpr double kMaxJitterRel = 1e-4;
inline constexpr double kJitterGrowth = 10.0;

inline bool try_cholesky(const Eigen::MatrixXd& K, double jitter, Eigen::MatrixXd& out) {
  out = K;
  out.diagonal().array() += jitter;
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(out);
  if (llt.info() != Eigen::Success) return false;
  if (!(out.diagonal().array() > 0.0).all()) return false;
  out.triangularView<Eigen::StrictlyUpper>().setZero();
  return true;
}

}  // namespace dense_detail

// Exact GP over n points: mean vector plus the lower Cholesky factor of
// K + jitter I. The jitter actually applied is recorded and is part of the
// distribution every operation evaluates, so comparisons against this class
// as an oracle are exact rather than approximate.
class CholeskyGp {
 public:
  // Escalating jitter policy: start at 1e-8 * max diagonal, grow tenfold up
  // to 1e-4 * max diagonal, then fail hard.
  static CholeskyGp from_covariance(Eigen::VectorXd loc, const Eigen::MatrixXd& K) {
    check_shape(loc, K);
    const double scale = K.diagonal().maxCoeff();
    if (!(scale > 0.0)) throw FactorizationError("CholeskyGp: covariance diagonal must be positive");
    Eigen::MatrixXd chol;
    double rel = dense_detail::kInitialJitterRel;
    while (rel <= dense_detail::kMaxJitterRel * (1.0 + 1e-12)) {
      if (dense_detail::try_cholesky(K, rel * scale, chol)) {
        return CholeskyGp(std::move(loc), std::move(chol), rel * scale);
      }
      rel *= dense_detail::kJitterGrowth;
    }
    throw FactorizationError("CholeskyGp: covariance not positive definite after jitter escalation");
  }

  // Fixed jitter, no escalation. jitter = 0 demands an exactly PSD input.
  static CholeskyGp from_covariance(Eigen::VectorXd loc, const Eigen::MatrixXd& K, double jitter) {
    check_shape(loc, K);
    if (!(jitter >= 0.0)) throw std::invalid_argument("CholeskyGp: jitter must be >= 0");
    Eigen::MatrixXd chol;
    if (!dense_detail::try_cholesky(K, jitter, chol)) {
      throw FactorizationError("CholeskyGp: covariance not positive definite at requested jitter");
    }
    return CholeskyGp(std::move(loc), std::move(chol), jitter);
  }

  const Eigen::VectorXd& loc() const { return loc_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return loc_.size(); }

  double log_det_chol() const { return chol_.diagonal().array().log().sum(); }

  // Reassembled K + jitter I (order n^2 storage; intended for small oracles).
  Eigen::MatrixXd covariance() const {
    return chol_ * chol_.transpose();
  }

 private:
  CholeskyGp(Eigen::VectorXd loc, Eigen::MatrixXd chol, double jitter)
      : loc_(std::move(loc)), chol_(std::move(chol)), jitter_(jitter) {}

  static void check_shape(const Eigen::VectorXd& loc, const Eigen::MatrixXd& K) {
    if (K.rows() != K.cols()) throw std::invalid_argument("CholeskyGp: covariance must be square");
    if (loc.size() != K.rows()) {
      throw std::invalid_argument("CholeskyGp: mean length must match covariance size");
    }
    if (!K.allFinite() || !loc.allFinite()) {
      throw std::invalid_argument("CholeskyGp: inputs must be finite");
    }
  }

  Eigen::VectorXd loc_;
  Eigen::MatrixXd chol_;
  double jitter_ = 0.0;
};

namespace dense_detail {

inline void check_length(const Eigen::VectorXd& v, const CholeskyGp& gp, const char* who) {
  if (v.size() != gp.size()) {
    throw std::invalid_argument(std::string(who) + ": vector length does not match GP dimension");
  }
}

}  // namespace dense_detail

// log N(f; loc, K + jitter I), all normalization constants included.
inline double dense_lpdf(const Eigen::VectorXd& f, const CholeskyGp& gp) {
  dense_detail::check_length(f, gp, "dense_lpdf");
  const Eigen::VectorXd w =
      gp.chol().triangularView<Eigen::Lower>().solve(f - gp.loc());
  return -0.5 * w.squaredNorm() - gp.log_det_chol() -
         0.5 * static_cast<double>(gp.size()) * std::log(2.0 * std::numbers::pi);
}

inline Eigen::VectorXd dense_lpdf_grad_f(const Eigen::VectorXd& f, const CholeskyGp& gp) {
  dense_detail::check_length(f, gp, "dense_lpdf_grad_f");
  const Eigen::VectorXd w =
      gp.chol().triangularView<Eigen::Lower>().solve(f - gp.loc());
  return -gp.chol().transpose().triangularView<Eigen::Upper>().solve(w);
}

// Non-centered map f = loc + L z.
inline Eigen::VectorXd dense_inv_transform(const Eigen::VectorXd& z, const CholeskyGp& gp) {
  dense_detail::check_length(z, gp, "dense_inv_transform");
  return gp.loc() + gp.chol().triangularView<Eigen::Lower>() * z;
}

// Adjoint of the non-centered map: L^T g.
inline Eigen::VectorXd dense_adjoint_inv_transform(const Eigen::VectorXd& g, const CholeskyGp& gp) {
  dense_detail::check_length(g, gp, "dense_adjoint_inv_transform");
  return gp.chol().transpose().triangularView<Eigen::Upper>() * g;
}

inline Eigen::VectorXd dense_whiten(const Eigen::VectorXd& f, const CholeskyGp& gp) {
  dense_detail::check_length(f, gp, "dense_whiten");
  return gp.chol().triangularView<Eigen::Lower>().solve(f - gp.loc());
}

// Conjugate posterior of f given y ~ N(f, kappa^2 I) under the GP prior.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> gp_regression_posterior(
    const Eigen::VectorXd& y, double noise_sd, const CholeskyGp& gp) {
  dense_detail::check_length(y, gp, "gp_regression_posterior");
  if (!(noise_sd > 0.0)) {
    throw std::invalid_argument("gp_regression_posterior: noise sd must be positive");
  }
  const Eigen::MatrixXd K = gp.covariance();
  Eigen::MatrixXd A = K;
  A.diagonal().array() += noise_sd * noise_sd;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("gp_regression_posterior: noisy covariance not positive definite");
  }
  const Eigen::VectorXd mean = gp.loc() + K * llt.solve(y - gp.loc());
  Eigen::MatrixXd cov = K - K * llt.solve(K);
  cov = 0.5 * (cov + cov.transpose()).eval();
  return {mean, cov};
}

}  // namespace gpscale

#endif  // GPSCALE_DENSE_HPP
