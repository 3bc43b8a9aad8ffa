#include "gpscale/dense.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gpscale/kernels.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using gpscale::CholeskyGp;

namespace {

MatrixXd random_spd(std::mt19937_64& gen, Eigen::Index n) {
  MatrixXd A = oracles::random_matrix(gen, n, n);
  return A * A.transpose() + MatrixXd::Identity(n, n);
}

TEST(CholeskyGpTest, FactorReproducesCovariance) {
  auto gen = oracles::rng(101);
  MatrixXd K = random_spd(gen, 6);
  auto gp = CholeskyGp::from_covariance(VectorXd::Zero(6), K);
  MatrixXd target = K + gp.jitter() * MatrixXd::Identity(6, 6);
  EXPECT_LT((gp.covariance() - target).cwiseAbs().maxCoeff() / target.cwiseAbs().maxCoeff(),
            1e-8);
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_GT(gp.chol()(i, i), 0.0);
    for (Eigen::Index j = i + 1; j < 6; ++j) EXPECT_EQ(gp.chol()(i, j), 0.0);
  }
}

TEST(CholeskyGpTest, JitterEscalationRecovers) {
  // Rank-deficient: duplicated point under an SE kernel.
  MatrixXd K = MatrixXd::Constant(2, 2, 4.0);
  auto gp = CholeskyGp::from_covariance(VectorXd::Zero(2), K);
  EXPECT_GT(gp.jitter(), 0.0);
  EXPECT_LE(gp.jitter(), 1e-4 * 4.0 * (1 + 1e-9));
}

TEST(CholeskyGpTest, HardFailureAfterEscalation) {
  MatrixXd K(2, 2);
  K << 1.0, 2.0, 2.0, 1.0;  // indefinite
  EXPECT_THROW(CholeskyGp::from_covariance(VectorXd::Zero(2), K), gpscale::FactorizationError);
}

TEST(DenseLpdf, StandardNormalAtZero) {
  auto gp = CholeskyGp::from_covariance(VectorXd::Zero(1), MatrixXd::Identity(1, 1), 0.0);
  EXPECT_NEAR(gpscale::dense_lpdf(VectorXd::Zero(1), gp), -0.5 * std::log(2.0 * std::numbers::pi),
              1e-12);
  EXPECT_NEAR(gpscale::dense_lpdf(VectorXd::Zero(1), gp), -0.918939, 1e-6);
}

TEST(DenseLpdf, IsotropicTwoDim) {
  auto gp = CholeskyGp::from_covariance(VectorXd::Zero(2), MatrixXd::Identity(2, 2), 0.0);
  VectorXd f = VectorXd::Ones(2);
  EXPECT_NEAR(gpscale::dense_lpdf(f, gp), -std::log(2.0 * std::numbers::pi) - 1.0, 1e-12);
}

TEST(DenseLpdf, MatchesExplicitInverseOracle) {
  auto gen = oracles::rng(103);
  MatrixXd K = random_spd(gen, 5);
  VectorXd mu = oracles::random_vector(gen, 5);
  VectorXd f = oracles::random_vector(gen, 5, -2.0, 2.0);
  auto gp = CholeskyGp::from_covariance(mu, K, 0.0);
  const double want = oracles::mvn_lpdf_explicit(f, mu, K);
  EXPECT_NEAR(gpscale::dense_lpdf(f, gp), want, 1e-9);
}

TEST(DenseLpdf, RejectsDimensionMismatch) {
  auto gp = CholeskyGp::from_covariance(VectorXd::Zero(3), MatrixXd::Identity(3, 3));
  EXPECT_THROW(gpscale::dense_lpdf(VectorXd::Zero(2), gp), std::invalid_argument);
}

TEST(DenseLpdf, MaximizedAtMean) {
  auto gen = oracles::rng(107);
  MatrixXd K = random_spd(gen, 4);
  VectorXd mu = oracles::random_vector(gen, 4);
  auto gp = CholeskyGp::from_covariance(mu, K);
  const double at_mean = gpscale::dense_lpdf(mu, gp);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd perturbed = mu + 0.1 * oracles::random_vector(gen, 4);
    EXPECT_LT(gpscale::dense_lpdf(perturbed, gp), at_mean);
  }
}

TEST(DenseInvTransform, ZeroMapsToMean) {
  auto gen = oracles::rng(109);
  VectorXd mu = oracles::random_vector(gen, 4);
  auto gp = CholeskyGp::from_covariance(mu, random_spd(gen, 4));
  EXPECT_LT((gpscale::dense_inv_transform(VectorXd::Zero(4), gp) - mu).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST(DenseInvTransform, IdentityCovarianceShifts) {
  VectorXd mu(2);
  mu << 3.0, -1.0;
  auto gp = CholeskyGp::from_covariance(mu, MatrixXd::Identity(2, 2), 0.0);
  VectorXd z(2);
  z << 0.5, 2.0;
  EXPECT_LT((gpscale::dense_inv_transform(z, gp) - (mu + z)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DenseInvTransform, MonteCarloCovarianceMatchesK) {
  auto gen = oracles::rng(113);
  const Eigen::Index n = 6;
  MatrixXd K = random_spd(gen, n);
  auto gp = CholeskyGp::from_covariance(VectorXd::Zero(n), K, 0.0);
  const int draws = 20000;
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd sum2 = MatrixXd::Zero(n, n);
  VectorXd sum = VectorXd::Zero(n);
  for (int s = 0; s < draws; ++s) {
    VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(gen);
    VectorXd f = gpscale::dense_inv_transform(z, gp);
    sum += f;
    sum2 += f * f.transpose();
  }
  MatrixXd mean_outer = sum / draws * (sum / draws).transpose();
  MatrixXd emp = sum2 / draws - mean_outer;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double se = std::sqrt((K(i, i) * K(j, j) + K(i, j) * K(i, j)) / draws);
      EXPECT_LT(std::abs(emp(i, j) - K(i, j)), 5.0 * se) << i << "," << j;
    }
  }
}

TEST(DenseWhiten, RoundTrips) {
  auto gen = oracles::rng(127);
  for (Eigen::Index n : {1, 4, 9}) {
    VectorXd mu = oracles::random_vector(gen, n);
    auto gp = CholeskyGp::from_covariance(mu, random_spd(gen, n));
    VectorXd f = oracles::random_vector(gen, n, -3.0, 3.0);
    VectorXd back = gpscale::dense_inv_transform(gpscale::dense_whiten(f, gp), gp);
    EXPECT_LT((back - f).cwiseAbs().maxCoeff(), 1e-10) << "n = " << n;
  }
}

TEST(DenseLpdf, ChangeOfVariablesIdentity) {
  auto gen = oracles::rng(131);
  const Eigen::Index n = 5;
  auto gp = CholeskyGp::from_covariance(oracles::random_vector(gen, n), random_spd(gen, n));
  VectorXd f = oracles::random_vector(gen, n, -2.0, 2.0);
  VectorXd z = gpscale::dense_whiten(f, gp);
  const double std_normal =
      -0.5 * z.squaredNorm() - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(gpscale::dense_lpdf(f, gp), std_normal - gp.log_det_chol(), 1e-9);
}

TEST(DenseGrad, MatchesFiniteDifferences) {
  auto gen = oracles::rng(137);
  for (Eigen::Index n : {1, 4, 7}) {
    auto gp = CholeskyGp::from_covariance(oracles::random_vector(gen, n), random_spd(gen, n));
    VectorXd f = oracles::random_vector(gen, n, -2.0, 2.0);
    VectorXd grad = gpscale::dense_lpdf_grad_f(f, gp);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(f[i]));
      VectorXd fp = f, fm = f;
      fp[i] += h;
      fm[i] -= h;
      const double fd = (gpscale::dense_lpdf(fp, gp) - gpscale::dense_lpdf(fm, gp)) / (2.0 * h);
      EXPECT_NEAR(grad[i], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(DenseAdjoint, MatchesTransposedJacobian) {
  auto gen = oracles::rng(139);
  const Eigen::Index n = 5;
  auto gp = CholeskyGp::from_covariance(VectorXd::Zero(n), random_spd(gen, n));
  VectorXd g = oracles::random_vector(gen, n);
  VectorXd adj = gpscale::dense_adjoint_inv_transform(g, gp);
  // dot(g, L e_k) reproduces column k of L^T g.
  for (Eigen::Index k = 0; k < n; ++k) {
    VectorXd ek = VectorXd::Zero(n);
    ek[k] = 1.0;
    const double want = g.dot(gpscale::dense_inv_transform(ek, gp) - gp.loc());
    EXPECT_NEAR(adj[k], want, 1e-12);
  }
}

TEST(Posterior, PriorDominatesForHugeNoise) {
  auto gen = oracles::rng(149);
  const Eigen::Index n = 4;
  VectorXd mu = oracles::random_vector(gen, n);
  auto gp = CholeskyGp::from_covariance(mu, random_spd(gen, n));
  VectorXd y = oracles::random_vector(gen, n, -5.0, 5.0);
  auto [mean, cov] = gpscale::gp_regression_posterior(y, 1e8, gp);
  EXPECT_LT((mean - mu).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Posterior, DataDominatesForTinyNoise) {
  auto gen = oracles::rng(151);
  const Eigen::Index n = 4;
  auto gp = CholeskyGp::from_covariance(VectorXd::Zero(n), random_spd(gen, n));
  VectorXd y = oracles::random_vector(gen, n, -2.0, 2.0);
  auto [mean, cov] = gpscale::gp_regression_posterior(y, 1e-8, gp);
  EXPECT_LT((mean - y).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Posterior, MatchesJointConditioningOracle) {
  auto gen = oracles::rng(157);
  const Eigen::Index n = 4;
  MatrixXd K = random_spd(gen, n);
  VectorXd mu = oracles::random_vector(gen, n);
  VectorXd y = oracles::random_vector(gen, n, -2.0, 2.0);
  const double kappa = 0.7;
  auto gp = CholeskyGp::from_covariance(mu, K, 0.0);
  auto [mean, cov] = gpscale::gp_regression_posterior(y, kappa, gp);
  // Brute-force joint-Gaussian conditioning with explicit inverses.
  MatrixXd A = K + kappa * kappa * MatrixXd::Identity(n, n);
  MatrixXd Ainv = A.inverse();
  VectorXd want_mean = mu + K * Ainv * (y - mu);
  MatrixXd want_cov = K - K * Ainv * K;
  EXPECT_LT((mean - want_mean).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((cov - want_cov).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Posterior, VarianceNeverExceedsPrior) {
  auto gen = oracles::rng(163);
  const Eigen::Index n = 5;
  MatrixXd K = random_spd(gen, n);
  auto gp = CholeskyGp::from_covariance(VectorXd::Zero(n), K, 0.0);
  VectorXd y = oracles::random_vector(gen, n, -2.0, 2.0);
  auto [mean, cov] = gpscale::gp_regression_posterior(y, 0.5, gp);
  for (Eigen::Index i = 0; i < n; ++i) EXPECT_LE(cov(i, i), K(i, i) + 1e-12);
}

TEST(Posterior, RejectsNonPositiveNoise) {
  auto gp = CholeskyGp::from_covariance(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
  EXPECT_THROW(gpscale::gp_regression_posterior(VectorXd::Zero(2), 0.0, gp),
               std::invalid_argument);
}

}  // namespace
