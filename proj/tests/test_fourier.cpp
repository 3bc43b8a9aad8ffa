#include "gpscale/fourier.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "gpscale/dense.hpp"
#include "gpscale/fft.hpp"
#include "gpscale/kernels.hpp"
#include "oracles.hpp"

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using gpscale::CholeskyGp;
using gpscale::Spectrum1D;
using gpscale::Spectrum2D;

namespace {

Spectrum1D random_spectrum(std::mt19937_64& gen, Eigen::Index n) {
  return Spectrum1D{oracles::random_vector(gen, n / 2 + 1, 0.1, 2.0), n, 1.0};
}

Spectrum2D random_spectrum_2d(std::mt19937_64& gen, Eigen::Index n1, Eigen::Index n2) {
  // Fold the first axis so rows xi1 and n1 - xi1 carry equal power.
  MatrixXd vals(n1, n2 / 2 + 1);
  for (Eigen::Index x1 = 0; x1 <= n1 / 2; ++x1) {
    const VectorXd row = oracles::random_vector(gen, n2 / 2 + 1, 0.1, 2.0);
    vals.row(x1) = row.transpose();
    if (x1 > 0 && x1 < n1 - x1) vals.row(n1 - x1) = row.transpose();
  }
  return Spectrum2D{vals, n1, n2, {1.0, 1.0}};
}

TEST(PackRfft, EvenLayout) {
  VectorXcd c(3);
  c << 4.0, 0.0, 0.0;
  VectorXd p = gpscale::pack_rfft(c, 4);
  ASSERT_EQ(p.size(), 4);
  EXPECT_EQ(p[0], 4.0);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_EQ(p[2], 0.0);
  EXPECT_EQ(p[3], 0.0);
}

TEST(PackRfft, OddLayout) {
  VectorXcd c(3);
  c << std::complex<double>(5.0, 0.0), std::complex<double>(1.0, 2.0),
      std::complex<double>(3.0, -1.0);
  VectorXd p = gpscale::pack_rfft(c, 5);
  ASSERT_EQ(p.size(), 5);
  EXPECT_EQ(p[0], 5.0);
  EXPECT_EQ(p[1], 1.0);
  EXPECT_EQ(p[2], 3.0);
  EXPECT_EQ(p[3], 2.0);
  EXPECT_EQ(p[4], -1.0);
}

TEST(PackRfft, BijectionWithRealSpectra) {
  auto gen = oracles::rng(301);
  for (Eigen::Index n : {1, 2, 7, 8, 9}) {
    // Packed-side round trip is exact: pack restores every stored real.
    VectorXd p = oracles::random_vector(gen, n, -2.0, 2.0);
    VectorXd back_p = gpscale::pack_rfft(gpscale::unpack_rfft(p, n), n);
    EXPECT_EQ((back_p - p).cwiseAbs().maxCoeff(), 0.0) << "n = " << n;
    // Spectrum-side round trip forces the (already ~1e-16) DC/Nyquist
    // imaginary parts to exactly zero.
    VectorXcd c = gpscale::rfft(oracles::random_vector(gen, n, -2.0, 2.0));
    VectorXcd back_c = gpscale::unpack_rfft(gpscale::pack_rfft(c, n), n);
    EXPECT_LT((back_c - c).cwiseAbs().maxCoeff(), 1e-14) << "n = " << n;
    EXPECT_EQ(back_c[0].imag(), 0.0);
  }
}

TEST(PackRfft, RejectsSymmetryViolation) {
  VectorXcd c(3);
  c << std::complex<double>(1.0, 0.7), 0.0, 0.0;
  EXPECT_THROW(gpscale::pack_rfft(c, 4), std::invalid_argument);
}

TEST(CoefficientScales, FlatSpectrumN4) {
  Spectrum1D spec{VectorXd::Ones(3), 4, 1.0};
  VectorXd s = gpscale::coefficient_scales(spec);
  ASSERT_EQ(s.size(), 4);
  EXPECT_NEAR(s[0], 2.0, 1e-14);
  EXPECT_NEAR(s[1], std::numbers::sqrt2, 1e-14);
  EXPECT_NEAR(s[2], 2.0, 1e-14);
  EXPECT_NEAR(s[3], std::numbers::sqrt2, 1e-14);
}

TEST(CoefficientScales, DoubleSigmaDoublesScales) {
  auto a = gpscale::se_spectrum_1d(16, 1.0, 0.2, 1.0);
  auto b = gpscale::se_spectrum_1d(16, 2.0, 0.2, 1.0);
  VectorXd sa = gpscale::coefficient_scales(a);
  VectorXd sb = gpscale::coefficient_scales(b);
  for (Eigen::Index i = 0; i < sa.size(); ++i) EXPECT_NEAR(sb[i] / sa[i], 2.0, 1e-12);
}

TEST(CoefficientScales, TotalPowerMatchesKernelRow) {
  // Parseval weighting: paired (non-self-conjugate) packed entries count
  // twice, so n k~_0 + 2 sum_int 2 (n k~/2) + n k~_nyq = n^2 row(0).
  auto gen = oracles::rng(307);
  for (Eigen::Index n : {6, 9}) {
    Spectrum1D spec = random_spectrum(gen, n);
    VectorXd s = gpscale::coefficient_scales(spec);
    double total = 0.0;
    for (Eigen::Index pos = 0; pos < n; ++pos) {
      const bool self = pos == 0 || (n % 2 == 0 && pos == n / 2);
      total += (self ? 1.0 : 2.0) * s[pos] * s[pos];
    }
    const double row0 = gpscale::periodic_kernel_row(spec)[0];
    EXPECT_NEAR(total, static_cast<double>(n) * static_cast<double>(n) * row0, 1e-10 * total)
        << "n = " << n;
  }
}

TEST(CoefficientScales, RejectsNonPositiveSpectrum) {
  Spectrum1D spec{VectorXd::Zero(3), 4, 1.0};
  EXPECT_THROW(gpscale::coefficient_scales(spec), std::invalid_argument);
}

TEST(PackedLogDet, MatchesNumericalDeterminant1d) {
  for (Eigen::Index n = 1; n <= 10; ++n) {
    MatrixXd A(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      VectorXd e = VectorXd::Zero(n);
      e[j] = 1.0;
      A.col(j) = gpscale::pack_rfft(gpscale::rfft(e), n);
    }
    const double want = std::log(std::abs(A.fullPivLu().determinant()));
    EXPECT_NEAR(gpscale::packed_rfft_log_abs_det(n), want, 1e-9) << "n = " << n;
  }
}

TEST(PackedLogDet, MatchesNumericalDeterminant2d) {
  const std::pair<Eigen::Index, Eigen::Index> shapes[] = {{1, 1}, {2, 2}, {3, 4}, {3, 5}, {1, 7}};
  for (auto [n1, n2] : shapes) {
    const Eigen::Index n = n1 * n2;
    MatrixXd A(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      MatrixXd e = MatrixXd::Zero(n1, n2);
      e(j / n2, j % n2) = 1.0;
      A.col(j) = oracles::vectorize_rows(gpscale::pack_rfft2(gpscale::rfft2(e), n1, n2));
    }
    const double want = std::log(std::abs(A.fullPivLu().determinant()));
    EXPECT_NEAR(gpscale::packed_rfft2_log_abs_det(n1, n2), want, 1e-9) << n1 << "x" << n2;
  }
}

TEST(FourierLpdf, SinglePointIsUnivariateNormal) {
  Spectrum1D spec{VectorXd::Constant(1, 1.7), 1, 1.0};
  VectorXd f(1), loc(1);
  f << 0.9;
  loc << 0.2;
  const double want =
      -0.5 * std::log(2.0 * std::numbers::pi * 1.7) - 0.5 * 0.49 / 1.7;
  EXPECT_NEAR(gpscale::fourier_lpdf(f, loc, spec), want, 1e-12);
}

TEST(FourierLpdf, FlatSpectrumIsIndependentNormals) {
  const double s2 = 2.25;
  Spectrum1D spec{VectorXd::Constant(3, s2), 4, 1.0};
  auto gen = oracles::rng(311);
  VectorXd f = oracles::random_vector(gen, 4, -2.0, 2.0);
  VectorXd loc = oracles::random_vector(gen, 4);
  double want = 0.0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double r = f[i] - loc[i];
    want += -0.5 * std::log(2.0 * std::numbers::pi * s2) - 0.5 * r * r / s2;
  }
  EXPECT_NEAR(gpscale::fourier_lpdf(f, loc, spec), want, 1e-10);
}

TEST(FourierLpdf, MatchesDenseCirculantOracle) {
  auto gen = oracles::rng(313);
  for (Eigen::Index n : {6, 7}) {
    Spectrum1D spec = random_spectrum(gen, n);
    MatrixXd K = oracles::circulant(gpscale::periodic_kernel_row(spec));
    auto gp = CholeskyGp::from_covariance(VectorXd::Zero(n), K, 0.0);
    for (int trial = 0; trial < 10; ++trial) {
      VectorXd f = oracles::random_vector(gen, n, -3.0, 3.0);
      EXPECT_NEAR(gpscale::fourier_lpdf(f, VectorXd::Zero(n), spec), gpscale::dense_lpdf(f, gp),
                  1e-8)
          << "n = " << n;
    }
  }
}

TEST(FourierLpdf, ExactForAllSmallSizes) {
  auto gen = oracles::rng(317);
  for (Eigen::Index n = 1; n <= 16; ++n) {
    Spectrum1D spec = random_spectrum(gen, n);
    MatrixXd K = oracles::circulant(gpscale::periodic_kernel_row(spec));
    auto gp = CholeskyGp::from_covariance(VectorXd::Zero(n), K, 0.0);
    VectorXd f = oracles::random_vector(gen, n, -2.0, 2.0);
    EXPECT_NEAR(gpscale::fourier_lpdf(f, VectorXd::Zero(n), spec), gpscale::dense_lpdf(f, gp),
                1e-8)
        << "n = " << n;
  }
}

TEST(FourierLpdf, RejectsNonPositiveSpectrum) {
  VectorXd vals(3);
  vals << 1.0, 0.0, 1.0;
  Spectrum1D spec{vals, 4, 1.0};
  EXPECT_THROW(gpscale::fourier_lpdf(VectorXd::Zero(4), VectorXd::Zero(4), spec),
               std::invalid_argument);
}

TEST(FourierInvTransform, ZeroMapsToLoc) {
  auto gen = oracles::rng(331);
  Spectrum1D spec = random_spectrum(gen, 8);
  VectorXd loc = oracles::random_vector(gen, 8);
  VectorXd f = gpscale::fourier_inv_transform(VectorXd::Zero(8), loc, spec);
  EXPECT_LT((f - loc).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(FourierInvTransform, SinglePoint) {
  Spectrum1D spec{VectorXd::Constant(1, 2.56), 1, 1.0};
  VectorXd z(1), loc(1);
  z << 1.5;
  loc << 0.3;
  VectorXd f = gpscale::fourier_inv_transform(z, loc, spec);
  EXPECT_NEAR(f[0], 0.3 + 1.6 * 1.5, 1e-12);
}

TEST(FourierInvTransform, MonteCarloCovarianceMatchesKernelRow) {
  auto gen = oracles::rng(337);
  const Eigen::Index n = 8;
  auto spec = gpscale::se_spectrum_1d(n, 1.0, 0.15, 1.0);
  MatrixXd K = oracles::circulant(gpscale::periodic_kernel_row(spec));
  std::normal_distribution<double> normal(0.0, 1.0);
  const int draws = 20000;
  MatrixXd sum2 = MatrixXd::Zero(n, n);
  VectorXd sum = VectorXd::Zero(n);
  for (int s = 0; s < draws; ++s) {
    VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(gen);
    VectorXd f = gpscale::fourier_inv_transform(z, VectorXd::Zero(n), spec);
    sum += f;
    sum2 += f * f.transpose();
  }
  MatrixXd emp = sum2 / draws - (sum / draws) * (sum / draws).transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double se = std::sqrt((K(i, i) * K(j, j) + K(i, j) * K(i, j)) / draws);
      EXPECT_LT(std::abs(emp(i, j) - K(i, j)), 5.0 * se) << i << "," << j;
    }
  }
}

TEST(FourierInvTransform, LinearInZ) {
  auto gen = oracles::rng(347);
  const Eigen::Index n = 9;
  Spectrum1D spec = random_spectrum(gen, n);
  VectorXd loc = oracles::random_vector(gen, n);
  VectorXd z1 = oracles::random_vector(gen, n);
  VectorXd z2 = oracles::random_vector(gen, n);
  const double a = 0.7, b = -1.3;
  VectorXd lhs = gpscale::fourier_inv_transform(a * z1 + b * z2, loc, spec);
  VectorXd rhs = a * gpscale::fourier_inv_transform(z1, VectorXd::Zero(n), spec) +
                 b * gpscale::fourier_inv_transform(z2, VectorXd::Zero(n), spec) + loc;
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FourierWhiten, RoundTripsAndLocFixedPoint) {
  auto gen = oracles::rng(349);
  for (Eigen::Index n : {2, 8, 9}) {
    Spectrum1D spec = random_spectrum(gen, n);
    VectorXd loc = oracles::random_vector(gen, n);
    VectorXd f = oracles::random_vector(gen, n, -3.0, 3.0);
    VectorXd back = gpscale::fourier_inv_transform(gpscale::fourier_whiten(f, loc, spec), loc, spec);
    EXPECT_LT((back - f).cwiseAbs().maxCoeff(), 1e-10) << "n = " << n;
    EXPECT_LT(gpscale::fourier_whiten(loc, loc, spec).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(FourierWhiten, ChangeOfVariablesAgainstDenseOracle) {
  auto gen = oracles::rng(353);
  const Eigen::Index n = 7;
  Spectrum1D spec = random_spectrum(gen, n);
  MatrixXd K = oracles::circulant(gpscale::periodic_kernel_row(spec));
  auto gp = CholeskyGp::from_covariance(VectorXd::Zero(n), K, 0.0);
  for (int trial = 0; trial < 5; ++trial) {
    VectorXd f = oracles::random_vector(gen, n, -2.0, 2.0);
    VectorXd z = gpscale::fourier_whiten(f, VectorXd::Zero(n), spec);
    const double std_normal =
        -0.5 * z.squaredNorm() - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    const double constant = gpscale::fourier_lpdf(f, VectorXd::Zero(n), spec) - std_normal;
    // The offset depends only on (spectrum, n); check it against the dense value.
    EXPECT_NEAR(gpscale::dense_lpdf(f, gp) - std_normal, constant, 1e-9);
  }
}

TEST(Fourier2d, SingleCellIsUnivariate) {
  Spectrum2D spec{MatrixXd::Constant(1, 1, 0.81), 1, 1, {1.0, 1.0}};
  MatrixXd f(1, 1), loc(1, 1);
  f << 1.1;
  loc << 0.4;
  const double want = -0.5 * std::log(2.0 * std::numbers::pi * 0.81) - 0.5 * 0.49 / 0.81;
  EXPECT_NEAR(gpscale::fourier_lpdf_2d(f, loc, spec), want, 1e-12);
}

TEST(Fourier2d, FlatSpectrumIsIndependentNormals) {
  const double s2 = 1.44;
  Spectrum2D spec{MatrixXd::Constant(3, 3, s2), 3, 4, {1.0, 1.0}};
  auto gen = oracles::rng(359);
  MatrixXd f = oracles::random_matrix(gen, 3, 4, -2.0, 2.0);
  double want = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      want += -0.5 * std::log(2.0 * std::numbers::pi * s2) - 0.5 * f(i, j) * f(i, j) / s2;
    }
  }
  EXPECT_NEAR(gpscale::fourier_lpdf_2d(f, MatrixXd::Zero(3, 4), spec), want, 1e-10);
}

TEST(Fourier2d, MatchesDenseBlockCirculantOracle) {
  auto gen = oracles::rng(367);
  const std::pair<Eigen::Index, Eigen::Index> shapes[] = {{3, 4}, {3, 5}, {4, 6}};
  for (auto [n1, n2] : shapes) {
    Spectrum2D spec = random_spectrum_2d(gen, n1, n2);
    MatrixXd row2d = gpscale::irfft2(spec.values.cast<std::complex<double>>(), n1, n2);
    MatrixXd K = oracles::block_circulant(row2d);
    auto gp = CholeskyGp::from_covariance(VectorXd::Zero(n1 * n2), K, 0.0);
    for (int trial = 0; trial < 5; ++trial) {
      MatrixXd f = oracles::random_matrix(gen, n1, n2, -2.0, 2.0);
      const double want = gpscale::dense_lpdf(oracles::vectorize_rows(f), gp);
      EXPECT_NEAR(gpscale::fourier_lpdf_2d(f, MatrixXd::Zero(n1, n2), spec), want, 1e-8)
          << n1 << "x" << n2;
    }
  }
}

TEST(Fourier2d, TransformZeroMapsToLocAndRoundTrips) {
  auto gen = oracles::rng(373);
  const Eigen::Index n1 = 4, n2 = 6;
  Spectrum2D spec = random_spectrum_2d(gen, n1, n2);
  MatrixXd loc = oracles::random_matrix(gen, n1, n2);
  MatrixXd f0 = gpscale::fourier_inv_transform_2d(MatrixXd::Zero(n1, n2), loc, spec);
  EXPECT_LT((f0 - loc).cwiseAbs().maxCoeff(), 1e-13);
  MatrixXd f = oracles::random_matrix(gen, n1, n2, -3.0, 3.0);
  MatrixXd back =
      gpscale::fourier_inv_transform_2d(gpscale::fourier_whiten_2d(f, loc, spec), loc, spec);
  EXPECT_LT((back - f).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fourier2d, MonteCarloCovariance4x4) {
  auto gen = oracles::rng(379);
  const Eigen::Index n1 = 4, n2 = 4;
  auto spec = gpscale::se_spectrum_2d(n1, n2, 1.0, {0.3, 0.3}, {4.0, 4.0});
  MatrixXd row2d = gpscale::irfft2(spec.values.cast<std::complex<double>>(), n1, n2);
  MatrixXd K = oracles::block_circulant(row2d);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int draws = 20000;
  const Eigen::Index n = n1 * n2;
  MatrixXd sum2 = MatrixXd::Zero(n, n);
  VectorXd sum = VectorXd::Zero(n);
  for (int s = 0; s < draws; ++s) {
    MatrixXd z(n1, n2);
    for (Eigen::Index i = 0; i < n1; ++i)
      for (Eigen::Index j = 0; j < n2; ++j) z(i, j) = normal(gen);
    VectorXd f =
        oracles::vectorize_rows(gpscale::fourier_inv_transform_2d(z, MatrixXd::Zero(n1, n2), spec));
    sum += f;
    sum2 += f * f.transpose();
  }
  MatrixXd emp = sum2 / draws - (sum / draws) * (sum / draws).transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double se = std::sqrt((K(i, i) * K(j, j) + K(i, j) * K(i, j)) / draws);
      EXPECT_LT(std::abs(emp(i, j) - K(i, j)), 5.0 * se) << i << "," << j;
    }
  }
}

TEST(TruncatedBasis, DcOnlyGivesConstantShift) {
  auto spec = gpscale::se_spectrum_1d(12, 1.0, 0.2, 1.0);
  gpscale::TruncatedBasis basis(spec, 1);
  EXPECT_EQ(basis.latent_size, 1);
  VectorXd z(1);
  z << 1.3;
  VectorXd loc = VectorXd::Constant(12, 0.5);
  VectorXd f = gpscale::truncated_inv_transform(z, loc, basis);
  for (Eigen::Index j = 1; j < 12; ++j) EXPECT_NEAR(f[j], f[0], 1e-12);
  EXPECT_GT(std::abs(f[0] - 0.5), 0.0);
}

TEST(TruncatedBasis, RetainedPowerSeVsMatern) {
  // Fig. 1b/1c regime: six modes carry >= 99.9% of SE power but less of the
  // heavier-tailed Matern 3/2 power.
  auto se = gpscale::se_spectrum_1d(102, 1.0, 0.2, 1.0);
  gpscale::TruncatedBasis se_basis(se, 6);
  EXPECT_GE(se_basis.retained_power_fraction, 0.999);
  auto matern = gpscale::matern_spectrum_1d(102, 1.5, 1.0, 0.2, 1.0);
  gpscale::TruncatedBasis matern_basis(matern, 6);
  EXPECT_LT(matern_basis.retained_power_fraction, 0.999);
}

TEST(TruncatedBasis, FullModeCountReproducesInvTransform) {
  auto gen = oracles::rng(383);
  for (Eigen::Index n : {8, 9}) {
    Spectrum1D spec = random_spectrum(gen, n);
    gpscale::TruncatedBasis basis(spec, n / 2 + 1);
    EXPECT_EQ(basis.latent_size, n);
    EXPECT_NEAR(basis.retained_power_fraction, 1.0, 1e-12);
    VectorXd z = oracles::random_vector(gen, n);
    VectorXd loc = oracles::random_vector(gen, n);
    VectorXd full = gpscale::fourier_inv_transform(z, loc, spec);
    VectorXd trunc = gpscale::truncated_inv_transform(z, loc, basis);
    EXPECT_LT((full - trunc).cwiseAbs().maxCoeff(), 1e-12) << "n = " << n;
  }
}

TEST(TruncatedBasis, RejectsOutOfRangeModeCount) {
  auto spec = gpscale::se_spectrum_1d(8, 1.0, 0.2, 1.0);
  EXPECT_THROW(gpscale::TruncatedBasis(spec, 0), std::invalid_argument);
  EXPECT_THROW(gpscale::TruncatedBasis(spec, 6), std::invalid_argument);
}

TEST(FourierGrad, MatchesFiniteDifferences1d) {
  auto gen = oracles::rng(389);
  for (Eigen::Index n : {8, 9}) {
    Spectrum1D spec = random_spectrum(gen, n);
    VectorXd loc = oracles::random_vector(gen, n);
    VectorXd f = oracles::random_vector(gen, n, -2.0, 2.0);
    VectorXd grad = gpscale::fourier_lpdf_grad(f, loc, spec);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = 1e-6;
      VectorXd fp = f, fm = f;
      fp[i] += h;
      fm[i] -= h;
      const double fd =
          (gpscale::fourier_lpdf(fp, loc, spec) - gpscale::fourier_lpdf(fm, loc, spec)) /
          (2.0 * h);
      EXPECT_NEAR(grad[i], fd, 1e-6 * std::max(1.0, std::abs(fd))) << "n=" << n << " i=" << i;
    }
  }
}

TEST(FourierGrad, ZeroAtLoc) {
  auto gen = oracles::rng(397);
  Spectrum1D spec = random_spectrum(gen, 8);
  VectorXd loc = oracles::random_vector(gen, 8);
  EXPECT_LT(gpscale::fourier_lpdf_grad(loc, loc, spec).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FourierAdjoint, MatchesFiniteDifferences1d) {
  auto gen = oracles::rng(401);
  const Eigen::Index n = 9;
  Spectrum1D spec = random_spectrum(gen, n);
  VectorXd loc = oracles::random_vector(gen, n);
  VectorXd g = oracles::random_vector(gen, n);
  VectorXd z = oracles::random_vector(gen, n);
  VectorXd adj = gpscale::adjoint_inv_transform(g, spec);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = 1e-6;
    VectorXd zp = z, zm = z;
    zp[i] += h;
    zm[i] -= h;
    const double fd = (g.dot(gpscale::fourier_inv_transform(zp, loc, spec)) -
                       g.dot(gpscale::fourier_inv_transform(zm, loc, spec))) /
                      (2.0 * h);
    EXPECT_NEAR(adj[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
  EXPECT_EQ(gpscale::adjoint_inv_transform(VectorXd::Zero(n), spec).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FourierGrad, MatchesFiniteDifferences2d) {
  auto gen = oracles::rng(409);
  const Eigen::Index n1 = 4, n2 = 6;
  Spectrum2D spec = random_spectrum_2d(gen, n1, n2);
  MatrixXd loc = oracles::random_matrix(gen, n1, n2);
  MatrixXd f = oracles::random_matrix(gen, n1, n2, -2.0, 2.0);
  MatrixXd grad = gpscale::fourier_lpdf_grad_2d(f, loc, spec);
  for (Eigen::Index i = 0; i < n1; ++i) {
    for (Eigen::Index j = 0; j < n2; ++j) {
      const double h = 1e-6;
      MatrixXd fp = f, fm = f;
      fp(i, j) += h;
      fm(i, j) -= h;
      const double fd =
          (gpscale::fourier_lpdf_2d(fp, loc, spec) - gpscale::fourier_lpdf_2d(fm, loc, spec)) /
          (2.0 * h);
      EXPECT_NEAR(grad(i, j), fd, 1e-6 * std::max(1.0, std::abs(fd))) << i << "," << j;
    }
  }
}

TEST(FourierAdjoint, MatchesFiniteDifferences2d) {
  auto gen = oracles::rng(419);
  const Eigen::Index n1 = 3, n2 = 4;
  Spectrum2D spec = random_spectrum_2d(gen, n1, n2);
  MatrixXd loc = MatrixXd::Zero(n1, n2);
  MatrixXd g = oracles::random_matrix(gen, n1, n2);
  MatrixXd z = oracles::random_matrix(gen, n1, n2);
  MatrixXd adj = gpscale::adjoint_inv_transform_2d(g, spec);
  for (Eigen::Index i = 0; i < n1; ++i) {
    for (Eigen::Index j = 0; j < n2; ++j) {
      const double h = 1e-6;
      MatrixXd zp = z, zm = z;
      zp(i, j) += h;
      zm(i, j) -= h;
      const double fd =
          ((g.array() * gpscale::fourier_inv_transform_2d(zp, loc, spec).array()).sum() -
           (g.array() * gpscale::fourier_inv_transform_2d(zm, loc, spec).array()).sum()) /
          (2.0 * h);
      EXPECT_NEAR(adj(i, j), fd, 1e-6 * std::max(1.0, std::abs(fd))) << i << "," << j;
    }
  }
}

TEST(Fourier2d, PackRejectsAsymmetricColumns) {
  // Column 0 of a real signal's spectrum must be conjugate symmetric along
  // the rows.
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(4, 3);
  c(1, 0) = std::complex<double>(1.0, 2.0);
  c(3, 0) = std::complex<double>(1.0, 2.0);  // should be the conjugate
  EXPECT_THROW(gpscale::pack_rfft2(c, 4, 4), std::invalid_argument);
  EXPECT_THROW(gpscale::unpack_rfft2(MatrixXd::Zero(3, 3), 4, 4), std::invalid_argument);
}

TEST(FourierLpdf, RejectsLengthMismatch) {
  auto spec = gpscale::se_spectrum_1d(8, 1.0, 0.2, 1.0);
  EXPECT_THROW(gpscale::fourier_lpdf(VectorXd::Zero(7), VectorXd::Zero(8), spec),
               std::invalid_argument);
  EXPECT_THROW(gpscale::fourier_inv_transform(VectorXd::Zero(8), VectorXd::Zero(9), spec),
               std::invalid_argument);
}

TEST(PadGrid, PaperShapes) {
  gpscale::MaskedGrid grid;
  grid.values = MatrixXd::Ones(25, 50);
  grid.mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(25, 50, true);
  auto padded = gpscale::pad_grid(grid, 10, 10);
  EXPECT_EQ(padded.values.rows(), 35);
  EXPECT_EQ(padded.values.cols(), 60);
  EXPECT_EQ(padded.observed_count(), 25 * 50);
  EXPECT_EQ(padded.values.topLeftCorner(25, 50), grid.values);
  // Padded cells are missing; mask count grows by exactly the added area.
  EXPECT_EQ((35 * 60) - padded.observed_count(), 35 * 60 - 25 * 50);
}

TEST(PadGrid, ZeroPadIsIdentity) {
  gpscale::MaskedGrid grid;
  grid.values = MatrixXd::Random(4, 5);
  grid.mask = grid.values.array() > 0.0;
  auto padded = gpscale::pad_grid(grid, 0, 0);
  EXPECT_EQ(padded.values, grid.values);
  EXPECT_EQ(padded.mask, grid.mask);
}

}  // namespace
