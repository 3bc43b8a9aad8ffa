#ifndef GPSCALE_KERNELS_HPP
#define GPSCALE_KERNELS_HPP

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "gpscale/fft.hpp"

namespace gpscale {

// Thrown when a parameter value is outside what a code path implements (as
// opposed to being malformed). Real-domain Matern evaluation only covers the
// half-integer closed forms; other smoothness values are served by the
// Fourier-domain spectra.
struct UnsupportedParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class KernelFamily { SquaredExponential, Matern };

// Stationary covariance kernel with marginal scale sigma and per-dimension
// correlation lengths. Anisotropy enters through the rescaled distance
// r^2 = sum_d (dx_d / ell_d)^2.
struct Kernel {
  KernelFamily family = KernelFamily::SquaredExponential;
  double sigma = 1.0;
  std::vector<double> length_scales{1.0};
  double nu = 1.5;  // Matern only

  static Kernel squared_exponential(double sigma, std::vector<double> length_scales) {
    Kernel k{KernelFamily::SquaredExponential, sigma, std::move(length_scales), 0.0};
    k.validate();
    return k;
  }
  static Kernel squared_exponential(double sigma, double ell) {
    return squared_exponential(sigma, std::vector<double>{ell});
  }
  static Kernel matern(double nu, double sigma, std::vector<double> length_scales) {
    Kernel k{KernelFamily::Matern, sigma, std::move(length_scales), nu};
    k.validate();
    return k;
  }
  static Kernel matern(double nu, double sigma, double ell) {
    return matern(nu, sigma, std::vector<double>{ell});
  }

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("kernel: sigma must be positive");
    if (length_scales.empty()) {
      throw std::invalid_argument("kernel: at least one length scale required");
    }
    for (double ell : length_scales) {
      if (!(ell > 0.0)) throw std::invalid_argument("kernel: length scales must be positive");
    }
    if (family == KernelFamily::Matern && !(nu > 0.0)) {
      throw std::invalid_argument("kernel: nu must be positive");
    }
  }

  bool real_domain_supported() const {
    if (family == KernelFamily::SquaredExponential) return true;
    return nu == 0.5 || nu == 1.5 || nu == 2.5;
  }

  // Covariance between two points. Dimensions must match the number of
  // length scales.
  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
};

inline double se_cov(double distance, double sigma, double ell) {
  if (!(sigma > 0.0)) throw std::invalid_argument("se_cov: sigma must be positive");
  if (!(ell > 0.0)) throw std::invalid_argument("se_cov: ell must be positive");
  if (!(distance >= 0.0)) throw std::invalid_argument("se_cov: distance must be >= 0");
  const double u = distance / ell;
  return sigma * sigma * std::exp(-0.5 * u * u);
}

// Closed forms for nu in {1/2, 3/2, 5/2} with rescaled distance
// zeta = sqrt(2 nu) |dx| / ell. Other nu values raise UnsupportedParameter;
// use the Fourier-domain spectra for those.
inline double matern_cov(double distance, double sigma, double ell, double nu) {
  if (!(sigma > 0.0)) throw std::invalid_argument("matern_cov: sigma must be positive");
  if (!(ell > 0.0)) throw std::invalid_argument("matern_cov: ell must be positive");
  if (!(distance >= 0.0)) throw std::invalid_argument("matern_cov: distance must be >= 0");
  const double s2 = sigma * sigma;
  if (nu == 0.5) {
    return s2 * std::exp(-distance / ell);
  }
  if (nu == 1.5) {
    const double z = std::numbers::sqrt3 * distance / ell;
    return s2 * (1.0 + z) * std::exp(-z);
  }
  if (nu == 2.5) {
    const double z = std::sqrt(5.0) * distance / ell;
    return s2 * (1.0 + z + z * z / 3.0) * std::exp(-z);
  }
  throw UnsupportedParameter(
      "matern_cov: closed forms cover nu in {1/2, 3/2, 5/2}; evaluate other nu in the "
      "Fourier domain (matern_spectrum_1d / matern_spectrum_2d)");
}

inline double Kernel::operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  const auto p = a.size();
  const bool isotropic = length_scales.size() == 1;
  if (b.size() != p || (!isotropic && static_cast<Eigen::Index>(length_scales.size()) != p)) {
    throw std::invalid_argument("kernel: point dimension does not match length scales");
  }
  double r2 = 0.0;
  for (Eigen::Index d = 0; d < p; ++d) {
    const double ell = length_scales[isotropic ? 0 : static_cast<std::size_t>(d)];
    const double u = (a[d] - b[d]) / ell;
    r2 += u * u;
  }
  if (family == KernelFamily::SquaredExponential) {
    return sigma * sigma * std::exp(-0.5 * r2);
  }
  return matern_cov(std::sqrt(r2), sigma, 1.0, nu);
}

// Discrete power spectrum of a periodic kernel on an n-point grid of period L.
// Entries are variances per frequency, non-negative by construction.
struct Spectrum1D {
  Eigen::VectorXd values;  // length n/2 + 1
  Eigen::Index n = 0;
  double period = 0.0;
};

struct Spectrum2D {
  Eigen::MatrixXd values;  // n1 x (n2/2 + 1), full frequency range along rows
  Eigen::Index n1 = 0;
  Eigen::Index n2 = 0;
  std::array<double, 2> periods{0.0, 0.0};
};

namespace kernel_detail {

inline void check_grid_params(Eigen::Index n, double sigma, double ell, double period,
                              const char* who) {
  if (n < 1) throw std::invalid_argument(std::string(who) + ": n must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument(std::string(who) + ": sigma must be positive");
  if (!(ell > 0.0)) throw std::invalid_argument(std::string(who) + ": ell must be positive");
  if (!(period > 0.0)) throw std::invalid_argument(std::string(who) + ": period must be positive");
}

// First-axis frequencies run over the full range 0..n-1 and fold onto the
// retained half via xi' = min(xi, n - xi).
inline double fold_frequency(Eigen::Index xi, Eigen::Index n) {
  return static_cast<double>(std::min(xi, n - xi));
}

}  // namespace kernel_detail

// k~(xi) = sqrt(2 pi) n sigma^2 ell / L * exp(-2 (pi xi ell / L)^2)
inline Spectrum1D se_spectrum_1d(Eigen::Index n, double sigma, double ell, double period) {
  kernel_detail::check_grid_params(n, sigma, ell, period, "se_spectrum_1d");
  Eigen::VectorXd values(n / 2 + 1);
  const double amp = std::sqrt(2.0 * std::numbers::pi) * static_cast<double>(n) * sigma * sigma *
                     ell / period;
  for (Eigen::Index xi = 0; xi <= n / 2; ++xi) {
    const double u = std::numbers::pi * static_cast<double>(xi) * ell / period;
    values[xi] = amp * std::exp(-2.0 * u * u);
  }
  return Spectrum1D{std::move(values), n, period};
}

// k~(xi) = sigma^2 (n ell / L) (2 pi / nu)^{1/2} Gamma(nu + 1/2) / Gamma(nu)
//          (1 + 2 (pi ell xi)^2 / (nu L^2))^{-(nu + 1/2)}
inline Spectrum1D matern_spectrum_1d(Eigen::Index n, double nu, double sigma, double ell,
                                     double period) {
  kernel_detail::check_grid_params(n, sigma, ell, period, "matern_spectrum_1d");
  if (!(nu > 0.0)) throw std::invalid_argument("matern_spectrum_1d: nu must be positive");
  Eigen::VectorXd values(n / 2 + 1);
  const double amp = sigma * sigma * static_cast<double>(n) * ell / period *
                     std::sqrt(2.0 * std::numbers::pi / nu) *
                     std::exp(std::lgamma(nu + 0.5) - std::lgamma(nu));
  for (Eigen::Index xi = 0; xi <= n / 2; ++xi) {
    const double u = std::numbers::pi * ell * static_cast<double>(xi) / period;
    values[xi] = amp * std::pow(1.0 + 2.0 * u * u / nu, -(nu + 0.5));
  }
  return Spectrum1D{std::move(values), n, period};
}

// Separable product of the per-dimension squared exponential spectra with a
// single sigma^2 factor.
inline Spectrum2D se_spectrum_2d(Eigen::Index n1, Eigen::Index n2, double sigma,
                                 const std::array<double, 2>& length_scales,
                                 const std::array<double, 2>& periods) {
  kernel_detail::check_grid_params(n1, sigma, length_scales[0], periods[0], "se_spectrum_2d");
  kernel_detail::check_grid_params(n2, sigma, length_scales[1], periods[1], "se_spectrum_2d");
  Eigen::MatrixXd values(n1, n2 / 2 + 1);
  const double amp = sigma * sigma * static_cast<double>(n1) * static_cast<double>(n2) *
                     (2.0 * std::numbers::pi) * length_scales[0] * length_scales[1] /
                     (periods[0] * periods[1]);
  for (Eigen::Index x1 = 0; x1 < n1; ++x1) {
    const double u1 =
        std::numbers::pi * kernel_detail::fold_frequency(x1, n1) * length_scales[0] / periods[0];
    for (Eigen::Index x2 = 0; x2 <= n2 / 2; ++x2) {
      const double u2 = std::numbers::pi * static_cast<double>(x2) * length_scales[1] / periods[1];
      values(x1, x2) = amp * std::exp(-2.0 * (u1 * u1 + u2 * u2));
    }
  }
  return Spectrum2D{std::move(values), n1, n2, periods};
}

// Anisotropic Matern spectrum with p = 2: squared rescaled frequencies are
// summed inside the (1 + q^2)^{-(nu+1)} term and the prefactor carries
// ell_1 ell_2 / (L_1 L_2). Reduces to the isotropic p = 2 form when the
// dimensions share ell and L.
inline Spectrum2D matern_spectrum_2d(Eigen::Index n1, Eigen::Index n2, double nu, double sigma,
                                     const std::array<double, 2>& length_scales,
                                     const std::array<double, 2>& periods) {
  kernel_detail::check_grid_params(n1, sigma, length_scales[0], periods[0], "matern_spectrum_2d");
  kernel_detail::check_grid_params(n2, sigma, length_scales[1], periods[1], "matern_spectrum_2d");
  if (!(nu > 0.0)) throw std::invalid_argument("matern_spectrum_2d: nu must be positive");
  Eigen::MatrixXd values(n1, n2 / 2 + 1);
  const double amp = sigma * sigma * static_cast<double>(n1) * static_cast<double>(n2) *
                     length_scales[0] * length_scales[1] / (periods[0] * periods[1]) *
                     (2.0 * std::numbers::pi / nu) * std::exp(std::lgamma(nu + 1.0) - std::lgamma(nu));
  for (Eigen::Index x1 = 0; x1 < n1; ++x1) {
    const double u1 =
        std::numbers::pi * length_scales[0] * kernel_detail::fold_frequency(x1, n1) / periods[0];
    for (Eigen::Index x2 = 0; x2 <= n2 / 2; ++x2) {
      const double u2 = std::numbers::pi * length_scales[1] * static_cast<double>(x2) / periods[1];
      const double q2 = 2.0 * (u1 * u1 + u2 * u2) / nu;
      values(x1, x2) = amp * std::pow(1.0 + q2, -(nu + 1.0));
    }
  }
  return Spectrum2D{std::move(values), n1, n2, periods};
}

// Dense covariance matrix of a real-domain-supported kernel at the given
// points (one point per row).
inline Eigen::MatrixXd cov_matrix(const Kernel& kernel, const Eigen::MatrixXd& points) {
  kernel.validate();
  if (!kernel.real_domain_supported()) {
    throw UnsupportedParameter(
        "cov_matrix: kernel has no closed real-domain form; use the Fourier-domain spectra");
  }
  if (!points.allFinite()) throw std::invalid_argument("cov_matrix: points must be finite");
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = kernel.sigma * kernel.sigma;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double k = kernel(points.row(i).transpose(), points.row(j).transpose());
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

// Real-space circulant kernel row implied by a discrete spectrum:
// row[delta] = irfft(spectrum)[delta]. row[0] approximates the marginal
// variance sigma^2 when ell << L.
inline Eigen::VectorXd periodic_kernel_row(const Spectrum1D& spectrum) {
  if (spectrum.n < 1 || spectrum.values.size() != spectrum.n / 2 + 1) {
    throw std::invalid_argument("periodic_kernel_row: malformed spectrum");
  }
  if (!spectrum.values.allFinite() || (spectrum.values.array() < 0.0).any()) {
    throw std::invalid_argument("periodic_kernel_row: spectrum must be finite and >= 0");
  }
  return irfft(spectrum.values.cast<std::complex<double>>(), spectrum.n);
}

}  // namespace gpscale

#endif  // GPSCALE_KERNELS_HPP
