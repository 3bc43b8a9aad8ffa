#ifndef GPSCALE_FFT_HPP
#define GPSCALE_FFT_HPP

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gpscale {

// Transform convention used throughout the library:
//
//   forward:  c_xi = sum_j exp(-2 pi i xi j / n) x_j        (unnormalized)
//   inverse:  x_j  = (1/n) sum_xi exp(+2 pi i xi j / n) c_xi
//
// Real-input transforms retain frequencies 0..n/2 only; the negative half is
// implied by conjugate symmetry. 2D transforms keep the half spectrum along
// the second (column) axis; the first axis retains all n1 frequencies.

namespace fft_detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

// In-place iterative radix-2 transform; sign -1 forward, +1 inverse.
// Neither direction applies the 1/n normalization.
inline void fft_pow2(std::vector<std::complex<double>>& a, int sign) {
  const std::size_t n = a.size();
  if (n < 2) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // One twiddle table for all stages keeps the per-root error at machine
  // precision instead of accumulating through repeated multiplication.
  std::vector<std::complex<double>> w(n / 2);
  const double step = sign * 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n / 2; ++k) {
    w[k] = std::polar(1.0, step * static_cast<double>(k));
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w[j * stride];
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
      }
    }
  }
}

// Bluestein chirp-z transform for arbitrary lengths, built on a power-of-two
// circular convolution. Exponent arguments are reduced mod 2n before calling
// polar so large indices do not lose precision.
inline void dft_bluestein(std::vector<std::complex<double>>& a, int sign) {
  const std::size_t n = a.size();
  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<std::complex<double>> chirp(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t j2 = (j * j) % (2 * n);
    chirp[j] = std::polar(
        1.0, sign * std::numbers::pi * static_cast<double>(j2) / static_cast<double>(n));
  }
  std::vector<std::complex<double>> p(m, {0.0, 0.0});
  std::vector<std::complex<double>> q(m, {0.0, 0.0});
  for (std::size_t j = 0; j < n; ++j) p[j] = a[j] * chirp[j];
  q[0] = std::conj(chirp[0]);
  for (std::size_t j = 1; j < n; ++j) q[j] = q[m - j] = std::conj(chirp[j]);
  fft_pow2(p, -1);
  fft_pow2(q, -1);
  for (std::size_t j = 0; j < m; ++j) p[j] *= q[j];
  fft_pow2(p, +1);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = chirp[k] * p[k] * scale;
}

inline void dft(std::vector<std::complex<double>>& a, int sign) {
  if (a.size() < 2) return;
  if (is_pow2(a.size())) {
    fft_pow2(a, sign);
  } else {
    dft_bluestein(a, sign);
  }
}

}  // namespace fft_detail

inline Eigen::VectorXcd rfft(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 1) throw std::invalid_argument("rfft: input length must be >= 1");
  if (!x.allFinite()) throw std::invalid_argument("rfft: input must be finite");
  std::vector<std::complex<double>> a(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) a[static_cast<std::size_t>(j)] = x[j];
  fft_detail::dft(a, -1);
  Eigen::VectorXcd c(n / 2 + 1);
  for (Eigen::Index k = 0; k <= n / 2; ++k) c[k] = a[static_cast<std::size_t>(k)];
  return c;
}

inline Eigen::VectorXd irfft(const Eigen::VectorXcd& c, Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("irfft: output length must be >= 1");
  if (c.size() != n / 2 + 1) {
    throw std::invalid_argument("irfft: spectrum length must equal n/2 + 1");
  }
  if (!c.allFinite()) throw std::invalid_argument("irfft: spectrum must be finite");
  const double tol = 1e-9 * std::max(1.0, c.cwiseAbs().maxCoeff());
  if (std::abs(c[0].imag()) > tol) {
    throw std::invalid_argument("irfft: DC coefficient must have zero imaginary part");
  }
  if (n % 2 == 0 && std::abs(c[n / 2].imag()) > tol) {
    throw std::invalid_argument("irfft: Nyquist coefficient must have zero imaginary part");
  }
  std::vector<std::complex<double>> a(static_cast<std::size_t>(n));
  a[0] = c[0].real();
  for (Eigen::Index k = 1; k <= n / 2; ++k) {
    std::complex<double> v = c[k];
    if (n % 2 == 0 && k == n / 2) v = v.real();
    a[static_cast<std::size_t>(k)] = v;
    if (k < n - k) a[static_cast<std::size_t>(n - k)] = std::conj(v);
  }
  fft_detail::dft(a, +1);
  Eigen::VectorXd out(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (Eigen::Index j = 0; j < n; ++j) out[j] = a[static_cast<std::size_t>(j)].real() * scale;
  return out;
}

inline Eigen::MatrixXcd rfft2(const Eigen::MatrixXd& x) {
  const Eigen::Index n1 = x.rows();
  const Eigen::Index n2 = x.cols();
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("rfft2: input shape must be >= 1 x 1");
  if (!x.allFinite()) throw std::invalid_argument("rfft2: input must be finite");
  Eigen::MatrixXcd c(n1, n2 / 2 + 1);
  for (Eigen::Index i = 0; i < n1; ++i) {
    c.row(i) = rfft(x.row(i).transpose()).transpose();
  }
  std::vector<std::complex<double>> col(static_cast<std::size_t>(n1));
  for (Eigen::Index k = 0; k < c.cols(); ++k) {
    for (Eigen::Index i = 0; i < n1; ++i) col[static_cast<std::size_t>(i)] = c(i, k);
    fft_detail::dft(col, -1);
    for (Eigen::Index i = 0; i < n1; ++i) c(i, k) = col[static_cast<std::size_t>(i)];
  }
  return c;
}

inline Eigen::MatrixXd irfft2(const Eigen::MatrixXcd& c, Eigen::Index n1, Eigen::Index n2) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("irfft2: output shape must be >= 1 x 1");
  if (c.rows() != n1 || c.cols() != n2 / 2 + 1) {
    throw std::invalid_argument("irfft2: spectrum shape must equal n1 x (n2/2 + 1)");
  }
  if (!c.allFinite()) throw std::invalid_argument("irfft2: spectrum must be finite");
  Eigen::MatrixXcd d = c;
  std::vector<std::complex<double>> col(static_cast<std::size_t>(n1));
  const double scale = 1.0 / static_cast<double>(n1);
  for (Eigen::Index k = 0; k < d.cols(); ++k) {
    for (Eigen::Index i = 0; i < n1; ++i) col[static_cast<std::size_t>(i)] = d(i, k);
    fft_detail::dft(col, +1);
    for (Eigen::Index i = 0; i < n1; ++i) d(i, k) = col[static_cast<std::size_t>(i)] * scale;
  }
  Eigen::MatrixXd out(n1, n2);
  for (Eigen::Index i = 0; i < n1; ++i) {
    out.row(i) = irfft(d.row(i).transpose(), n2).transpose();
  }
  return out;
}

}  // namespace gpscale

#endif  // GPSCALE_FFT_HPP
