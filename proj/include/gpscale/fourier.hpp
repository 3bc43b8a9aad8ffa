#ifndef GPSCALE_FOURIER_HPP
#define GPSCALE_FOURIER_HPP

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "gpscale/fft.hpp"
#include "gpscale/grid.hpp"
#include "gpscale/kernels.hpp"

namespace gpscale {

// Packed real layout of a conjugate-symmetric half spectrum, version
// "packed-rfft-v1":
//
//   1D, length n:  [Re c_0, Re c_1, ..., Re c_{n/2}, Im c_1, ..., Im c_{ceil(n/2)-1}]
//
//   2D, shape n1 x n2, built column-wise from the half spectrum C
//   (n1 x (n2/2 + 1)):
//     column 0            -> the 1D packing of C[:, 0] (itself conjugate
//                            symmetric along the rows)
//     interior xi2        -> two columns, Re C[:, xi2] then Im C[:, xi2]
//     column n2/2 (even)  -> the 1D packing of C[:, n2/2]
//
//   Worked 3 x 4 example (C has columns xi2 = 0, 1, 2):
//     P[:,0] = [Re C(0,0), Re C(1,0), Im C(1,0)]
//     P[:,1] = [Re C(0,1), Re C(1,1), Re C(2,1)]
//     P[:,2] = [Im C(0,1), Im C(1,1), Im C(2,1)]
//     P[:,3] = [Re C(0,2), Re C(1,2), Im C(1,2)]
//
// The packing is a linear bijection between n (or n1*n2) reals and the free
// degrees of freedom of the spectrum of a real signal.
inline constexpr const char* packed_layout_version = "packed-rfft-v1";

namespace fourier_detail {

struct PackedIndex {
  Eigen::Index freq = 0;        // frequency 0..n/2 the entry belongs to
  bool self_conjugate = false;  // real coefficient (DC, or Nyquist for even n)
  bool imaginary = false;       // entry stores Im rather than Re
};

inline PackedIndex packed_index(Eigen::Index pos, Eigen::Index n) {
  const Eigen::Index half = n / 2;
  if (pos <= half) {
    const bool self = (pos == 0) || (n % 2 == 0 && pos == half);
    return {pos, self, false};
  }
  return {pos - half, false, true};
}

inline double spectrum_value_checked(double v, const char* who) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(who) +
                                ": spectrum must be strictly positive and finite");
  }
  return v;
}

inline void check_spectrum_shape(const Spectrum1D& s, const char* who) {
  if (s.n < 1 || s.values.size() != s.n / 2 + 1) {
    throw std::invalid_argument(std::string(who) + ": malformed spectrum");
  }
}

inline void check_spectrum_shape(const Spectrum2D& s, const char* who) {
  if (s.n1 < 1 || s.n2 < 1 || s.values.rows() != s.n1 || s.values.cols() != s.n2 / 2 + 1) {
    throw std::invalid_argument(std::string(who) + ": malformed spectrum");
  }
}

}  // namespace fourier_detail

inline Eigen::VectorXd pack_rfft(const Eigen::VectorXcd& c, Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("pack_rfft: n must be >= 1");
  if (c.size() != n / 2 + 1) {
    throw std::invalid_argument("pack_rfft: spectrum length must equal n/2 + 1");
  }
  if (!c.allFinite()) throw std::invalid_argument("pack_rfft: spectrum must be finite");
  const double tol = 1e-9 * std::max(1.0, c.cwiseAbs().maxCoeff());
  if (std::abs(c[0].imag()) > tol) {
    throw std::invalid_argument("pack_rfft: DC coefficient violates real-signal symmetry");
  }
  if (n % 2 == 0 && std::abs(c[n / 2].imag()) > tol) {
    throw std::invalid_argument("pack_rfft: Nyquist coefficient violates real-signal symmetry");
  }
  Eigen::VectorXd p(n);
  for (Eigen::Index i = 0; i <= n / 2; ++i) p[i] = c[i].real();
  for (Eigen::Index k = 1; k + n / 2 < n; ++k) p[n / 2 + k] = c[k].imag();
  return p;
}

inline Eigen::VectorXcd unpack_rfft(const Eigen::VectorXd& p, Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("unpack_rfft: n must be >= 1");
  if (p.size() != n) throw std::invalid_argument("unpack_rfft: packed length must equal n");
  Eigen::VectorXcd c(n / 2 + 1);
  for (Eigen::Index i = 0; i <= n / 2; ++i) {
    const auto idx = fourier_detail::packed_index(i, n);
    const double im = idx.self_conjugate ? 0.0 : p[n / 2 + i];
    c[i] = std::complex<double>(p[i], im);
  }
  return c;
}

// Standard deviations of the packed coefficients of a GP draw: the DC and
// Nyquist entries have variance n k~, interior real and imaginary parts each
// n k~ / 2.
inline Eigen::VectorXd coefficient_scales(const Spectrum1D& spectrum) {
  fourier_detail::check_spectrum_shape(spectrum, "coefficient_scales");
  const Eigen::Index n = spectrum.n;
  Eigen::VectorXd s(n);
  for (Eigen::Index pos = 0; pos < n; ++pos) {
    const auto idx = fourier_detail::packed_index(pos, n);
    const double k = fourier_detail::spectrum_value_checked(spectrum.values[idx.freq],
                                                            "coefficient_scales");
    s[pos] = std::sqrt(static_cast<double>(n) * k * (idx.self_conjugate ? 1.0 : 0.5));
  }
  return s;
}

// log |det| of the linear map from a real signal to its packed spectrum:
// (n/2) log n minus log 2 for every interior mode pair.
inline double packed_rfft_log_abs_det(Eigen::Index n) {
  const Eigen::Index self = (n % 2 == 0 && n > 1) ? 2 : 1;
  return 0.5 * static_cast<double>(n) * std::log(static_cast<double>(n)) -
         0.5 * static_cast<double>(n - self) * std::log(2.0);
}

// Adjoint of the packed forward transform (pack of rfft), used by gradients.
inline Eigen::VectorXd packed_rfft_adjoint(const Eigen::VectorXd& w, Eigen::Index n) {
  if (w.size() != n) throw std::invalid_argument("packed_rfft_adjoint: length mismatch");
  Eigen::VectorXcd d(n / 2 + 1);
  for (Eigen::Index k = 0; k <= n / 2; ++k) {
    const auto idx = fourier_detail::packed_index(k, n);
    if (idx.self_conjugate) {
      d[k] = w[k];
    } else {
      d[k] = 0.5 * std::complex<double>(w[k], w[n / 2 + k]);
    }
  }
  return static_cast<double>(n) * irfft(d, n);
}

// Exact GP log density on a periodic grid. Equals the dense multivariate
// normal log density whose covariance is the circulant matrix with first row
// periodic_kernel_row(spectrum), with no jitter.
inline double fourier_lpdf(const Eigen::VectorXd& f, const Eigen::VectorXd& loc,
                           const Spectrum1D& spectrum) {
  fourier_detail::check_spectrum_shape(spectrum, "fourier_lpdf");
  const Eigen::Index n = spectrum.n;
  if (f.size() != n || loc.size() != n) {
    throw std::invalid_argument("fourier_lpdf: f and loc must have length n");
  }
  const Eigen::VectorXd s = coefficient_scales(spectrum);
  const Eigen::VectorXd p = pack_rfft(rfft(f - loc), n);
  double quad = 0.0, logs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = p[i] / s[i];
    quad += r * r;
    logs += std::log(s[i]);
  }
  return -0.5 * quad - logs - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) +
         packed_rfft_log_abs_det(n);
}

inline Eigen::VectorXd fourier_lpdf_grad(const Eigen::VectorXd& f, const Eigen::VectorXd& loc,
                                         const Spectrum1D& spectrum) {
  fourier_detail::check_spectrum_shape(spectrum, "fourier_lpdf_grad");
  const Eigen::Index n = spectrum.n;
  if (f.size() != n || loc.size() != n) {
    throw std::invalid_argument("fourier_lpdf_grad: f and loc must have length n");
  }
  const Eigen::VectorXd s = coefficient_scales(spectrum);
  const Eigen::VectorXd p = pack_rfft(rfft(f - loc), n);
  const Eigen::VectorXd q = p.cwiseQuotient(s.cwiseProduct(s));
  return -packed_rfft_adjoint(q, n);
}

// Non-centered map f = loc + irfft(unpack(z * scales)); linear in z.
inline Eigen::VectorXd fourier_inv_transform(const Eigen::VectorXd& z, const Eigen::VectorXd& loc,
                                             const Spectrum1D& spectrum) {
  fourier_detail::check_spectrum_shape(spectrum, "fourier_inv_transform");
  const Eigen::Index n = spectrum.n;
  if (z.size() != n || loc.size() != n) {
    throw std::invalid_argument("fourier_inv_transform: z and loc must have length n");
  }
  const Eigen::VectorXd s = coefficient_scales(spectrum);
  return loc + irfft(unpack_rfft(z.cwiseProduct(s), n), n);
}

// Gradient with respect to z of g . fourier_inv_transform(z): the map is
// linear, so this is the transposed Jacobian applied to g.
inline Eigen::VectorXd adjoint_inv_transform(const Eigen::VectorXd& g,
                                             const Spectrum1D& spectrum) {
  fourier_detail::check_spectrum_shape(spectrum, "adjoint_inv_transform");
  const Eigen::Index n = spectrum.n;
  if (g.size() != n) throw std::invalid_argument("adjoint_inv_transform: length mismatch");
  const Eigen::VectorXd s = coefficient_scales(spectrum);
  const Eigen::VectorXd pr = pack_rfft(rfft(g), n);
  Eigen::VectorXd out(n);
  for (Eigen::Index pos = 0; pos < n; ++pos) {
    const auto idx = fourier_detail::packed_index(pos, n);
    const double weight = (idx.self_conjugate ? 1.0 : 2.0) / static_cast<double>(n);
    out[pos] = s[pos] * weight * pr[pos];
  }
  return out;
}

inline Eigen::VectorXd fourier_whiten(const Eigen::VectorXd& f, const Eigen::VectorXd& loc,
                                      const Spectrum1D& spectrum) {
  fourier_detail::check_spectrum_shape(spectrum, "fourier_whiten");
  const Eigen::Index n = spectrum.n;
  if (f.size() != n || loc.size() != n) {
    throw std::invalid_argument("fourier_whiten: f and loc must have length n");
  }
  const Eigen::VectorXd s = coefficient_scales(spectrum);
  return pack_rfft(rfft(f - loc), n).cwiseQuotient(s);
}

// Low-frequency basis keeping whole modes xi < m (both quadrature
// components). The retained-power fraction is reported at construction.
struct TruncatedBasis {
  Spectrum1D spectrum;
  Eigen::Index modes = 0;
  Eigen::Index latent_size = 0;
  double retained_power_fraction = 0.0;

  TruncatedBasis(Spectrum1D spec, Eigen::Index m) : spectrum(std::move(spec)), modes(m) {
    fourier_detail::check_spectrum_shape(spectrum, "TruncatedBasis");
    if (m < 1 || m > spectrum.n / 2 + 1) {
      throw std::invalid_argument("TruncatedBasis: m must satisfy 0 < m <= n/2 + 1");
    }
    if (!spectrum.values.allFinite() || (spectrum.values.array() < 0.0).any()) {
      throw std::invalid_argument("TruncatedBasis: spectrum must be finite and >= 0");
    }
    // Share of E[sum_j f_j^2] carried by the retained modes. Every packed
    // position contributes the k~ of its frequency, so far-tail entries that
    // underflow to zero simply contribute nothing.
    double kept = 0.0, total = 0.0;
    for (Eigen::Index pos = 0; pos < spectrum.n; ++pos) {
      const auto idx = fourier_detail::packed_index(pos, spectrum.n);
      const double power = spectrum.values[idx.freq];
      total += power;
      if (idx.freq < m) {
        kept += power;
        ++latent_size;
      }
    }
    if (!(total > 0.0)) throw std::invalid_argument("TruncatedBasis: spectrum has no power");
    retained_power_fraction = kept / total;
  }
};

// Maps a latent vector covering the retained packed entries (in packed
// layout order) onto the grid; discarded modes contribute nothing.
inline Eigen::VectorXd truncated_inv_transform(const Eigen::VectorXd& z,
                                               const Eigen::VectorXd& loc,
                                               const TruncatedBasis& basis) {
  const Eigen::Index n = basis.spectrum.n;
  if (loc.size() != n) throw std::invalid_argument("truncated_inv_transform: loc length mismatch");
  if (z.size() != basis.latent_size) {
    throw std::invalid_argument("truncated_inv_transform: z must cover the retained packed entries");
  }
  // Only the retained modes need positive prior power; the discarded tail may
  // legitimately underflow to zero.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::Index next = 0;
  for (Eigen::Index pos = 0; pos < n; ++pos) {
    const auto idx = fourier_detail::packed_index(pos, n);
    if (idx.freq < basis.modes) {
      const double k = fourier_detail::spectrum_value_checked(basis.spectrum.values[idx.freq],
                                                              "truncated_inv_transform");
      const double scale =
          std::sqrt(static_cast<double>(n) * k * (idx.self_conjugate ? 1.0 : 0.5));
      u[pos] = z[next++] * scale;
    }
  }
  return loc + irfft(unpack_rfft(u, n), n);
}

// ---------------------------------------------------------------------------
// Two-dimensional counterparts. The packed matrix has shape n1 x n2; see the
// layout note at the top of this header.

inline Eigen::MatrixXd pack_rfft2(const Eigen::MatrixXcd& c, Eigen::Index n1, Eigen::Index n2) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("pack_rfft2: shape must be >= 1 x 1");
  if (c.rows() != n1 || c.cols() != n2 / 2 + 1) {
    throw std::invalid_argument("pack_rfft2: spectrum shape must equal n1 x (n2/2 + 1)");
  }
  if (!c.allFinite()) throw std::invalid_argument("pack_rfft2: spectrum must be finite");
  const double tol = 1e-9 * std::max(1.0, c.cwiseAbs().maxCoeff());
  Eigen::MatrixXd p(n1, n2);
  const auto pack_symmetric_column = [&](Eigen::Index src_col, Eigen::Index dst_col) {
    for (Eigen::Index x1 = 1; x1 <= n1 / 2; ++x1) {
      if (std::abs(c(n1 - x1, src_col) - std::conj(c(x1, src_col))) > tol) {
        throw std::invalid_argument("pack_rfft2: column violates real-signal symmetry");
      }
    }
    p.col(dst_col) = pack_rfft(c.col(src_col).head(n1 / 2 + 1), n1);
  };
  pack_symmetric_column(0, 0);
  for (Eigen::Index x2 = 1; x2 + n2 / 2 < n2; ++x2) {
    p.col(2 * x2 - 1) = c.col(x2).real();
    p.col(2 * x2) = c.col(x2).imag();
  }
  if (n2 % 2 == 0 && n2 > 1) pack_symmetric_column(n2 / 2, n2 - 1);
  return p;
}

inline Eigen::MatrixXcd unpack_rfft2(const Eigen::MatrixXd& p, Eigen::Index n1, Eigen::Index n2) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("unpack_rfft2: shape must be >= 1 x 1");
  if (p.rows() != n1 || p.cols() != n2) {
    throw std::invalid_argument("unpack_rfft2: packed shape must equal n1 x n2");
  }
  Eigen::MatrixXcd c(n1, n2 / 2 + 1);
  const auto unpack_symmetric_column = [&](Eigen::Index dst_col, Eigen::Index src_col) {
    const Eigen::VectorXcd half = unpack_rfft(p.col(src_col), n1);
    for (Eigen::Index x1 = 0; x1 <= n1 / 2; ++x1) {
      c(x1, dst_col) = half[x1];
      if (x1 > 0 && x1 < n1 - x1) c(n1 - x1, dst_col) = std::conj(half[x1]);
    }
  };
  unpack_symmetric_column(0, 0);
  for (Eigen::Index x2 = 1; x2 + n2 / 2 < n2; ++x2) {
    for (Eigen::Index x1 = 0; x1 < n1; ++x1) {
      c(x1, x2) = std::complex<double>(p(x1, 2 * x2 - 1), p(x1, 2 * x2));
    }
  }
  if (n2 % 2 == 0 && n2 > 1) unpack_symmetric_column(n2 / 2, n2 - 1);
  return c;
}

namespace fourier_detail {

// Frequency pair and self-conjugacy of a packed 2D position.
struct PackedIndex2D {
  Eigen::Index freq1 = 0;
  Eigen::Index freq2 = 0;
  bool self_conjugate = false;
};

inline PackedIndex2D packed_index_2d(Eigen::Index pos1, Eigen::Index col, Eigen::Index n1,
                                     Eigen::Index n2) {
  const bool nyq_col = (n2 % 2 == 0 && n2 > 1 && col == n2 - 1);
  if (col == 0 || nyq_col) {
    const auto idx = packed_index(pos1, n1);
    return {idx.freq, nyq_col ? n2 / 2 : 0, idx.self_conjugate};
  }
  const Eigen::Index x2 = (col + 1) / 2;
  return {pos1, x2, false};
}

}  // namespace fourier_detail

inline Eigen::MatrixXd coefficient_scales_2d(const Spectrum2D& spectrum) {
  fourier_detail::check_spectrum_shape(spectrum, "coefficient_scales_2d");
  const Eigen::Index n1 = spectrum.n1, n2 = spectrum.n2;
  const double total = static_cast<double>(n1) * static_cast<double>(n2);
  Eigen::MatrixXd s(n1, n2);
  for (Eigen::Index col = 0; col < n2; ++col) {
    for (Eigen::Index pos1 = 0; pos1 < n1; ++pos1) {
      const auto idx = fourier_detail::packed_index_2d(pos1, col, n1, n2);
      const double k = fourier_detail::spectrum_value_checked(
          spectrum.values(idx.freq1, idx.freq2), "coefficient_scales_2d");
      s(pos1, col) = std::sqrt(total * k * (idx.self_conjugate ? 1.0 : 0.5));
    }
  }
  return s;
}

inline double packed_rfft2_log_abs_det(Eigen::Index n1, Eigen::Index n2) {
  const auto self_1d = [](Eigen::Index n) { return (n % 2 == 0 && n > 1) ? 2 : 1; };
  const double total = static_cast<double>(n1) * static_cast<double>(n2);
  const double self = static_cast<double>(self_1d(n1) * self_1d(n2));
  return 0.5 * total * std::log(total) - 0.5 * (total - self) * std::log(2.0);
}

namespace fourier_detail {

inline void check_grid_args(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const Spectrum2D& s, const char* who) {
  check_spectrum_shape(s, who);
  if (a.rows() != s.n1 || a.cols() != s.n2 || b.rows() != s.n1 || b.cols() != s.n2) {
    throw std::invalid_argument(std::string(who) + ": grid shape must equal n1 x n2");
  }
}

}  // namespace fourier_detail

inline double fourier_lpdf_2d(const Eigen::MatrixXd& f, const Eigen::MatrixXd& loc,
                              const Spectrum2D& spectrum) {
  fourier_detail::check_grid_args(f, loc, spectrum, "fourier_lpdf_2d");
  const Eigen::Index n1 = spectrum.n1, n2 = spectrum.n2;
  const Eigen::MatrixXd s = coefficient_scales_2d(spectrum);
  const Eigen::MatrixXd p = pack_rfft2(rfft2(f - loc), n1, n2);
  double quad = 0.0, logs = 0.0;
  for (Eigen::Index col = 0; col < n2; ++col) {
    for (Eigen::Index row = 0; row < n1; ++row) {
      const double r = p(row, col) / s(row, col);
      quad += r * r;
      logs += std::log(s(row, col));
    }
  }
  const double total = static_cast<double>(n1) * static_cast<double>(n2);
  return -0.5 * quad - logs - 0.5 * total * std::log(2.0 * std::numbers::pi) +
         packed_rfft2_log_abs_det(n1, n2);
}

inline Eigen::MatrixXd fourier_lpdf_grad_2d(const Eigen::MatrixXd& f, const Eigen::MatrixXd& loc,
                                            const Spectrum2D& spectrum) {
  fourier_detail::check_grid_args(f, loc, spectrum, "fourier_lpdf_grad_2d");
  const Eigen::Index n1 = spectrum.n1, n2 = spectrum.n2;
  const Eigen::MatrixXd s = coefficient_scales_2d(spectrum);
  const Eigen::MatrixXd p = pack_rfft2(rfft2(f - loc), n1, n2);
  Eigen::MatrixXd w(n1, n2);
  for (Eigen::Index col = 0; col < n2; ++col) {
    for (Eigen::Index row = 0; row < n1; ++row) {
      const auto idx = fourier_detail::packed_index_2d(row, col, n1, n2);
      const double half = idx.self_conjugate ? 1.0 : 0.5;
      w(row, col) = half * p(row, col) / (s(row, col) * s(row, col));
    }
  }
  const double total = static_cast<double>(n1) * static_cast<double>(n2);
  return -total * irfft2(unpack_rfft2(w, n1, n2), n1, n2);
}

inline Eigen::MatrixXd fourier_inv_transform_2d(const Eigen::MatrixXd& z,
                                                const Eigen::MatrixXd& loc,
                                                const Spectrum2D& spectrum) {
  fourier_detail::check_grid_args(z, loc, spectrum, "fourier_inv_transform_2d");
  const Eigen::MatrixXd s = coefficient_scales_2d(spectrum);
  return loc + irfft2(unpack_rfft2(z.cwiseProduct(s), spectrum.n1, spectrum.n2), spectrum.n1,
                      spectrum.n2);
}

inline Eigen::MatrixXd adjoint_inv_transform_2d(const Eigen::MatrixXd& g,
                                                const Spectrum2D& spectrum) {
  fourier_detail::check_spectrum_shape(spectrum, "adjoint_inv_transform_2d");
  const Eigen::Index n1 = spectrum.n1, n2 = spectrum.n2;
  if (g.rows() != n1 || g.cols() != n2) {
    throw std::invalid_argument("adjoint_inv_transform_2d: grid shape must equal n1 x n2");
  }
  const Eigen::MatrixXd s = coefficient_scales_2d(spectrum);
  const Eigen::MatrixXd pr = pack_rfft2(rfft2(g), n1, n2);
  const double total = static_cast<double>(n1) * static_cast<double>(n2);
  Eigen::MatrixXd out(n1, n2);
  for (Eigen::Index col = 0; col < n2; ++col) {
    for (Eigen::Index row = 0; row < n1; ++row) {
      const auto idx = fourier_detail::packed_index_2d(row, col, n1, n2);
      const double weight = (idx.self_conjugate ? 1.0 : 2.0) / total;
      out(row, col) = s(row, col) * weight * pr(row, col);
    }
  }
  return out;
}

inline Eigen::MatrixXd fourier_whiten_2d(const Eigen::MatrixXd& f, const Eigen::MatrixXd& loc,
                                         const Spectrum2D& spectrum) {
  fourier_detail::check_grid_args(f, loc, spectrum, "fourier_whiten_2d");
  const Eigen::MatrixXd s = coefficient_scales_2d(spectrum);
  return pack_rfft2(rfft2(f - loc), spectrum.n1, spectrum.n2).cwiseQuotient(s);
}

// Enlarges a grid with unobserved cells to attenuate the periodic boundary
// conditions of the FFT. Original data stay in the leading block.
inline MaskedGrid pad_grid(const MaskedGrid& grid, Eigen::Index pad_rows, Eigen::Index pad_cols) {
  grid.validate();
  if (pad_rows < 0 || pad_cols < 0) throw std::invalid_argument("pad_grid: pads must be >= 0");
  const Eigen::Index n1 = grid.values.rows(), n2 = grid.values.cols();
  MaskedGrid out;
  out.cell_size = grid.cell_size;
  out.values = Eigen::MatrixXd::Zero(n1 + pad_rows, n2 + pad_cols);
  out.mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n1 + pad_rows,
                                                                           n2 + pad_cols, false);
  out.values.topLeftCorner(n1, n2) = grid.values;
  out.mask.topLeftCorner(n1, n2) = grid.mask;
  return out;
}

}  // namespace gpscale

#endif  // GPSCALE_FOURIER_HPP
