#ifndef GPSCALE_GRID_HPP
#define GPSCALE_GRID_HPP

#include <Eigen/Core>

#include <stdexcept>

namespace gpscale {

// Real or count values on a regular grid with an observation mask
// (true = observed). cell_size converts cell indices to domain units.
struct MaskedGrid {
  Eigen::MatrixXd values;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
  double cell_size = 1.0;

  void validate() const {
    if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
      throw std::invalid_argument("MaskedGrid: values and mask shapes differ");
    }
    if (values.rows() < 1 || values.cols() < 1) {
      throw std::invalid_argument("MaskedGrid: grid must be non-empty");
    }
    if (!(cell_size > 0.0)) throw std::invalid_argument("MaskedGrid: cell_size must be positive");
  }

  Eigen::Index observed_count() const { return mask.cast<Eigen::Index>().sum(); }
};

}  // namespace gpscale

#endif  // GPSCALE_GRID_HPP
