#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace pals {

/// Finite search space: an ordered list of distinct points in R^d.
///
/// Regular grids are stored row-major with the first coordinate varying
/// fastest: index = i2 * n1 + i1 with x1 = i1 / (n1 - 1), x2 = i2 / (n2 - 1).
class InputGrid {
 public:
  InputGrid() = default;
  /// One point per row. Throws std::invalid_argument on duplicates.
  explicit InputGrid(Eigen::MatrixXd points);

  /// n points per axis on [0,1]^d.
  static InputGrid regular(std::size_t points_per_axis, std::size_t dimension);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(points_.cols()); }
  Eigen::VectorXd point(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)).transpose(); }
  const Eigen::MatrixXd& points() const { return points_; }

  /// Per-coordinate max - min (zero-span coordinates report 1).
  Eigen::VectorXd span() const;

 private:
  Eigen::MatrixXd points_;
};

}  // namespace pals
