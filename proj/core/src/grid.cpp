#include "pals/grid.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pals {

InputGrid::InputGrid(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (!points_.allFinite()) throw std::invalid_argument("grid points must be finite");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(points_.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < points_.cols(); ++c) {
      if (points_(a, c) != points_(b, c)) return points_(a, c) < points_(b, c);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (!less(order[k - 1], order[k])) throw std::invalid_argument("grid points must be distinct");
  }
}

InputGrid InputGrid::regular(std::size_t points_per_axis, std::size_t dimension) {
  if (points_per_axis < 2 || dimension == 0) {
    throw std::invalid_argument("regular grid needs >= 2 points per axis and d >= 1");
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < dimension; ++k) total *= points_per_axis;
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dimension));
  const double step = 1.0 / static_cast<double>(points_per_axis - 1);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    for (std::size_t c = 0; c < dimension; ++c) {
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          static_cast<double>(rem % points_per_axis) * step;
      rem /= points_per_axis;
    }
  }
  return InputGrid(std::move(pts));
}

Eigen::VectorXd InputGrid::span() const {
  Eigen::VectorXd s = points_.colwise().maxCoeff() - points_.colwise().minCoeff();
  for (Eigen::Index c = 0; c < s.size(); ++c) {
    if (s[c] <= 0.0) s[c] = 1.0;
  }
  return s;
}

}  // namespace pals
