#pragma once

// Front-quality metrics for bi-objective problems and posterior sample-path
// summaries.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "pals/pareto.hpp"

namespace pals {

/// Default reference point for scaled objectives.
inline Eigen::Vector2d default_reference_point() { return {1.1, 1.1}; }

/// Area of the region {y : some front row strictly dominates y and y
/// strictly dominates ref}. Rows that are not on the front's own Pareto subset
/// are ignored. Throws ReferencePointViolated when a row does not dominate
/// `ref`, std::invalid_argument when the front is not bi-objective.
double dominated_volume_2d(const Eigen::MatrixXd& front, const Eigen::Vector2d& ref);

/// Area of the symmetric difference between the regions dominated by the two
/// fronts.
double symmetric_difference_volume(const Eigen::MatrixXd& true_front,
                                   const Eigen::MatrixXd& predicted_front,
                                   const Eigen::Vector2d& ref);

/// Rows of `front` that strictly dominate `ref`. Dropping the other rows
/// leaves the dominated volume unchanged.
Eigen::MatrixXd clip_to_reference(const Eigen::MatrixXd& front, const Eigen::Vector2d& ref);

/// |true_set Δ predicted_set| / grid_size.
double misclassification_rate(const IndexSet& true_set, const IndexSet& predicted_set,
                              std::size_t grid_size);

/// For each query row y, the fraction of paths (each |X| x q) whose image
/// contains a point that dominates y.
Eigen::VectorXd attainment_map(const std::vector<Eigen::MatrixXd>& paths, const Eigen::MatrixXd& queries);

/// For each grid point, the fraction of paths in which it is Pareto-optimal.
Eigen::VectorXd coverage_map(const std::vector<Eigen::MatrixXd>& paths);

}  // namespace pals
