#include "pals/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "pals/error.hpp"

namespace pals {

namespace {

void require_biobjective(const Eigen::MatrixXd& front) {
  if (front.rows() > 0 && front.cols() != 2) {
    throw std::invalid_argument("volume metrics are defined for two objectives");
  }
}

// Non-dominated rows sorted by the first objective (second decreasing).
std::vector<Eigen::Vector2d> staircase(const Eigen::MatrixXd& front) {
  std::vector<Eigen::Vector2d> steps;
  if (front.rows() == 0) return steps;
  for (std::size_t i : pareto_indices(front)) {
    steps.emplace_back(front.row(static_cast<Eigen::Index>(i)).transpose());
  }
  std::sort(steps.begin(), steps.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
  });
  // Identical duplicates are both kept by pareto_indices; they add no area.
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  return steps;
}

double staircase_area(const std::vector<Eigen::Vector2d>& steps, const Eigen::Vector2d& ref) {
  double area = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double right = i + 1 < steps.size() ? steps[i + 1][0] : ref[0];
    area += (right - steps[i][0]) * (ref[1] - steps[i][1]);
  }
  return area;
}

}  // namespace

double dominated_volume_2d(const Eigen::MatrixXd& front, const Eigen::Vector2d& ref) {
  require_biobjective(front);
  for (Eigen::Index i = 0; i < front.rows(); ++i) {
    if (!(front(i, 0) < ref[0] && front(i, 1) < ref[1])) throw ReferencePointViolated();
  }
  return staircase_area(staircase(front), ref);
}

double symmetric_difference_volume(const Eigen::MatrixXd& true_front,
                                   const Eigen::MatrixXd& predicted_front,
                                   const Eigen::Vector2d& ref) {
  require_biobjective(true_front);
  require_biobjective(predicted_front);
  const double a = dominated_volume_2d(true_front, ref);
  const double b = dominated_volume_2d(predicted_front, ref);
  Eigen::MatrixXd pooled(true_front.rows() + predicted_front.rows(), 2);
  if (true_front.rows() > 0) pooled.topRows(true_front.rows()) = true_front;
  if (predicted_front.rows() > 0) pooled.bottomRows(predicted_front.rows()) = predicted_front;
  const double both = dominated_volume_2d(pooled, ref);
  // D(A ∪ B) = D(A) ∪ D(B), so |D(A) Δ D(B)| = 2 V(A ∪ B) - V(A) - V(B).
  return std::max(0.0, 2.0 * both - a - b);
}

Eigen::MatrixXd clip_to_reference(const Eigen::MatrixXd& front, const Eigen::Vector2d& ref) {
  require_biobjective(front);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < front.rows(); ++i) {
    if (front(i, 0) < ref[0] && front(i, 1) < ref[1]) keep.push_back(i);
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(keep.size()), 2);
  for (std::size_t r = 0; r < keep.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = front.row(keep[r]);
  return out;
}

double misclassification_rate(const IndexSet& true_set, const IndexSet& predicted_set,
                              std::size_t grid_size) {
  if (grid_size == 0) throw std::invalid_argument("misclassification_rate: empty grid");
  IndexSet a = true_set;
  IndexSet b = predicted_set;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (const IndexSet* s : {&a, &b}) {
    if (!s->empty() && s->back() >= grid_size) {
      throw std::invalid_argument("misclassification_rate: index out of range");
    }
  }
  IndexSet diff;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff));
  return static_cast<double>(diff.size()) / static_cast<double>(grid_size);
}

Eigen::VectorXd attainment_map(const std::vector<Eigen::MatrixXd>& paths, const Eigen::MatrixXd& queries) {
  if (paths.empty()) throw std::invalid_argument("attainment_map: need at least one path");
  Eigen::VectorXd hits = Eigen::VectorXd::Zero(queries.rows());
  for (const auto& path : paths) {
    if (path.cols() != queries.cols()) throw std::invalid_argument("attainment_map: dimension mismatch");
    const IndexSet front = pareto_indices(path);
    for (Eigen::Index r = 0; r < queries.rows(); ++r) {
      const ObjectiveVector y = queries.row(r).transpose();
      for (std::size_t i : front) {
        if (dominates(path.row(static_cast<Eigen::Index>(i)).transpose(), y)) {
          hits[r] += 1.0;
          break;
        }
      }
    }
  }
  return hits / static_cast<double>(paths.size());
}

Eigen::VectorXd coverage_map(const std::vector<Eigen::MatrixXd>& paths) {
  if (paths.empty()) throw std::invalid_argument("coverage_map: need at least one path");
  Eigen::VectorXd hits = Eigen::VectorXd::Zero(paths.front().rows());
  for (const auto& path : paths) {
    if (path.rows() != hits.size()) throw std::invalid_argument("coverage_map: path size mismatch");
    for (std::size_t i : pareto_indices(path)) hits[static_cast<Eigen::Index>(i)] += 1.0;
  }
  return hits / static_cast<double>(paths.size());
}

}  // namespace pals
