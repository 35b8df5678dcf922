#include "pals/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pals/error.hpp"

namespace pals {

namespace {

// Row-wise domination on a packed matrix, no allocation.
bool row_dominates(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b,
                   Eigen::Index j) {
  bool strict = false;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double x = a(i, c);
    const double y = b(j, c);
    if (x > y) return false;
    if (x < y) strict = true;
  }
  return strict;
}

IndexSet pareto_indices_2d(const Eigen::MatrixXd& z) {
  const auto n = static_cast<std::size_t>(z.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (z(a, 0) != z(b, 0)) return z(a, 0) < z(b, 0);
    if (z(a, 1) != z(b, 1)) return z(a, 1) < z(b, 1);
    return a < b;
  });

  IndexSet front;
  double best_before = std::numeric_limits<double>::infinity();
  std::size_t g = 0;
  while (g < n) {
    std::size_t end = g;
    while (end < n && z(order[end], 0) == z(order[g], 0)) ++end;
    // order is sorted on the second objective inside a group of equal first
    // objectives, so the group minimum sits at g.
    const double group_min = z(order[g], 1);
    for (std::size_t k = g; k < end; ++k) {
      const double v = z(order[k], 1);
      if (best_before <= v) continue;
      if (group_min < v) continue;
      front.push_back(order[k]);
    }
    best_before = std::min(best_before, group_min);
    g = end;
  }
  std::sort(front.begin(), front.end());
  return front;
}

void require_finite(const Eigen::MatrixXd& z) {
  if (!z.allFinite()) throw std::invalid_argument("objective vectors must be finite");
}

}  // namespace

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dominates: length mismatch");
  bool strict = false;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (a[j] > b[j]) return false;
    if (a[j] < b[j]) strict = true;
  }
  return strict;
}

IndexSet pareto_indices(const Eigen::MatrixXd& points) {
  if (points.rows() == 0) throw EmptyPointSet();
  require_finite(points);
  if (points.cols() == 2) return pareto_indices_2d(points);

  IndexSet front;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    bool dominated = false;
    for (Eigen::Index j = 0; j < points.rows() && !dominated; ++j) {
      dominated = j != i && row_dominates(points, j, points, i);
    }
    if (!dominated) front.push_back(static_cast<std::size_t>(i));
  }
  return front;
}

IndexSet pareto_indices(std::span<const ObjectiveVector> points) {
  if (points.empty()) throw EmptyPointSet();
  const auto q = points.front().size();
  Eigen::MatrixXd packed(static_cast<Eigen::Index>(points.size()), q);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != q) throw std::invalid_argument("pareto_indices: length mismatch");
    packed.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  }
  return pareto_indices(packed);
}

UncertaintyRegion::UncertaintyRegion(ObjectiveVector lo, ObjectiveVector hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) throw std::invalid_argument("region: length mismatch");
  for (Eigen::Index j = 0; j < lower.size(); ++j) {
    if (!(lower[j] <= upper[j])) throw std::invalid_argument("region: lower > upper");
  }
}

double UncertaintyRegion::diameter() const { return (upper - lower).norm(); }

bool UncertaintyRegion::contains(const ObjectiveVector& z) const {
  return (z.array() >= lower.array()).all() && (z.array() <= upper.array()).all();
}

bool UncertaintyRegion::subset_of(const UncertaintyRegion& other) const {
  return (lower.array() >= other.lower.array()).all() &&
         (upper.array() <= other.upper.array()).all();
}

bool operator==(const UncertaintyRegion& a, const UncertaintyRegion& b) {
  return a.lower.size() == b.lower.size() && a.lower == b.lower && a.upper == b.upper;
}

MarginVector::MarginVector(ObjectiveVector epsilon) : epsilon_(std::move(epsilon)) {
  for (Eigen::Index j = 0; j < epsilon_.size(); ++j) {
    if (!(epsilon_[j] >= 0.0) || !std::isfinite(epsilon_[j])) {
      throw std::invalid_argument("margin entries must be finite and nonnegative");
    }
  }
}

MarginVector MarginVector::zeros(std::size_t q) {
  return MarginVector(ObjectiveVector::Zero(static_cast<Eigen::Index>(q)));
}

UncertaintyRegion rectangle_from_posterior(const ObjectiveVector& mu, const ObjectiveVector& sigma,
                                           double beta) {
  if (mu.size() != sigma.size()) throw std::invalid_argument("rectangle: length mismatch");
  if (!(beta >= 0.0)) throw std::invalid_argument("rectangle: beta must be nonnegative");
  if ((sigma.array() < 0.0).any()) throw std::invalid_argument("rectangle: negative sigma");
  const double half = std::sqrt(beta);
  return {mu - half * sigma, mu + half * sigma};
}

std::optional<UncertaintyRegion> intersect_regions(const UncertaintyRegion& prev,
                                                   const UncertaintyRegion& q) {
  if (prev.dimension() != q.dimension()) throw std::invalid_argument("intersect: length mismatch");
  ObjectiveVector lo = prev.lower.cwiseMax(q.lower);
  ObjectiveVector hi = prev.upper.cwiseMin(q.upper);
  if ((lo.array() > hi.array()).any()) return std::nullopt;
  return UncertaintyRegion(std::move(lo), std::move(hi));
}

UncertaintyRegion corrected_intersect(const UncertaintyRegion& prev, const UncertaintyRegion& q,
                                      const ObjectiveVector& mu) {
  auto both = intersect_regions(prev, q);
  if (!both) return UncertaintyRegion::point(mu);
  return {both->lower.cwiseMin(mu), both->upper.cwiseMax(mu)};
}

Classification classify_subset(std::span<const UncertaintyRegion> regions,
                               const MarginVector& epsilon, const IndexSet& candidates) {
  const auto n = static_cast<Eigen::Index>(regions.size());
  Classification out;
  if (n == 0) return out;
  const auto q = static_cast<Eigen::Index>(regions.front().dimension());
  if (static_cast<Eigen::Index>(epsilon.size()) != q) {
    throw std::invalid_argument("classify: margin length mismatch");
  }

  // optimistic = lower + eps, pessimistic = upper - eps
  Eigen::MatrixXd optimistic(n, q);
  Eigen::MatrixXd pessimistic(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = regions[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(r.dimension()) != q) {
      throw std::invalid_argument("classify: region length mismatch");
    }
    optimistic.row(i) = (r.lower + epsilon.values()).transpose();
    pessimistic.row(i) = (r.upper - epsilon.values()).transpose();
  }

  for (std::size_t idx : candidates) {
    const auto i = static_cast<Eigen::Index>(idx);
    if (i >= n) throw std::invalid_argument("classify: candidate out of range");
    bool pareto = true;
    for (Eigen::Index j = 0; j < n && pareto; ++j) {
      if (j != i && row_dominates(optimistic, j, pessimistic, i)) pareto = false;
    }
    if (pareto) {
      out.pareto.push_back(idx);
      continue;
    }
    bool dominated = false;
    for (Eigen::Index j = 0; j < n && !dominated; ++j) {
      if (j != i && row_dominates(pessimistic, j, optimistic, i)) dominated = true;
    }
    (dominated ? out.dominated : out.unclassified).push_back(idx);
  }
  std::sort(out.pareto.begin(), out.pareto.end());
  std::sort(out.dominated.begin(), out.dominated.end());
  std::sort(out.unclassified.begin(), out.unclassified.end());
  return out;
}

Classification classify(std::span<const UncertaintyRegion> regions, const MarginVector& epsilon) {
  IndexSet all(regions.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return classify_subset(regions, epsilon, all);
}

std::size_t select_next(const Classification& classification,
                        std::span<const UncertaintyRegion> regions, bool exclude_visited,
                        const IndexSet& visited) {
  std::vector<char> skip(regions.size(), 0);
  if (exclude_visited) {
    for (std::size_t v : visited) {
      if (v < skip.size()) skip[v] = 1;
    }
  }

  std::optional<std::size_t> best;
  double best_diameter = -1.0;
  auto consider = [&](const IndexSet& set) {
    for (std::size_t i : set) {
      if (i >= regions.size()) throw std::invalid_argument("select_next: index out of range");
      if (skip[i]) continue;
      const double d = regions[i].diameter();
      if (d > best_diameter || (d == best_diameter && i < *best)) {
        best = i;
        best_diameter = d;
      }
    }
  };
  consider(classification.pareto);
  consider(classification.unclassified);
  if (!best) throw NoSelectablePoint();
  return *best;
}

}  // namespace pals
