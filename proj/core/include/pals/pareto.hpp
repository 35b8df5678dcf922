#pragma once

// Pareto domination, Pareto-set extraction and the uncertainty-rectangle
// classification used by the PAL family of active-learning loops.
//
// Conventions: all objectives are minimized. An index set is a sorted
// std::vector<std::size_t> of grid indices.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace pals {

using ObjectiveVector = Eigen::VectorXd;
using IndexSet = std::vector<std::size_t>;

/// Strict Pareto domination: a <= b componentwise with at least one strict
/// coordinate. Throws std::invalid_argument on length mismatch.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Indices of the non-dominated points, ascending. Identical vectors do not
/// dominate each other, so duplicates on the front are all kept.
IndexSet pareto_indices(std::span<const ObjectiveVector> points);

/// Row-wise variant: each row of `points` is one objective vector.
IndexSet pareto_indices(const Eigen::MatrixXd& points);

/// Axis-aligned box [lower, upper] in objective space. Zero-width boxes are
/// legal.
struct UncertaintyRegion {
  ObjectiveVector lower;
  ObjectiveVector upper;

  UncertaintyRegion() = default;
  UncertaintyRegion(ObjectiveVector lo, ObjectiveVector hi);

  static UncertaintyRegion point(const ObjectiveVector& z) { return {z, z}; }

  std::size_t dimension() const { return static_cast<std::size_t>(lower.size()); }
  /// Euclidean norm of upper - lower.
  double diameter() const;
  bool contains(const ObjectiveVector& z) const;
  /// True when this box lies inside `other`.
  bool subset_of(const UncertaintyRegion& other) const;

  friend bool operator==(const UncertaintyRegion& a, const UncertaintyRegion& b);
};

/// Per-objective nonnegative margins used to loosen both classification tests.
class MarginVector {
 public:
  MarginVector() = default;
  explicit MarginVector(ObjectiveVector epsilon);
  static MarginVector zeros(std::size_t q);

  const ObjectiveVector& values() const { return epsilon_; }
  std::size_t size() const { return static_cast<std::size_t>(epsilon_.size()); }

 private:
  ObjectiveVector epsilon_;
};

struct Classification {
  IndexSet pareto;
  IndexSet dominated;
  IndexSet unclassified;

  std::size_t size() const { return pareto.size() + dominated.size() + unclassified.size(); }
};

/// mu -/+ sqrt(beta) * sigma, componentwise.
UncertaintyRegion rectangle_from_posterior(const ObjectiveVector& mu, const ObjectiveVector& sigma,
                                           double beta);

/// Box intersection; std::nullopt when the boxes are disjoint in some
/// coordinate.
std::optional<UncertaintyRegion> intersect_regions(const UncertaintyRegion& prev,
                                                   const UncertaintyRegion& q);

/// Smallest box containing both (prev ∩ q) and mu. Collapses to the point mu
/// when the intersection is empty.
UncertaintyRegion corrected_intersect(const UncertaintyRegion& prev, const UncertaintyRegion& q,
                                      const ObjectiveVector& mu);

/// Three-way classification of every region.
///
/// A point is Pareto when no other point's shifted optimistic corner
/// (lower + eps) dominates its shifted pessimistic corner (upper - eps). A
/// point that is not Pareto is dominated when some other point's pessimistic
/// corner (upper - eps) dominates its optimistic corner (lower + eps). The
/// comparison always excludes the point itself.
Classification classify(std::span<const UncertaintyRegion> regions, const MarginVector& epsilon);

/// Same rules, but only the indices listed in `candidates` are tested; the
/// rest of the grid still acts as competitors. Results are sorted.
Classification classify_subset(std::span<const UncertaintyRegion> regions,
                               const MarginVector& epsilon, const IndexSet& candidates);

/// Largest-diameter point of P ∪ U (minus `visited` when `exclude_visited`),
/// ties to the smallest index. Throws pals::NoSelectablePoint when the
/// candidate set is empty.
std::size_t select_next(const Classification& classification,
                        std::span<const UncertaintyRegion> regions, bool exclude_visited,
                        const IndexSet& visited);

}  // namespace pals
