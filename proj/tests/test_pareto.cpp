#include <algorithm>
#include <random>
#include <vector>

#include <doctest.h>

#include "pals/error.hpp"
#include "pals/pareto.hpp"

using pals::IndexSet;
using pals::ObjectiveVector;
using pals::UncertaintyRegion;

namespace {

ObjectiveVector vec(std::initializer_list<double> values) {
  ObjectiveVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

UncertaintyRegion box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  return {vec(lo), vec(hi)};
}

IndexSet brute_force_pareto(const std::vector<ObjectiveVector>& points) {
  IndexSet out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      bool all_le = true;
      bool any_lt = false;
      for (Eigen::Index c = 0; c < points[i].size(); ++c) {
        all_le = all_le && points[j](c) <= points[i](c);
        any_lt = any_lt || points[j](c) < points[i](c);
      }
      dominated = all_le && any_lt;
    }
    if (!dominated) out.push_back(i);
  }
  return out;
}

bool is_partition(const pals::Classification& c, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto* set : {&c.pareto, &c.dominated, &c.unclassified}) {
    for (std::size_t i : *set) {
      if (i >= n) return false;
      ++seen[i];
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

}  // namespace

TEST_CASE("dominates: strictness and equal coordinates") {
  CHECK(pals::dominates(vec({0, 1}), vec({1, 1})));
  CHECK_FALSE(pals::dominates(vec({1, 1}), vec({1, 1})));
  CHECK_FALSE(pals::dominates(vec({0, 2}), vec({1, 1})));
  CHECK_THROWS_AS(pals::dominates(vec({0, 1}), vec({0, 1, 2})), std::invalid_argument);
}

TEST_CASE("dominates: a front of three points and a dominated fourth") {
  // A staircase z1, z2, z3 with z4 inside z1's dominated cone.
  const auto z1 = vec({0.1, 0.7});
  const auto z2 = vec({0.4, 0.35});
  const auto z3 = vec({0.8, 0.1});
  const auto z4 = vec({0.3, 0.9});
  const auto z5 = vec({0.6, 0.6});
  const auto z6 = vec({0.9, 0.5});
  CHECK(pals::dominates(z1, z4));
  CHECK_FALSE(pals::dominates(z1, z2));
  CHECK_FALSE(pals::dominates(z2, z1));
  const std::vector<ObjectiveVector> points{z1, z2, z3, z4, z5, z6};
  CHECK(pals::pareto_indices(points) == IndexSet{0, 1, 2});
}

TEST_CASE("dominates: irreflexive, asymmetric and transitive on random vectors") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coarse(0, 3);  // small range forces ties
  for (int trial = 0; trial < 2000; ++trial) {
    const Eigen::Index q = 1 + trial % 4;
    ObjectiveVector a(q), b(q), c(q);
    for (Eigen::Index j = 0; j < q; ++j) {
      a(j) = coarse(rng);
      b(j) = coarse(rng);
      c(j) = coarse(rng);
    }
    CHECK_FALSE(pals::dominates(a, a));
    CHECK_FALSE((pals::dominates(a, b) && pals::dominates(b, a)));
    if (pals::dominates(a, b) && pals::dominates(b, c)) CHECK(pals::dominates(a, c));
  }
}

TEST_CASE("pareto_indices: edge cases") {
  CHECK(pals::pareto_indices(std::vector<ObjectiveVector>{vec({3, 4})}) == IndexSet{0});
  const std::vector<ObjectiveVector> same(5, vec({1, 2}));
  CHECK(pals::pareto_indices(same) == IndexSet{0, 1, 2, 3, 4});
  CHECK_THROWS_AS(pals::pareto_indices(std::vector<ObjectiveVector>{}), pals::EmptyPointSet);
}

TEST_CASE("pareto_indices agrees with a brute-force double loop") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> grid(0, 9);
  for (std::size_t n : {1u, 2u, 7u, 50u, 200u, 500u}) {
    for (int q : {2, 3}) {
      for (int discrete = 0; discrete < 2; ++discrete) {
        std::vector<ObjectiveVector> points;
        Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), q);
        for (std::size_t i = 0; i < n; ++i) {
          ObjectiveVector z(q);
          for (int j = 0; j < q; ++j) z(j) = discrete ? grid(rng) : unit(rng);
          points.push_back(z);
          rows.row(static_cast<Eigen::Index>(i)) = z.transpose();
        }
        const IndexSet expected = brute_force_pareto(points);
        CHECK(pals::pareto_indices(points) == expected);
        CHECK(pals::pareto_indices(rows) == expected);
      }
    }
  }
}

TEST_CASE("rectangle_from_posterior") {
  const auto r = pals::rectangle_from_posterior(vec({0.5, 0.5}), vec({0.1, 0.2}), 4.0);
  CHECK(r.lower(0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(r.lower(1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(r.upper(0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(r.upper(1) == doctest::Approx(0.9).epsilon(1e-15));

  const auto flat = pals::rectangle_from_posterior(vec({0.5, 0.5}), vec({0.1, 0.2}), 0.0);
  CHECK(flat == UncertaintyRegion::point(vec({0.5, 0.5})));
  const auto no_sd = pals::rectangle_from_posterior(vec({0.5, 0.5}), vec({0.0, 0.0}), 9.0);
  CHECK(no_sd == UncertaintyRegion::point(vec({0.5, 0.5})));

  CHECK_THROWS_AS(pals::rectangle_from_posterior(vec({0, 0}), vec({0.1, 0.1}), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(pals::rectangle_from_posterior(vec({0, 0}), vec({-0.1, 0.1}), 1.0), std::invalid_argument);

  // Monotone in beta.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const auto mu = vec({unit(rng), unit(rng)});
    const auto sd = vec({unit(rng), unit(rng)});
    const double b1 = 3 * unit(rng);
    const double b2 = b1 + 3 * unit(rng);
    CHECK(pals::rectangle_from_posterior(mu, sd, b1).subset_of(pals::rectangle_from_posterior(mu, sd, b2)));
  }
}

TEST_CASE("intersect_regions") {
  const auto meet = pals::intersect_regions(box({0, 0}, {2, 2}), box({1, 1}, {3, 3}));
  REQUIRE(meet.has_value());
  CHECK(*meet == box({1, 1}, {2, 2}));
  CHECK_FALSE(pals::intersect_regions(box({0, 0}, {1, 1}), box({2, 2}, {3, 3})).has_value());
  const auto r = box({0.2, 0.1}, {0.4, 0.9});
  CHECK(*pals::intersect_regions(r, r) == r);
  // Touching boxes meet in a degenerate box.
  CHECK(*pals::intersect_regions(box({0, 0}, {1, 1}), box({1, 0}, {2, 1})) == box({1, 0}, {1, 1}));
}

TEST_CASE("corrected_intersect") {
  CHECK(pals::corrected_intersect(box({0, 0}, {1, 1}), box({2, 2}, {3, 3}), vec({2.5, 2.5})) ==
        UncertaintyRegion::point(vec({2.5, 2.5})));
  CHECK(pals::corrected_intersect(box({0, 0}, {2, 2}), box({1, 1}, {3, 3}), vec({1.5, 1.2})) ==
        box({1, 1}, {2, 2}));
  CHECK(pals::corrected_intersect(box({0, 0}, {2, 2}), box({1, 1}, {3, 3}), vec({0.5, 2.5})) ==
        box({0.5, 1}, {2, 2.5}));
}

TEST_CASE("classify: hand cases") {
  const auto eps0 = pals::MarginVector::zeros(2);
  {
    const std::vector<UncertaintyRegion> regions{UncertaintyRegion::point(vec({0, 0})),
                                                 UncertaintyRegion::point(vec({1, 1}))};
    const auto c = pals::classify(regions, eps0);
    CHECK(c.pareto == IndexSet{0});
    CHECK(c.dominated == IndexSet{1});
    CHECK(c.unclassified.empty());
  }
  {
    // Coincident points never dominate each other.
    const std::vector<UncertaintyRegion> points(4, UncertaintyRegion::point(vec({0.2, 0.7})));
    const auto c = pals::classify(points, eps0);
    CHECK(c.pareto == IndexSet{0, 1, 2, 3});
    CHECK(c.dominated.empty());
    CHECK(c.unclassified.empty());
    // Coincident boxes of positive width stay undecided.
    const std::vector<UncertaintyRegion> boxes(4, box({0.2, 0.2}, {0.6, 0.7}));
    CHECK(pals::classify(boxes, eps0).unclassified == IndexSet{0, 1, 2, 3});
  }
  {
    // Overlapping boxes: neither is certain.
    const std::vector<UncertaintyRegion> regions{box({0, 0}, {1, 1}), box({0.5, 0.5}, {1.5, 1.5})};
    const auto c = pals::classify(regions, eps0);
    CHECK(c.pareto.empty());
    CHECK(c.dominated.empty());
    CHECK(c.unclassified == IndexSet{0, 1});
  }
  {
    // A large margin makes both points Pareto because a point never competes
    // with itself.
    const std::vector<UncertaintyRegion> regions{box({0, 0}, {1, 1}), box({0.5, 0.5}, {1.5, 1.5})};
    const auto c = pals::classify(regions, pals::MarginVector(vec({2, 2})));
    CHECK(c.pareto == IndexSet{0, 1});
  }
}

TEST_CASE("classify: degenerate regions reduce to pareto_indices of the means") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(0, 6);
  const auto eps0 = pals::MarginVector::zeros(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial) * 4;
    std::vector<ObjectiveVector> means;
    std::vector<UncertaintyRegion> regions;
    for (std::size_t i = 0; i < n; ++i) {
      const auto mu = trial % 2 ? vec({unit(rng), unit(rng)}) : vec({double(coarse(rng)), double(coarse(rng))});
      means.push_back(mu);
      regions.push_back(pals::rectangle_from_posterior(mu, vec({unit(rng), unit(rng)}), 0.0));
    }
    const auto c = pals::classify(regions, eps0);
    CHECK(c.unclassified.empty());
    CHECK(c.pareto == pals::pareto_indices(means));
  }
}

TEST_CASE("classify: partition, purity and margin monotonicity") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 30;
    std::vector<UncertaintyRegion> regions;
    for (std::size_t i = 0; i < n; ++i) {
      regions.push_back(
          pals::rectangle_from_posterior(vec({unit(rng), unit(rng)}), vec({0.1 * unit(rng), 0.1 * unit(rng)}), 1.0));
    }
    const pals::MarginVector small(vec({0.01, 0.0}));
    const pals::MarginVector large(vec({0.05, 0.03}));
    const auto a = pals::classify(regions, small);
    const auto b = pals::classify(regions, large);
    CHECK(is_partition(a, n));
    CHECK(is_partition(b, n));
    const auto again = pals::classify(regions, small);
    CHECK(again.pareto == a.pareto);
    CHECK(again.dominated == a.dominated);
    // Wider margins only add certainty.
    CHECK(std::includes(b.pareto.begin(), b.pareto.end(), a.pareto.begin(), a.pareto.end()));
    CHECK(b.unclassified.size() <= a.unclassified.size());
  }
}

TEST_CASE("classify_subset keeps the rest of the grid as competitors") {
  const std::vector<UncertaintyRegion> regions{UncertaintyRegion::point(vec({0, 0})),
                                               UncertaintyRegion::point(vec({1, 1})),
                                               UncertaintyRegion::point(vec({2, -1}))};
  const auto c = pals::classify_subset(regions, pals::MarginVector::zeros(2), IndexSet{1});
  CHECK(c.dominated == IndexSet{1});
  CHECK(c.pareto.empty());
}

TEST_CASE("select_next") {
  pals::Classification c;
  c.unclassified = {0};
  std::vector<UncertaintyRegion> regions{box({0, 0}, {3, 4})};
  CHECK(pals::select_next(c, regions, false, {}) == 0);
  CHECK(regions[0].diameter() == doctest::Approx(5.0).epsilon(1e-15));

  regions = {box({0, 0}, {3, 4}), box({0, 0}, {0, 2})};
  c.unclassified = {0, 1};
  CHECK(pals::select_next(c, regions, false, {}) == 0);

  regions.assign(8, box({0, 0}, {1, 1}));
  c = {};
  c.pareto = {7};
  c.unclassified = {3};
  c.dominated = {0, 1, 2, 4, 5, 6};
  CHECK(pals::select_next(c, regions, false, {}) == 3);
  CHECK(pals::select_next(c, regions, true, {3}) == 7);
  CHECK_THROWS_AS(pals::select_next(c, regions, true, {3, 7}), pals::NoSelectablePoint);
  // Revisits allowed: a visited point stays selectable.
  CHECK(pals::select_next(c, regions, false, {3, 7}) == 3);
}
