#pragma once

// Fast self-checks and the reference computations they compare against.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pals/gp.hpp"
#include "pals/problems.hpp"

namespace pals {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Pareto-set sizes, replicate folding, metric oracles, kernel and beta
/// values. `table` replaces the polynomial coefficients of f6..f15.
std::vector<CheckResult> run_validation(const PolynomialTable& table = default_polynomial_table());

/// Ordinary-kriging posterior computed from every individual observation
/// (one row per evaluation, noise variance params.noise_variance each), with
/// an explicit inverse of the full covariance matrix.
ObjectivePosterior full_data_posterior(const InputGrid& grid, const std::vector<std::size_t>& indices,
                                       const Eigen::VectorXd& values, const KernelParams& params);

struct MonteCarloEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Hit-or-miss estimate of the dominated area over the box [lower, ref],
/// where lower is the componentwise minimum of the front.
MonteCarloEstimate monte_carlo_dominated_volume(const Eigen::MatrixXd& front, const Eigen::Vector2d& ref,
                                                std::size_t samples, std::uint64_t seed);

/// Hit-or-miss estimate of the symmetric-difference area of two fronts.
MonteCarloEstimate monte_carlo_symmetric_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                                    const Eigen::Vector2d& ref, std::size_t samples,
                                                    std::uint64_t seed);

/// Polynomial coefficient table from text: ten lines (f6..f15) of ten
/// comma- or space-separated numbers. Throws ConfigError when malformed.
PolynomialTable parse_polynomial_table(const std::string& text);

}  // namespace pals
