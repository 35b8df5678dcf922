#pragma once

// Bi-objective benchmark problems g1..g9 on the 21 x 21 grid over [0,1]^2.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pals/grid.hpp"
#include "pals/pareto.hpp"
#include "pals/rng.hpp"

namespace pals {

/// c1..c10 of c1 + c2 x1 + c3 x2 + c4 x1 x2 + c5 x1^2 + c6 x2^2 + c7 x1^2 x2
/// + c8 x1 x2^2 + c9 x1^3 + c10 x2^3.
using PolynomialCoefficients = std::array<double, 10>;

/// Coefficients of f6..f15, in that order.
using PolynomialTable = std::array<PolynomialCoefficients, 10>;

const PolynomialTable& default_polynomial_table();

double eval_polynomial(const PolynomialCoefficients& c, double x1, double x2);

/// Test function f_id (1..15) at x in [0,1]^2. f3, f4 (Branin) and f5
/// (Rosenbrock) first map the unit square affinely onto their native domain:
/// f3 on [-7.5, 7.5]^2, Branin on [-5, 10] x [0, 15], Rosenbrock on [-5, 5]^2.
/// Throws std::invalid_argument for an unknown id.
double eval_raw(int function_id, const Eigen::Vector2d& x,
                const PolynomialTable& table = default_polynomial_table());

struct ObjectiveSpec {
  int function_id = 0;
  Eigen::Vector2d shift = Eigen::Vector2d::Zero();  // objective is f(x - shift)
  double noise_variance = 0.0;                      // raw units
};

struct ProblemSpec {
  std::string id;
  std::array<ObjectiveSpec, 2> objectives;
  std::size_t pareto_size = 0;  // reference cardinality of the true Pareto set
};

/// g1..g9 in order.
const std::vector<ProblemSpec>& benchmark_specs();
/// Throws ConfigError for an unknown id.
const ProblemSpec& benchmark_spec(std::string_view id);

/// The 21 x 21 regular grid on [0,1]^2.
const InputGrid& benchmark_grid();

struct ScaledObjective {
  Eigen::VectorXd values;  // in [0, 1], one per grid point
  double min = 0.0;        // raw extrema over the grid
  double max = 0.0;
};

/// (f(x - shift) - min) / (max - min) over the grid. Throws
/// DegenerateObjective when the function is constant on the grid.
ScaledObjective scale_to_unit(int function_id, const Eigen::Vector2d& shift, const InputGrid& grid,
                              const PolynomialTable& table = default_polynomial_table());

struct GroundTruth {
  IndexSet pareto_set;
  Eigen::MatrixXd front;  // |P| x q, rows in pareto_set order
};

/// A finite-grid problem with homoscedastic Gaussian noise: the unit the
/// optimization drivers work on.
class Problem {
 public:
  /// `values` is |grid| x q, `noise_sd` has q entries. `metric_offset` and
  /// `metric_scale` map objective values into the unit box used by the
  /// volume metrics: unit = (value - offset) / scale.
  Problem(std::string name, InputGrid grid, Eigen::MatrixXd values, Eigen::VectorXd noise_sd,
          Eigen::VectorXd metric_offset, Eigen::VectorXd metric_scale);
  Problem(std::string name, InputGrid grid, Eigen::MatrixXd values, Eigen::VectorXd noise_sd);

  const std::string& name() const { return name_; }
  const InputGrid& grid() const { return grid_; }
  std::size_t objectives() const { return static_cast<std::size_t>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::VectorXd& noise_sd() const { return noise_sd_; }
  const GroundTruth& truth() const { return truth_; }

  /// Objective rows mapped into the metric unit box.
  Eigen::MatrixXd to_metric_units(const Eigen::MatrixXd& rows) const;

  /// k x q noisy evaluations at `index`, drawn replicate by replicate.
  Eigen::MatrixXd sample(std::size_t index, std::size_t k, Rng& rng) const;

 private:
  std::string name_;
  InputGrid grid_;
  Eigen::MatrixXd values_;
  Eigen::VectorXd noise_sd_;
  Eigen::VectorXd metric_offset_;
  Eigen::VectorXd metric_scale_;
  GroundTruth truth_;
};

/// Scaled benchmark problem: objectives in [0,1], noise sd divided by the
/// raw range of each objective.
Problem make_problem(const ProblemSpec& spec, const PolynomialTable& table = default_polynomial_table());
/// The same problem in raw units (raw values, raw noise); metrics are
/// computed after scaling, so results are directly comparable.
Problem make_raw_problem(const ProblemSpec& spec,
                         const PolynomialTable& table = default_polynomial_table());
/// Cached scaled problem by id ("g1".."g9").
const Problem& benchmark_problem(std::string_view id);

/// Copy of `spec` with both raw noise variances replaced.
ProblemSpec with_noise_variance(ProblemSpec spec, double variance);

const GroundTruth& ground_truth(const Problem& problem);

/// Free-function form of Problem::sample.
Eigen::MatrixXd sample_noisy(const Problem& problem, std::size_t index, std::size_t k, Rng& rng);

}  // namespace pals
