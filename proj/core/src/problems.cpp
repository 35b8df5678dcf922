#include "pals/problems.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "pals/error.hpp"

namespace pals {

namespace {

double lerp(double lo, double hi, double t) { return lo + (hi - lo) * t; }

double f1(double x1, double x2) {
  return 780000.0 + 110000.0 * x1 - 12000.0 * x2 - 36000.0 * x1 * x2 + 280000.0 * x1 * x1 +
         50000.0 * x2 * x2;
}

double f2(double x1, double x2) {
  return 0.83 + 0.17 * x1 - 0.015 * x2 - 0.0038 * x1 * x2 + 0.061 * x1 * x1 + 0.0011 * x2 * x2;
}

double f3(double x1, double x2) {
  const double u = lerp(-7.5, 7.5, x1);
  const double v = lerp(-7.5, 7.5, x2);
  return std::exp(0.36 * (u + v)) + 0.6 * u + 1.2 * v * v + 3.0 * std::sin(0.8 * std::numbers::pi * u);
}

double branin(double x1, double x2) {
  constexpr double a = 5.1 / (4.0 * std::numbers::pi * std::numbers::pi);
  constexpr double b = 5.0 / std::numbers::pi;
  constexpr double c = 10.0;
  const double u = lerp(-5.0, 10.0, x1);
  const double v = lerp(0.0, 15.0, x2);
  const double t = v - a * u * u + b * u - 6.0;
  return t * t + c * std::cos(u) + 10.0;
}

double rosenbrock(double x1, double x2) {
  const double u = lerp(-5.0, 5.0, x1);
  const double v = lerp(-5.0, 5.0, x2);
  const double t = v - u * u;
  return 100.0 * t * t + (1.0 - u) * (1.0 - u);
}

ObjectiveSpec objective(int f, double noise, double s1 = 0.0, double s2 = 0.0) {
  ObjectiveSpec o;
  o.function_id = f;
  o.shift = Eigen::Vector2d(s1, s2);
  o.noise_variance = noise;
  return o;
}

Eigen::VectorXd raw_column(const ObjectiveSpec& o, const InputGrid& grid, const PolynomialTable& table) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::Vector2d x = grid.point(i).head<2>() - o.shift;
    v[static_cast<Eigen::Index>(i)] = eval_raw(o.function_id, x, table);
  }
  return v;
}

GroundTruth compute_truth(const Eigen::MatrixXd& values) {
  GroundTruth t;
  t.pareto_set = pareto_indices(values);
  t.front.resize(static_cast<Eigen::Index>(t.pareto_set.size()), values.cols());
  for (std::size_t r = 0; r < t.pareto_set.size(); ++r) {
    t.front.row(static_cast<Eigen::Index>(r)) = values.row(static_cast<Eigen::Index>(t.pareto_set[r]));
  }
  return t;
}

}  // namespace

const PolynomialTable& default_polynomial_table() {
  static const PolynomialTable table = {{
      {0.36, 8.1, 7.5, -83, 26, -80, -440, 94, 920, 930},          // f6
      {0.68, -9.4, 9.1, -2.9, -60, 72, 160, -830, -580, -920},     // f7
      {0.094, -7.2, 7, 49, 68, -49, 630, -510, 860, -300},         // f8
      {0.61, 5, 2.3, -5.3, 30, -66, -170, -99, -830, 430},         // f9
      {-0.38, 8.5, 1.4, 63, 81, 96, -120, -780, -480, -180},       // f10
      {-0.19, 4.8, 2.1, 42, 56, 77, 410, 360, 150, -16},           // f11
      {0.78, 6, -4.7, 90, -85, -82, 600, 890, 370, -740},          // f12
      {-0.45, 7.8, -7.7, 28, 34, -31, -500, -170, -480, 530},      // f13
      {-0.45, -9.3, -3.5, 14, -9.7, 22, -880, -370, 550, 390},     // f14
      {0.75, 7.4, -8.2, -98, 15, -31, -450, -62, 780, -260},       // f15
  }};
  return table;
}

double eval_polynomial(const PolynomialCoefficients& c, double x1, double x2) {
  // Grouped by powers of x1 (Horner in x1 with x2-polynomial coefficients).
  const double a0 = c[0] + x2 * (c[2] + x2 * (c[5] + x2 * c[9]));
  const double a1 = c[1] + x2 * (c[3] + x2 * c[7]);
  const double a2 = c[4] + x2 * c[6];
  const double a3 = c[8];
  return a0 + x1 * (a1 + x1 * (a2 + x1 * a3));
}

double eval_raw(int function_id, const Eigen::Vector2d& x, const PolynomialTable& table) {
  if (!x.allFinite()) throw std::invalid_argument("eval_raw: non-finite input");
  switch (function_id) {
    case 1: return f1(x[0], x[1]);
    case 2: return f2(x[0], x[1]);
    case 3: return f3(x[0], x[1]);
    case 4: return branin(x[0], x[1]);
    case 5: return rosenbrock(x[0], x[1]);
    default: break;
  }
  if (function_id >= 6 && function_id <= 15) {
    return eval_polynomial(table[static_cast<std::size_t>(function_id - 6)], x[0], x[1]);
  }
  throw std::invalid_argument("eval_raw: unknown function id " + std::to_string(function_id));
}

const std::vector<ProblemSpec>& benchmark_specs() {
  // g1 uses x1 in [-1, 0]: the (f1, f2) pair has the reference Pareto-set
  // size of 136 points on that half of the square and 19 on [0,1]^2.
  static const std::vector<ProblemSpec> specs = {
      {"g1", {objective(1, 3.6e9, 1.0, 0.0), objective(2, 3.9e-3, 1.0, 0.0)}, 136},
      {"g2", {objective(4, 3.1e2), objective(3, 4.8e3)}, 10},
      {"g3", {objective(4, 3.1e2), objective(5, 5.7e8)}, 12},
      {"g4", {objective(3, 4.8e3), objective(5, 5.7e8)}, 7},
      {"g5", {objective(6, 7.0e2, 0.5, 0.5), objective(7, 5.6e3, 0.5, 0.5)}, 60},
      {"g6", {objective(8, 5.8e2, 0.5, 0.5), objective(9, 3.1e3, 0.5, 0.5)}, 22},
      {"g7", {objective(10, 2.1e3, 0.5, 0.5), objective(11, 3.2e2, 0.5, 0.5)}, 67},
      {"g8", {objective(12, 1.4e4, 0.3, 0.8), objective(13, 1.6e3, 0.6, 0.6)}, 63},
      {"g9", {objective(14, 3.7e3, 0.3, 0.8), objective(15, 2.0e4, 0.3, 0.8)}, 36},
  };
  return specs;
}

const ProblemSpec& benchmark_spec(std::string_view id) {
  for (const auto& s : benchmark_specs()) {
    if (s.id == id) return s;
  }
  throw ConfigError("unknown problem '" + std::string(id) + "'");
}

const InputGrid& benchmark_grid() {
  static const InputGrid grid = InputGrid::regular(21, 2);
  return grid;
}

ScaledObjective scale_to_unit(int function_id, const Eigen::Vector2d& shift, const InputGrid& grid,
                              const PolynomialTable& table) {
  if (grid.size() == 0) throw std::invalid_argument("scale_to_unit: empty grid");
  ObjectiveSpec o;
  o.function_id = function_id;
  o.shift = shift;
  const Eigen::VectorXd raw = raw_column(o, grid, table);
  ScaledObjective out;
  out.min = raw.minCoeff();
  out.max = raw.maxCoeff();
  if (!(out.max > out.min)) throw DegenerateObjective();
  out.values = (raw.array() - out.min) / (out.max - out.min);
  return out;
}

Problem::Problem(std::string name, InputGrid grid, Eigen::MatrixXd values, Eigen::VectorXd noise_sd,
                 Eigen::VectorXd metric_offset, Eigen::VectorXd metric_scale)
    : name_(std::move(name)),
      grid_(std::move(grid)),
      values_(std::move(values)),
      noise_sd_(std::move(noise_sd)),
      metric_offset_(std::move(metric_offset)),
      metric_scale_(std::move(metric_scale)) {
  const auto q = values_.cols();
  if (static_cast<std::size_t>(values_.rows()) != grid_.size() || q < 1) {
    throw std::invalid_argument("Problem: values must have one row per grid point");
  }
  if (noise_sd_.size() != q || metric_offset_.size() != q || metric_scale_.size() != q) {
    throw std::invalid_argument("Problem: per-objective vectors must have q entries");
  }
  if ((noise_sd_.array() < 0.0).any() || !noise_sd_.allFinite()) {
    throw std::invalid_argument("Problem: noise sd must be finite and nonnegative");
  }
  if (!(metric_scale_.array() > 0.0).all()) {
    throw std::invalid_argument("Problem: metric scale must be positive");
  }
  truth_ = compute_truth(values_);
}

Problem::Problem(std::string name, InputGrid grid, Eigen::MatrixXd values, Eigen::VectorXd noise_sd)
    : Problem(std::move(name), std::move(grid), values, noise_sd,
              Eigen::VectorXd::Zero(values.cols()), Eigen::VectorXd::Ones(values.cols())) {}

Eigen::MatrixXd Problem::to_metric_units(const Eigen::MatrixXd& rows) const {
  return (rows.rowwise() - metric_offset_.transpose()).array().rowwise() /
         metric_scale_.transpose().array();
}

Eigen::MatrixXd Problem::sample(std::size_t index, std::size_t k, Rng& rng) const {
  if (index >= grid_.size()) throw std::invalid_argument("sample: index out of range");
  if (k < 1) throw std::invalid_argument("sample: k must be at least 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto q = values_.cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(k), q);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index j = 0; j < q; ++j) {
      out(r, j) = values_(static_cast<Eigen::Index>(index), j) + noise_sd_[j] * normal(rng);
    }
  }
  return out;
}

Problem make_problem(const ProblemSpec& spec, const PolynomialTable& table) {
  const InputGrid& grid = benchmark_grid();
  Eigen::MatrixXd values(static_cast<Eigen::Index>(grid.size()), 2);
  Eigen::VectorXd sd(2);
  for (Eigen::Index j = 0; j < 2; ++j) {
    const auto& o = spec.objectives[static_cast<std::size_t>(j)];
    const ScaledObjective s = scale_to_unit(o.function_id, o.shift, grid, table);
    values.col(j) = s.values;
    sd[j] = std::sqrt(o.noise_variance) / (s.max - s.min);
  }
  return Problem(spec.id, grid, std::move(values), std::move(sd));
}

Problem make_raw_problem(const ProblemSpec& spec, const PolynomialTable& table) {
  const InputGrid& grid = benchmark_grid();
  Eigen::MatrixXd values(static_cast<Eigen::Index>(grid.size()), 2);
  Eigen::VectorXd sd(2), offset(2), scale(2);
  for (Eigen::Index j = 0; j < 2; ++j) {
    const auto& o = spec.objectives[static_cast<std::size_t>(j)];
    values.col(j) = raw_column(o, grid, table);
    offset[j] = values.col(j).minCoeff();
    scale[j] = values.col(j).maxCoeff() - offset[j];
    if (!(scale[j] > 0.0)) throw DegenerateObjective();
    sd[j] = std::sqrt(o.noise_variance);
  }
  return Problem(spec.id + "-raw", grid, std::move(values), std::move(sd), std::move(offset),
                 std::move(scale));
}

const Problem& benchmark_problem(std::string_view id) {
  static std::mutex mutex;
  static std::map<std::string, Problem, std::less<>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(id);
  if (it == cache.end()) {
    it = cache.emplace(std::string(id), make_problem(benchmark_spec(id))).first;
  }
  return it->second;
}

ProblemSpec with_noise_variance(ProblemSpec spec, double variance) {
  if (!(variance >= 0.0)) throw std::invalid_argument("noise variance must be nonnegative");
  for (auto& o : spec.objectives) o.noise_variance = variance;
  return spec;
}

const GroundTruth& ground_truth(const Problem& problem) { return problem.truth(); }

Eigen::MatrixXd sample_noisy(const Problem& problem, std::size_t index, std::size_t k, Rng& rng) {
  return problem.sample(index, k, rng);
}

}  // namespace pals
