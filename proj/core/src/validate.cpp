#include "pals/validate.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/LU>

#include "pals/drivers.hpp"
#include "pals/error.hpp"
#include "pals/metrics.hpp"
#include "pals/rng.hpp"

namespace pals {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

// Rows dominated-by test against a front (strict in the dominated-region sense).
bool in_dominated_region(const Eigen::MatrixXd& front, double y1, double y2) {
  for (Eigen::Index i = 0; i < front.rows(); ++i) {
    if (front(i, 0) < y1 && front(i, 1) < y2) return true;
  }
  return false;
}

Eigen::MatrixXd random_front(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd f(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < f.rows(); ++i) f.row(i) << unit(rng), unit(rng);
  return f;
}

double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  }
  return worst;
}

}  // namespace

ObjectivePosterior full_data_posterior(const InputGrid& grid, const std::vector<std::size_t>& indices,
                                       const Eigen::VectorXd& values, const KernelParams& params) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(indices.size());
  if (n == 0 || values.size() != n) throw std::invalid_argument("full_data_posterior: size mismatch");
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(grid.dimension()));
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = grid.points().row(static_cast<Eigen::Index>(indices[static_cast<std::size_t>(i)]));
  Eigen::MatrixXd k = matern52_matrix(x, x, params.variance, params.lengthscales);
  k.diagonal().array() += params.noise_variance;
  const Eigen::MatrixXd k_inv = k.fullPivLu().inverse();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const double one_k_one = ones.dot(k_inv * ones);
  const double mean_hat = ones.dot(k_inv * values) / one_k_one;
  const Eigen::MatrixXd cross = matern52_matrix(x, grid.points(), params.variance, params.lengthscales);

  ObjectivePosterior out;
  out.params = params;
  out.constant_mean = mean_hat;
  const Eigen::VectorXd weights = k_inv * (values - mean_hat * ones);
  out.mean = (cross.transpose() * weights).array() + mean_hat;
  out.sd.resize(cross.cols());
  for (Eigen::Index g = 0; g < cross.cols(); ++g) {
    const Eigen::VectorXd kg = cross.col(g);
    const double u = 1.0 - ones.dot(k_inv * kg);
    const double var = params.variance - kg.dot(k_inv * kg) + u * u / one_k_one;
    out.sd[g] = std::sqrt(std::max(var, 0.0));
  }
  return out;
}

MonteCarloEstimate monte_carlo_dominated_volume(const Eigen::MatrixXd& front, const Eigen::Vector2d& ref,
                                                std::size_t samples, std::uint64_t seed) {
  if (front.rows() == 0) return {};
  const double lo1 = front.col(0).minCoeff();
  const double lo2 = front.col(1).minCoeff();
  const double box = (ref[0] - lo1) * (ref[1] - lo2);
  Rng rng(seed);
  std::uniform_real_distribution<double> u1(lo1, ref[0]);
  std::uniform_real_distribution<double> u2(lo2, ref[1]);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double y1 = u1(rng);
    const double y2 = u2(rng);
    hits += in_dominated_region(front, y1, y2) ? 1 : 0;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

MonteCarloEstimate monte_carlo_symmetric_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                                    const Eigen::Vector2d& ref, std::size_t samples,
                                                    std::uint64_t seed) {
  double lo1 = ref[0];
  double lo2 = ref[1];
  for (const Eigen::MatrixXd* f : {&a, &b}) {
    if (f->rows() == 0) continue;
    lo1 = std::min(lo1, f->col(0).minCoeff());
    lo2 = std::min(lo2, f->col(1).minCoeff());
  }
  const double box = (ref[0] - lo1) * (ref[1] - lo2);
  if (!(box > 0.0)) return {};
  Rng rng(seed);
  std::uniform_real_distribution<double> u1(lo1, ref[0]);
  std::uniform_real_distribution<double> u2(lo2, ref[1]);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double y1 = u1(rng);
    const double y2 = u2(rng);
    hits += in_dominated_region(a, y1, y2) != in_dominated_region(b, y1, y2) ? 1 : 0;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

PolynomialTable parse_polynomial_table(const std::string& text) {
  PolynomialTable table{};
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> values;
    double v = 0.0;
    while (fields >> v) values.push_back(v);
    if (!fields.eof()) throw ConfigError("coefficient table: non-numeric entry on line " + std::to_string(row + 1));
    if (values.empty()) continue;
    if (values.size() != 10) throw ConfigError("coefficient table: each line needs 10 values");
    if (row >= table.size()) throw ConfigError("coefficient table: more than 10 lines");
    std::copy(values.begin(), values.end(), table[row].begin());
    ++row;
  }
  if (row != table.size()) throw ConfigError("coefficient table: expected 10 lines");
  return table;
}

std::vector<CheckResult> run_validation(const PolynomialTable& table) {
  std::vector<CheckResult> checks;
  auto add = [&](std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  };

  for (const auto& spec : benchmark_specs()) {
    std::string name = "pareto set size " + spec.id;
    try {
      const Problem problem = make_problem(spec, table);
      const std::size_t size = problem.truth().pareto_set.size();
      add(name, size == spec.pareto_size, "expected " + std::to_string(spec.pareto_size) + ", got " + std::to_string(size));
    } catch (const std::exception& e) {
      add(name, false, e.what());
    }
  }

  {
    Rng rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> reps(1, 10);
    double worst = 0.0;
    for (int instance = 0; instance < 5; ++instance) {
      const InputGrid grid = InputGrid::regular(6, 2);
      KernelParams params;
      params.variance = 0.5 + unit(rng);
      params.lengthscales = Eigen::Vector2d(0.1 + unit(rng), 0.1 + unit(rng));
      params.noise_variance = 0.01 + 0.1 * unit(rng);
      ObservationStore store(grid.size(), 1);
      std::vector<std::size_t> all_indices;
      std::vector<double> all_values;
      std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
      for (int v = 0; v < 12; ++v) {
        const std::size_t index = pick(rng);
        Eigen::MatrixXd batch(reps(rng), 1);
        for (Eigen::Index r = 0; r < batch.rows(); ++r) {
          batch(r, 0) = std::sin(5.0 * grid.points()(static_cast<Eigen::Index>(index), 0)) + 0.3 * unit(rng);
          all_indices.push_back(index);
          all_values.push_back(batch(r, 0));
        }
        store.fold(index, batch);
      }
      const ObjectivePosterior folded = posterior(store.folded(0), grid, params);
      const ObjectivePosterior full = full_data_posterior(
          grid, all_indices, Eigen::Map<const Eigen::VectorXd>(all_values.data(), static_cast<Eigen::Index>(all_values.size())),
          params);
      worst = std::max({worst, max_relative_error(folded.mean, full.mean), max_relative_error(folded.sd, full.sd)});
    }
    add("replicate folding equivalence", worst <= 1e-8, "max relative error " + fmt(worst));
  }

  {
    KernelParams unit_params;
    unit_params.lengthscales = Eigen::VectorXd::Ones(1);
    const double k = matern52(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), unit_params);
    add("matern52 at unit distance", std::abs(k - 0.52399) < 1e-5, "value " + fmt(k));
  }

  {
    const Eigen::Vector2d ref = default_reference_point();
    Eigen::MatrixXd one(1, 2);
    one << 0.0, 0.0;
    Eigen::MatrixXd two(2, 2);
    two << 0.0, 0.5, 0.5, 0.0;
    Eigen::MatrixXd shifted(1, 2);
    shifted << 0.1, 0.1;
    const double v1 = dominated_volume_2d(one, ref);
    const double v2 = dominated_volume_2d(two, ref);
    const double vd = symmetric_difference_volume(one, shifted, ref);
    add("dominated volume hand cases",
        std::abs(v1 - 1.21) < 1e-12 && std::abs(v2 - 0.96) < 1e-12 && std::abs(vd - 0.21) < 1e-12,
        "V=" + fmt(v1) + ", " + fmt(v2) + ", V_d=" + fmt(vd));

    Rng rng(11);
    bool ok = true;
    std::string detail;
    for (int t = 0; t < 3; ++t) {
      const Eigen::MatrixXd a = random_front(rng, 15);
      const Eigen::MatrixXd b = random_front(rng, 15);
      const double exact = dominated_volume_2d(a, ref);
      const auto mc = monte_carlo_dominated_volume(a, ref, 200000, 100 + static_cast<std::uint64_t>(t));
      const double exact_d = symmetric_difference_volume(a, b, ref);
      const auto mc_d = monte_carlo_symmetric_difference(a, b, ref, 200000, 200 + static_cast<std::uint64_t>(t));
      ok = ok && std::abs(exact - mc.value) <= 4.0 * mc.standard_error + 1e-12 &&
           std::abs(exact_d - mc_d.value) <= 4.0 * mc_d.standard_error + 1e-12;
      detail += fmt(exact) + "~" + fmt(mc.value) + " ";
    }
    add("dominated volume Monte-Carlo oracle", ok, detail);
  }

  {
    const double b50 = beta_fixed(0.5);
    const double b99 = beta_fixed(0.99);
    const double inc = beta_increasing(1, 2, 441, 0.05);
    add("beta fixed p=0.5", std::abs(b50 - 0.45494) <= 1e-4, "value " + fmt(b50));
    add("beta fixed p=0.99", std::abs(b99 - 6.6349) <= 1e-3, "value " + fmt(b99));
    add("beta increasing n=1", std::abs(inc - 20.551) <= 1e-2, "value " + fmt(inc));
  }

  {
    Rng rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    bool ok = true;
    for (int t = 0; t < 20 && ok; ++t) {
      std::vector<UncertaintyRegion> regions;
      Eigen::MatrixXd means(60, 2);
      for (Eigen::Index i = 0; i < means.rows(); ++i) {
        means.row(i) << unit(rng), unit(rng);
        const ObjectiveVector mu = means.row(i).transpose();
        regions.push_back(rectangle_from_posterior(mu, Eigen::Vector2d(unit(rng), unit(rng)), 0.0));
      }
      const Classification c = classify(regions, MarginVector::zeros(2));
      ok = c.unclassified.empty() && c.pareto == pareto_indices(means);
    }
    add("zero-width classification equals Pareto set", ok, ok ? "20 random fields" : "mismatch");
  }
  return checks;
}

}  // namespace pals
