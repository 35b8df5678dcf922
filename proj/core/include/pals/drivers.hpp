#pragma once

// Sequential multi-objective optimization loops on a finite grid: PALS, the
// original PAL, and the PRS / CoRS / ParEGO-EIm baselines.
//
// A run evaluates an initial design, then repeats {fit the per-objective
// GPs, predict, record metrics, pick one grid point, evaluate it k times}
// until the driver's stopping rule fires. Trace row n describes the state
// after n batches; row 0 is the state after the initial design.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pals/gp.hpp"
#include "pals/pareto.hpp"
#include "pals/problems.hpp"

namespace pals {

enum class Algorithm { Pals, Pal, Prs, Cors, ParegoEim };
enum class BetaMode { Fixed, Increasing };
enum class IntersectionMode { None, Intersect, Corrected };
enum class NoiseEstimation { Joint, Pooled };
enum class Termination { AllClassified, Budget, AllVisited };

std::string_view to_string(Algorithm a);
std::string_view to_string(BetaMode m);
std::string_view to_string(IntersectionMode m);
std::string_view to_string(NoiseEstimation m);
std::string_view to_string(Termination t);
/// Accepts the names produced by to_string (case-insensitive); throws
/// ConfigError otherwise.
Algorithm parse_algorithm(std::string_view s);
IntersectionMode parse_intersection_mode(std::string_view s);
NoiseEstimation parse_noise_estimation(std::string_view s);

struct RunConfig {
  Algorithm algorithm = Algorithm::Pals;
  BetaMode beta_mode = BetaMode::Fixed;
  double coverage = 0.5;  // fixed mode: sqrt(beta) is the (0.5 + 0.5 p) normal quantile
  double delta = 0.05;    // increasing mode
  std::vector<double> epsilon;  // empty means all zeros
  std::size_t batch_size = 200;
  std::size_t budget = 10000;  // evaluations after the initial design
  IntersectionMode intersection = IntersectionMode::None;
  std::size_t n0 = 20;
  std::size_t initial_replicates = 10;
  std::size_t design_candidates = 1000;
  std::size_t refit_every = 1;
  std::size_t sample_paths = 40;  // CoRS
  double parego_rho = 0.05;
  NoiseEstimation noise_estimation = NoiseEstimation::Joint;
  int reml_starts = 5;
  bool record_wall_time = false;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

/// Independent seeds for the parts of a run. Runs of different methods that
/// share `design` see the same initial design and initial evaluations.
struct RunSeeds {
  std::uint64_t design = 0;
  std::uint64_t method = 0;

  /// Both streams derived from one seed.
  static RunSeeds from(std::uint64_t seed);
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t evaluations = 0;         // total, initial design included
  std::optional<std::size_t> selected;  // empty on the final row
  std::optional<double> beta;           // PAL family only
  std::optional<std::size_t> pareto_count;
  std::optional<std::size_t> dominated_count;
  std::optional<std::size_t> unclassified_count;
  double volume_difference = 0.0;
  double misclassification = 0.0;
  std::size_t empty_intersections = 0;  // this iteration
  double wall_time = 0.0;               // seconds, zero unless recorded
  IndexSet predicted_set;
  Eigen::MatrixXd predicted_front;      // metric units, rows match predicted_set
};

struct RunRecord {
  std::vector<IterationRecord> trace;
  IndexSet predicted_set;
  Eigen::MatrixXd predicted_front;  // metric units
  std::size_t evaluations = 0;
  std::size_t empty_intersections = 0;
  Termination termination = Termination::Budget;

  /// Number of batches after the initial design.
  std::size_t iterations() const { return trace.empty() ? 0 : trace.size() - 1; }
};

double beta_fixed(double coverage);
double beta_increasing(std::size_t n, std::size_t q, std::size_t grid_size, double delta);

/// Best of `candidates` random n0-subsets under the maximin distance criterion.
IndexSet initial_design(const InputGrid& grid, std::size_t n0, std::size_t candidates,
                        std::uint64_t seed);

struct PlugInPrediction {
  IndexSet pareto_set;
  Eigen::MatrixXd front;  // posterior means at pareto_set
};

PlugInPrediction plug_in_prediction(const PosteriorField& field);

/// Expected improvement below `target` for a Gaussian with the given mean and sd.
double expected_improvement(double mean, double sd, double target);

/// Per-point probability of a classification different from the plug-in one,
/// estimated from sample paths. Falls back to uniform when all are zero.
/// Result sums to one.
Eigen::VectorXd misclassification_weights(const Eigen::MatrixXd& means,
                                          const std::vector<Eigen::MatrixXd>& paths);

RunRecord run_pals(const Problem& problem, const RunConfig& config, const RunSeeds& seeds);
RunRecord run_pal_original(const Problem& problem, const RunConfig& config, const RunSeeds& seeds);
RunRecord run_prs(const Problem& problem, const RunConfig& config, const RunSeeds& seeds);
RunRecord run_cors(const Problem& problem, const RunConfig& config, const RunSeeds& seeds);
RunRecord run_parego_eim(const Problem& problem, const RunConfig& config, const RunSeeds& seeds);

/// Dispatches on config.algorithm.
RunRecord run(const Problem& problem, const RunConfig& config, const RunSeeds& seeds);
inline RunRecord run(const Problem& problem, const RunConfig& config, std::uint64_t seed) {
  return run(problem, config, RunSeeds::from(seed));
}

}  // namespace pals
