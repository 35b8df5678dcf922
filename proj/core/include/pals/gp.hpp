#pragma once

// Gaussian-process regression on a finite grid with homoscedastic Gaussian
// noise and an unknown constant mean integrated out under a flat prior
// (ordinary kriging). Replicated evaluations are folded into per-point
// sufficient statistics, so the linear algebra scales with the number of
// distinct visited points and not with the number of evaluations.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pals/grid.hpp"
#include "pals/pareto.hpp"

namespace pals {

/// Matérn 5/2 covariance parameters for one objective.
struct KernelParams {
  double variance = 1.0;
  Eigen::VectorXd lengthscales;
  double noise_variance = 1.0;

  /// Throws std::invalid_argument unless every entry is finite and positive.
  void validate() const;
};

/// variance * (1 + sqrt5 r + 5 r^2 / 3) * exp(-sqrt5 r), with r the distance
/// after dividing each coordinate by its lengthscale.
double matern52(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const KernelParams& params);

/// Cross-covariance matrix between the rows of `a` and the rows of `b`.
Eigen::MatrixXd matern52_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                double variance, const Eigen::VectorXd& lengthscales);

/// Sufficient statistics of one objective at the distinct visited points.
struct FoldedData {
  IndexSet indices;           // ascending grid indices
  Eigen::VectorXd counts;     // replicate count per index
  Eigen::VectorXd means;      // empirical mean per index
  double within_ss = 0.0;     // pooled sum of squared deviations from the means
  bool has_within = true;     // false when within_ss carries no information

  std::size_t distinct() const { return indices.size(); }
  double total_count() const { return counts.sum(); }
};

/// Replicate-folded noisy evaluations on a grid.
class ObservationStore {
 public:
  struct Visit {
    std::size_t index;
    std::size_t replicates;
  };

  ObservationStore() = default;
  ObservationStore(std::size_t grid_size, std::size_t objectives);

  /// Adds a k x q batch of evaluations at `index`. Per-point statistics are
  /// merged with the pairwise (Chan) update from a two-pass batch summary.
  void fold(std::size_t index, const Eigen::MatrixXd& values);

  std::size_t grid_size() const { return counts_.size(); }
  std::size_t objectives() const { return static_cast<std::size_t>(means_.cols()); }
  std::size_t count(std::size_t index) const { return counts_.at(index); }
  double mean(std::size_t index, std::size_t objective) const;
  double sum_sq_dev(std::size_t index, std::size_t objective) const;
  ObjectiveVector mean_vector(std::size_t index) const;

  const std::vector<Visit>& visits() const { return visits_; }
  /// Distinct visited indices, ascending.
  IndexSet visited() const;
  std::size_t total_evaluations() const { return total_; }

  FoldedData folded(std::size_t objective) const;

 private:
  std::vector<std::size_t> counts_;
  Eigen::MatrixXd means_;  // grid_size x q
  Eigen::MatrixXd m2_;     // grid_size x q
  std::vector<Visit> visits_;
  std::size_t total_ = 0;
};

/// Value-returning wrapper around ObservationStore::fold.
ObservationStore fold_observation(ObservationStore store, std::size_t index,
                                  const Eigen::MatrixXd& values);

// ---------------------------------------------------------------------------
// Hyperparameter estimation

struct RemlOptions {
  int starts = 5;
  int max_iterations = 100;
  /// Lengthscale box, relative to the per-axis grid span.
  double lengthscale_min = 1e-3;
  double lengthscale_max = 1e3;
  /// Box for noise_variance / variance.
  double noise_ratio_min = 1e-8;
  double noise_ratio_max = 1e3;
  std::uint64_t seed = 0;
  /// Optional extra starting point, tried first (e.g. the previous fit).
  std::optional<KernelParams> warm_start;
  /// When set, the noise variance is held at this value and the process
  /// variance is optimized alongside the lengthscales.
  std::optional<double> fixed_noise_variance;
};

/// Pooled within-point replicate variance SSW / (N - m); nullopt when no
/// point has more than one replicate or the scatter is zero.
std::optional<double> pooled_noise_variance(const FoldedData& data);

struct RemlFit {
  KernelParams params;
  double constant_mean = 0.0;
  double log_likelihood = 0.0;  // restricted log-likelihood at params
  bool converged = false;
  bool degenerate = false;      // constant data; noise pinned at its lower bound
  int evaluations = 0;
};

/// Restricted log-likelihood (constant mean profiled out, additive constants
/// dropped) of the folded data at the given parameters. When
/// data.has_within is set, the within-point replicate scatter contributes the
/// exact full-data term for the noise variance.
double reml_log_likelihood(const FoldedData& data, const InputGrid& grid,
                           const KernelParams& params);

/// Maximizes the restricted likelihood over lengthscales and noise ratio in
/// log space, with the process variance profiled out in closed form.
/// Deterministic for a given data set and options.seed.
RemlFit fit_reml(const FoldedData& data, const InputGrid& grid, const KernelParams& init,
                 const RemlOptions& options = {});

KernelParams fit_reml(const ObservationStore& store, const InputGrid& grid, std::size_t objective,
                      const KernelParams& init, const RemlOptions& options = {});

/// Starting values: lengthscales at half the grid span, process and noise
/// variance at half the sample variance of the folded means (1 if zero).
KernelParams default_kernel_params(const FoldedData& data, const InputGrid& grid);

// ---------------------------------------------------------------------------
// Posterior

/// Ordinary-kriging posterior of one objective conditioned on folded data.
class GpPosterior {
 public:
  GpPosterior(const FoldedData& data, const InputGrid& grid, const KernelParams& params);

  const KernelParams& params() const { return params_; }
  double constant_mean() const { return constant_mean_; }
  double jitter() const { return jitter_; }

  /// Posterior mean and standard deviation at every grid point.
  void predict(Eigen::VectorXd& mean, Eigen::VectorXd& sd) const;
  /// Full posterior covariance over the grid.
  Eigen::MatrixXd covariance() const;

 private:
  Eigen::MatrixXd grid_points_;
  KernelParams params_;
  Eigen::MatrixXd cross_;       // m x G prior covariance, visited vs grid
  Eigen::MatrixXd whitened_;    // L^{-1} cross_
  Eigen::VectorXd whitened_one_;
  Eigen::VectorXd alpha_;       // A^{-1} (y - mean)
  double one_a_one_ = 0.0;      // 1' A^{-1} 1
  double constant_mean_ = 0.0;
  double jitter_ = 0.0;
};

struct ObjectivePosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  KernelParams params;
  double constant_mean = 0.0;
};

/// Posterior mean and sd of every objective over the whole grid.
struct PosteriorField {
  std::vector<ObjectivePosterior> objectives;

  std::size_t size() const { return objectives.empty() ? 0 : static_cast<std::size_t>(objectives.front().mean.size()); }
  std::size_t dimension() const { return objectives.size(); }
  ObjectiveVector mean(std::size_t index) const;
  ObjectiveVector sd(std::size_t index) const;
  /// G x q matrix of posterior means.
  Eigen::MatrixXd means() const;
};

PosteriorField posterior(const ObservationStore& store, const InputGrid& grid,
                         std::span<const KernelParams> params);
ObjectivePosterior posterior(const FoldedData& data, const InputGrid& grid,
                             const KernelParams& params);

/// Posterior mean and full covariance per objective, for joint sampling.
struct JointPosterior {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;

  std::size_t size() const { return means.empty() ? 0 : static_cast<std::size_t>(means.front().size()); }
  std::size_t dimension() const { return means.size(); }
};

JointPosterior joint_posterior(const ObservationStore& store, const InputGrid& grid,
                               std::span<const KernelParams> params);

/// `count` joint draws over the grid, each a G x q matrix. Objectives are
/// sampled independently. Fixed seed gives bit-identical draws.
std::vector<Eigen::MatrixXd> sample_paths(const JointPosterior& joint, std::size_t count,
                                          std::uint64_t seed);

}  // namespace pals
