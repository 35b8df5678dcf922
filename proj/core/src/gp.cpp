#include "pals/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pals/error.hpp"
#include "pals/rng.hpp"

namespace pals {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873128;

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

Eigen::MatrixXd rows_of(const InputGrid& grid, const IndexSet& indices) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()),
                      static_cast<Eigen::Index>(grid.dimension()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        grid.points().row(static_cast<Eigen::Index>(indices[i]));
  }
  return out;
}

// Cholesky with jitter escalation: 1e-10 * scale, x10 up to 1e-4 * scale.
std::optional<Eigen::LLT<Eigen::MatrixXd>> try_cholesky(const Eigen::MatrixXd& a, double scale,
                                                        double& jitter) {
  jitter = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt;
  for (double rel = kJitterStart; rel <= kJitterMax * 1.0000001; rel *= 10.0) {
    jitter = rel * scale;
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return llt;
  }
  return std::nullopt;
}

Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& a, double scale, double& jitter) {
  auto llt = try_cholesky(a, scale, jitter);
  if (!llt) throw IllConditioned();
  return std::move(*llt);
}

// Square root factor F with F F' ~ cov. Falls back to a symmetric eigen
// decomposition with negative eigenvalues clipped when Cholesky fails even
// with the largest jitter; clipping is only accepted for round-off sized
// negative parts.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
  const double scale = std::max(cov.diagonal().maxCoeff(), std::numeric_limits<double>::min());
  double jitter = 0.0;
  if (auto llt = try_cholesky(cov, scale, jitter)) return llt->matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw IllConditioned();
  const Eigen::VectorXd values = eig.eigenvalues();
  if (values.minCoeff() < -1e-6 * std::max(values.maxCoeff(), 0.0) - 1e-300) throw IllConditioned();
  return eig.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace

void KernelParams::validate() const {
  if (!positive_finite(variance)) throw std::invalid_argument("kernel variance must be positive");
  if (!positive_finite(noise_variance)) {
    throw std::invalid_argument("noise variance must be positive");
  }
  if (lengthscales.size() == 0) throw std::invalid_argument("kernel needs lengthscales");
  for (Eigen::Index k = 0; k < lengthscales.size(); ++k) {
    if (!positive_finite(lengthscales[k])) {
      throw std::invalid_argument("lengthscales must be positive");
    }
  }
}

double matern52(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const KernelParams& params) {
  params.validate();
  if (x.size() != y.size() || x.size() != params.lengthscales.size()) {
    throw std::invalid_argument("matern52: dimension mismatch");
  }
  if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("matern52: non-finite input");
  const double r = ((x - y).array() / params.lengthscales.array()).matrix().norm();
  const double s = kSqrt5 * r;
  return params.variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

Eigen::MatrixXd matern52_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                double variance, const Eigen::VectorXd& lengthscales) {
  const Eigen::Index d = lengthscales.size();
  if (a.cols() != d || b.cols() != d) throw std::invalid_argument("matern52: dimension mismatch");
  Eigen::MatrixXd out(a.rows(), b.rows());
  const Eigen::ArrayXd inv = lengthscales.array().inverse();
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double r2 = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double t = (a(i, k) - b(j, k)) * inv[k];
        r2 += t * t;
      }
      const double s = kSqrt5 * std::sqrt(r2);
      out(i, j) = variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// ObservationStore

ObservationStore::ObservationStore(std::size_t grid_size, std::size_t objectives)
    : counts_(grid_size, 0),
      means_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid_size),
                                   static_cast<Eigen::Index>(objectives))),
      m2_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid_size),
                                static_cast<Eigen::Index>(objectives))) {
  if (objectives == 0) throw std::invalid_argument("observation store needs >= 1 objective");
}

void ObservationStore::fold(std::size_t index, const Eigen::MatrixXd& values) {
  if (index >= counts_.size()) throw std::out_of_range("fold: grid index out of range");
  if (values.rows() < 1) throw std::invalid_argument("fold: batch must hold >= 1 evaluation");
  if (values.cols() != means_.cols()) throw std::invalid_argument("fold: objective count mismatch");
  if (!values.allFinite()) throw std::invalid_argument("fold: non-finite evaluation");

  const auto i = static_cast<Eigen::Index>(index);
  const double nb = static_cast<double>(values.rows());
  const double na = static_cast<double>(counts_[index]);
  const double n = na + nb;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const double batch_mean = values.col(j).mean();
    const double batch_m2 = (values.col(j).array() - batch_mean).square().sum();
    const double delta = batch_mean - means_(i, j);
    means_(i, j) += delta * nb / n;
    m2_(i, j) += batch_m2 + delta * delta * na * nb / n;
  }
  counts_[index] += static_cast<std::size_t>(values.rows());
  total_ += static_cast<std::size_t>(values.rows());
  visits_.push_back({index, static_cast<std::size_t>(values.rows())});
}

double ObservationStore::mean(std::size_t index, std::size_t objective) const {
  return means_(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(objective));
}

double ObservationStore::sum_sq_dev(std::size_t index, std::size_t objective) const {
  return m2_(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(objective));
}

ObjectiveVector ObservationStore::mean_vector(std::size_t index) const {
  return means_.row(static_cast<Eigen::Index>(index)).transpose();
}

IndexSet ObservationStore::visited() const {
  IndexSet out;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] > 0) out.push_back(i);
  }
  return out;
}

FoldedData ObservationStore::folded(std::size_t objective) const {
  if (objective >= objectives()) throw std::out_of_range("folded: objective out of range");
  FoldedData data;
  data.indices = visited();
  const auto m = static_cast<Eigen::Index>(data.indices.size());
  data.counts.resize(m);
  data.means.resize(m);
  const auto j = static_cast<Eigen::Index>(objective);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = static_cast<Eigen::Index>(data.indices[static_cast<std::size_t>(k)]);
    data.counts[k] = static_cast<double>(counts_[static_cast<std::size_t>(i)]);
    data.means[k] = means_(i, j);
    data.within_ss += m2_(i, j);
  }
  data.has_within = true;
  return data;
}

ObservationStore fold_observation(ObservationStore store, std::size_t index,
                                  const Eigen::MatrixXd& values) {
  store.fold(index, values);
  return store;
}

// ---------------------------------------------------------------------------
// Posterior

GpPosterior::GpPosterior(const FoldedData& data, const InputGrid& grid, const KernelParams& params)
    : grid_points_(grid.points()), params_(params) {
  params_.validate();
  if (data.distinct() == 0) throw InsufficientData();
  if (params_.lengthscales.size() != static_cast<Eigen::Index>(grid.dimension())) {
    throw std::invalid_argument("posterior: lengthscale count must match grid dimension");
  }
  const Eigen::MatrixXd visited = rows_of(grid, data.indices);
  Eigen::MatrixXd a = matern52_matrix(visited, visited, params_.variance, params_.lengthscales);
  a.diagonal().array() += params_.noise_variance / data.counts.array();
  const auto llt = robust_cholesky(a, params_.variance, jitter_);

  cross_ = matern52_matrix(visited, grid_points_, params_.variance, params_.lengthscales);
  whitened_ = llt.matrixL().solve(cross_);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(data.distinct()));
  whitened_one_ = llt.matrixL().solve(ones);
  const Eigen::VectorXd a_inv_one = llt.matrixU().solve(whitened_one_);
  one_a_one_ = whitened_one_.squaredNorm();
  constant_mean_ = a_inv_one.dot(data.means) / one_a_one_;
  alpha_ = llt.solve(data.means - Eigen::VectorXd::Constant(data.means.size(), constant_mean_));
}

void GpPosterior::predict(Eigen::VectorXd& mean, Eigen::VectorXd& sd) const {
  mean = (cross_.transpose() * alpha_).array() + constant_mean_;
  // 1 - 1' A^{-1} k(x): the mean-uncertainty correction of ordinary kriging
  const Eigen::VectorXd u = Eigen::VectorXd::Ones(whitened_.cols()) - whitened_.transpose() * whitened_one_;
  Eigen::ArrayXd var = params_.variance - whitened_.colwise().squaredNorm().transpose().array() +
                       u.array().square() / one_a_one_;
  sd = var.max(0.0).sqrt().matrix();
}

Eigen::MatrixXd GpPosterior::covariance() const {
  Eigen::MatrixXd cov =
      matern52_matrix(grid_points_, grid_points_, params_.variance, params_.lengthscales);
  cov.noalias() -= whitened_.transpose() * whitened_;
  const Eigen::VectorXd u = Eigen::VectorXd::Ones(whitened_.cols()) - whitened_.transpose() * whitened_one_;
  cov.noalias() += u * u.transpose() / one_a_one_;
  return cov;
}

ObjectivePosterior posterior(const FoldedData& data, const InputGrid& grid,
                             const KernelParams& params) {
  GpPosterior gp(data, grid, params);
  ObjectivePosterior out;
  gp.predict(out.mean, out.sd);
  out.params = params;
  out.constant_mean = gp.constant_mean();
  return out;
}

PosteriorField posterior(const ObservationStore& store, const InputGrid& grid,
                         std::span<const KernelParams> params) {
  if (params.size() != store.objectives()) {
    throw std::invalid_argument("posterior: need one KernelParams per objective");
  }
  PosteriorField field;
  field.objectives.reserve(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) {
    field.objectives.push_back(posterior(store.folded(j), grid, params[j]));
  }
  return field;
}

ObjectiveVector PosteriorField::mean(std::size_t index) const {
  ObjectiveVector z(static_cast<Eigen::Index>(objectives.size()));
  for (std::size_t j = 0; j < objectives.size(); ++j) {
    z[static_cast<Eigen::Index>(j)] = objectives[j].mean[static_cast<Eigen::Index>(index)];
  }
  return z;
}

ObjectiveVector PosteriorField::sd(std::size_t index) const {
  ObjectiveVector z(static_cast<Eigen::Index>(objectives.size()));
  for (std::size_t j = 0; j < objectives.size(); ++j) {
    z[static_cast<Eigen::Index>(j)] = objectives[j].sd[static_cast<Eigen::Index>(index)];
  }
  return z;
}

Eigen::MatrixXd PosteriorField::means() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dimension()));
  for (std::size_t j = 0; j < objectives.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = objectives[j].mean;
  }
  return out;
}

JointPosterior joint_posterior(const ObservationStore& store, const InputGrid& grid,
                               std::span<const KernelParams> params) {
  if (params.size() != store.objectives()) {
    throw std::invalid_argument("joint_posterior: need one KernelParams per objective");
  }
  JointPosterior joint;
  for (std::size_t j = 0; j < params.size(); ++j) {
    GpPosterior gp(store.folded(j), grid, params[j]);
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
    gp.predict(mean, sd);
    joint.means.push_back(std::move(mean));
    joint.covariances.push_back(gp.covariance());
  }
  return joint;
}

std::vector<Eigen::MatrixXd> sample_paths(const JointPosterior& joint, std::size_t count,
                                          std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_paths: count must be >= 1");
  const auto g = static_cast<Eigen::Index>(joint.size());
  const auto q = static_cast<Eigen::Index>(joint.dimension());
  std::vector<Eigen::MatrixXd> paths(count, Eigen::MatrixXd(g, q));

  for (Eigen::Index j = 0; j < q; ++j) {
    const auto& cov = joint.covariances[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd l = covariance_factor(cov);

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(g, static_cast<Eigen::Index>(count));
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      for (Eigen::Index r = 0; r < g; ++r) z(r, c) = normal(rng);
    }
    const Eigen::MatrixXd draws = l * z;
    for (std::size_t s = 0; s < count; ++s) {
      paths[s].col(j) = joint.means[static_cast<std::size_t>(j)] + draws.col(static_cast<Eigen::Index>(s));
    }
  }
  return paths;
}

}  // namespace pals
