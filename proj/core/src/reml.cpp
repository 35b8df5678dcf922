// Restricted maximum likelihood for the ordinary-kriging model on folded
// replicate data.
//
// Model for the m distinct points: ybar = c 1 + xi + e, with
// Cov(xi) = s2 * C(lengthscales) and Cov(e) = s2 * tau2 * diag(1 / n_i).
// With A = C + tau2 * diag(1 / n_i) and P = A^-1 - A^-1 1 1' A^-1 / (1' A^-1 1),
// the restricted log-likelihood of the full replicate data is, up to
// constants,
//
//   -1/2 [ (m - 1) log s2 + log|A| + log(1' A^-1 1) + y' P y / s2 ]
//   -1/2 [ (N - m) log(tau2 s2) + SSW / (tau2 s2) ]
//
// where the second line is the within-point scatter term (absent when the
// data carries no replicate information). s2 has the closed-form maximizer
// (y' P y + SSW / tau2) / (N - 1), leaving d + 1 free parameters.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "pals/error.hpp"
#include "pals/gp.hpp"
#include "pals/rng.hpp"

namespace pals {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873128;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct ProfiledValue {
  double neg_log_lik = kInf;
  Eigen::VectorXd gradient;  // w.r.t. log lengthscales, then log tau2
  double s2 = 0.0;
};

class RemlObjective {
 public:
  RemlObjective(const FoldedData& data, const InputGrid& grid) : data_(data) {
    const auto m = static_cast<Eigen::Index>(data.distinct());
    const auto d = static_cast<Eigen::Index>(grid.dimension());
    sq_diff_.resize(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) {
      Eigen::MatrixXd dk(m, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        const double xj = grid.points()(static_cast<Eigen::Index>(data.indices[static_cast<std::size_t>(j)]), k);
        for (Eigen::Index i = 0; i < m; ++i) {
          const double xi = grid.points()(static_cast<Eigen::Index>(data.indices[static_cast<std::size_t>(i)]), k);
          dk(i, j) = (xi - xj) * (xi - xj);
        }
      }
      sq_diff_[static_cast<std::size_t>(k)] = std::move(dk);
    }
    inv_counts_ = data.counts.array().inverse();
    total_ = data.has_within ? data.total_count() : static_cast<double>(m);
  }

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(sq_diff_.size()); }

  // u = (log lengthscale_1..d, log tau2)
  ProfiledValue evaluate(const Eigen::VectorXd& u, bool want_gradient) const {
    const Eigen::Index d = dimension();
    const auto m = static_cast<Eigen::Index>(data_.distinct());
    const double tau2 = std::exp(u[d]);

    Eigen::ArrayXXd s, e;
    Eigen::VectorXd inv_l2;
    Eigen::MatrixXd a = unit_kernel(u, s, e, inv_l2);
    a.diagonal().array() += tau2 * inv_counts_;

    ProfiledValue out;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return out;

    const Eigen::MatrixXd& l = llt.matrixLLT();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) log_det += 2.0 * std::log(l(i, i));

    const Eigen::VectorXd a_inv_one = llt.solve(Eigen::VectorXd::Ones(m));
    const double c = a_inv_one.sum();
    const Eigen::VectorXd a_inv_y = llt.solve(data_.means);
    const Eigen::VectorXd alpha = a_inv_y - a_inv_one * (a_inv_one.dot(data_.means) / c);
    const double quad = data_.means.dot(alpha);

    const double within = data_.has_within ? data_.within_ss / tau2 : 0.0;
    const double dof = total_ - 1.0;
    const double s2 = (quad + within) / dof;
    if (!(s2 > 0.0) || !std::isfinite(s2) || !(c > 0.0)) return out;

    const double extra = data_.has_within ? (total_ - static_cast<double>(m)) : 0.0;
    out.s2 = s2;
    out.neg_log_lik = 0.5 * (dof * std::log(s2) + log_det + std::log(c) + extra * u[d]);
    if (!std::isfinite(out.neg_log_lik)) {
      out.neg_log_lik = kInf;
      return out;
    }
    if (!want_gradient) return out;

    Eigen::MatrixXd p = llt.solve(Eigen::MatrixXd::Identity(m, m));
    p.noalias() -= a_inv_one * a_inv_one.transpose() / c;

    out.gradient.resize(d + 1);
    // dC/dlog(l_k) = 5/3 (1 + s) exp(-s) (x_k - x'_k)^2 / l_k^2
    const Eigen::ArrayXXd base = (5.0 / 3.0) * (1.0 + s) * e;
    for (Eigen::Index k = 0; k < d; ++k) {
      const Eigen::MatrixXd ck = (base * sq_diff_[static_cast<std::size_t>(k)].array() * inv_l2[k]).matrix();
      const double trace = (p.array() * ck.array()).sum();
      const double quad_k = alpha.dot(ck * alpha);
      out.gradient[k] = 0.5 * (trace - quad_k / s2);
    }
    const double trace_noise = tau2 * (p.diagonal().array() * inv_counts_).sum();
    const double quad_noise = tau2 * (alpha.array().square() * inv_counts_).sum();
    double g = 0.5 * (trace_noise - quad_noise / s2);
    if (data_.has_within) g += 0.5 * (extra - data_.within_ss / (tau2 * s2));
    out.gradient[d] = g;
    return out;
  }

  // Noise variance held fixed; u = (log lengthscale_1..d, log s2). Only the
  // means enter, the within-point term being constant.
  ProfiledValue evaluate_fixed_noise(const Eigen::VectorXd& u, double noise, bool want_gradient) const {
    const Eigen::Index d = dimension();
    const auto m = static_cast<Eigen::Index>(data_.distinct());
    const double s2 = std::exp(u[d]);

    Eigen::ArrayXXd s, e;
    Eigen::VectorXd inv_l2;
    const Eigen::MatrixXd c_unit = unit_kernel(u, s, e, inv_l2);
    Eigen::MatrixXd a = s2 * c_unit;
    a.diagonal().array() += noise * inv_counts_;

    ProfiledValue out;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return out;
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) log_det += 2.0 * std::log(llt.matrixLLT()(i, i));
    const Eigen::VectorXd a_inv_one = llt.solve(Eigen::VectorXd::Ones(m));
    const double c = a_inv_one.sum();
    const Eigen::VectorXd a_inv_y = llt.solve(data_.means);
    const Eigen::VectorXd alpha = a_inv_y - a_inv_one * (a_inv_one.dot(data_.means) / c);
    out.s2 = s2;
    out.neg_log_lik = 0.5 * (log_det + std::log(c) + data_.means.dot(alpha));
    if (!std::isfinite(out.neg_log_lik)) {
      out.neg_log_lik = kInf;
      return out;
    }
    if (!want_gradient) return out;

    Eigen::MatrixXd p = llt.solve(Eigen::MatrixXd::Identity(m, m));
    p.noalias() -= a_inv_one * a_inv_one.transpose() / c;
    out.gradient.resize(d + 1);
    const Eigen::ArrayXXd base = (5.0 / 3.0) * s2 * (1.0 + s) * e;
    for (Eigen::Index k = 0; k < d; ++k) {
      const Eigen::MatrixXd ck = (base * sq_diff_[static_cast<std::size_t>(k)].array() * inv_l2[k]).matrix();
      out.gradient[k] = 0.5 * ((p.array() * ck.array()).sum() - alpha.dot(ck * alpha));
    }
    const Eigen::MatrixXd cv = s2 * c_unit;
    out.gradient[d] = 0.5 * ((p.array() * cv.array()).sum() - alpha.dot(cv * alpha));
    return out;
  }

 private:
  // Unit-variance Matérn 5/2 Gram matrix at log lengthscales u.head(d); also
  // returns sqrt5 r, exp(-sqrt5 r) and 1 / l^2 for the gradients.
  Eigen::MatrixXd unit_kernel(const Eigen::VectorXd& u, Eigen::ArrayXXd& s, Eigen::ArrayXXd& e,
                              Eigen::VectorXd& inv_l2) const {
    const Eigen::Index d = dimension();
    const auto m = static_cast<Eigen::Index>(data_.distinct());
    Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(m, m);
    inv_l2.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      inv_l2[k] = std::exp(-2.0 * u[k]);
      r2.noalias() += inv_l2[k] * sq_diff_[static_cast<std::size_t>(k)];
    }
    s = kSqrt5 * r2.array().sqrt();
    e = (-s).exp();
    return ((1.0 + s + s.square() / 3.0) * e).matrix();
  }

  const FoldedData& data_;
  std::vector<Eigen::MatrixXd> sq_diff_;
  Eigen::ArrayXd inv_counts_;
  double total_ = 0.0;
};

// Box [lo, hi] per coordinate mapped to the real line by a logistic transform.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  Eigen::VectorXd to_box(const Eigen::VectorXd& w) const {
    return lo.array() + (hi - lo).array() / (1.0 + (-w.array()).exp());
  }
  Eigen::VectorXd jacobian(const Eigen::VectorXd& w) const {
    const Eigen::ArrayXd sig = 1.0 / (1.0 + (-w.array()).exp());
    return ((hi - lo).array() * sig * (1.0 - sig)).matrix();
  }
  Eigen::VectorXd from_box(const Eigen::VectorXd& u) const {
    Eigen::VectorXd w(u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k) {
      const double width = hi[k] - lo[k];
      const double t = std::clamp((u[k] - lo[k]) / width, 1e-9, 1.0 - 1e-9);
      w[k] = std::log(t / (1.0 - t));
    }
    return w;
  }
};

struct Minimum {
  Eigen::VectorXd w;
  double value = kInf;
  bool converged = false;
  int evaluations = 0;
};

// BFGS with Armijo backtracking on the unconstrained variables.
Minimum bfgs(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>& f,
             Eigen::VectorXd w, int max_iterations) {
  Minimum best;
  const Eigen::Index n = w.size();
  Eigen::VectorXd g(n);
  double fx = f(w, &g);
  best.evaluations = 1;
  if (!std::isfinite(fx)) {
    best.w = w;
    return best;
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  for (int it = 0; it < max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-6) {
      best.converged = true;
      break;
    }
    Eigen::VectorXd dir = -h * g;
    double slope = g.dot(dir);
    if (slope >= 0.0) {
      h.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    const double max_step = dir.lpNorm<Eigen::Infinity>();
    double step = max_step > 5.0 ? 5.0 / max_step : 1.0;
    Eigen::VectorXd w_new;
    Eigen::VectorXd g_new(n);
    double f_new = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      w_new = w + step * dir;
      f_new = f(w_new, &g_new);
      ++best.evaluations;
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      best.converged = true;  // no descent left at working precision
      break;
    }
    const Eigen::VectorXd s = w_new - w;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    const double decrease = fx - f_new;
    w = w_new;
    g = g_new;
    fx = f_new;
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      h = (eye - rho * s * y.transpose()) * h * (eye - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    if (decrease <= 1e-10 * (1.0 + std::abs(fx))) {
      best.converged = true;
      break;
    }
  }
  best.w = w;
  best.value = fx;
  return best;
}

bool is_constant(const FoldedData& data) {
  if (data.has_within && data.within_ss > 0.0) return false;
  const double lo = data.means.minCoeff();
  const double hi = data.means.maxCoeff();
  return hi - lo <= 1e-14 * (1.0 + std::abs(hi));
}

}  // namespace

KernelParams default_kernel_params(const FoldedData& data, const InputGrid& grid) {
  KernelParams p;
  p.lengthscales = 0.5 * grid.span();
  double var = 0.0;
  if (data.distinct() >= 2) {
    const double mu = data.means.mean();
    var = (data.means.array() - mu).square().sum() / static_cast<double>(data.distinct() - 1);
  }
  if (!(var > 0.0) || !std::isfinite(var)) var = 2.0;
  p.variance = 0.5 * var;
  p.noise_variance = 0.5 * var;
  return p;
}

double reml_log_likelihood(const FoldedData& data, const InputGrid& grid,
                           const KernelParams& params) {
  params.validate();
  if (data.distinct() < 2) throw InsufficientData();
  const Eigen::Index m = static_cast<Eigen::Index>(data.distinct());
  Eigen::MatrixXd visited(m, static_cast<Eigen::Index>(grid.dimension()));
  for (Eigen::Index i = 0; i < m; ++i) {
    visited.row(i) = grid.points().row(static_cast<Eigen::Index>(data.indices[static_cast<std::size_t>(i)]));
  }
  const double s2 = params.variance;
  const double tau2 = params.noise_variance / s2;
  Eigen::MatrixXd a = matern52_matrix(visited, visited, 1.0, params.lengthscales);
  a.diagonal().array() += tau2 / data.counts.array();
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return -kInf;
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) log_det += 2.0 * std::log(llt.matrixLLT()(i, i));
  const Eigen::VectorXd a_inv_one = llt.solve(Eigen::VectorXd::Ones(m));
  const double c = a_inv_one.sum();
  const Eigen::VectorXd a_inv_y = llt.solve(data.means);
  const double quad = data.means.dot(a_inv_y) - std::pow(a_inv_one.dot(data.means), 2) / c;

  double ll = -0.5 * (static_cast<double>(m - 1) * std::log(s2) + log_det + std::log(c) + quad / s2);
  if (data.has_within) {
    const double extra = data.total_count() - static_cast<double>(m);
    ll -= 0.5 * (extra * std::log(params.noise_variance) + data.within_ss / params.noise_variance);
  }
  return ll;
}

RemlFit fit_reml(const FoldedData& data, const InputGrid& grid, const KernelParams& init,
                 const RemlOptions& options) {
  init.validate();
  if (data.distinct() < 2) throw InsufficientData();
  const auto d = static_cast<Eigen::Index>(grid.dimension());
  if (init.lengthscales.size() != d) {
    throw std::invalid_argument("fit_reml: lengthscale count must match grid dimension");
  }

  const bool fixed_noise = options.fixed_noise_variance.has_value();
  if (fixed_noise && !(*options.fixed_noise_variance > 0.0)) {
    throw std::invalid_argument("fit_reml: fixed noise variance must be positive");
  }

  RemlFit fit;
  if (is_constant(data)) {
    fit.degenerate = true;
    fit.converged = true;
    fit.params = init;
    fit.params.noise_variance =
        fixed_noise ? *options.fixed_noise_variance : options.noise_ratio_min * init.variance;
    fit.constant_mean = data.means.mean();
    fit.log_likelihood = reml_log_likelihood(data, grid, fit.params);
    return fit;
  }

  // Last coordinate: log noise ratio, or log process variance when the noise
  // is fixed. Its box is centred on the data scale in the second case.
  const Eigen::VectorXd span = grid.span();
  const double scale = default_kernel_params(data, grid).variance * 2.0;
  Box box;
  box.lo.resize(d + 1);
  box.hi.resize(d + 1);
  for (Eigen::Index k = 0; k < d; ++k) {
    box.lo[k] = std::log(options.lengthscale_min * span[k]);
    box.hi[k] = std::log(options.lengthscale_max * span[k]);
  }
  if (fixed_noise) {
    box.lo[d] = std::log(1e-6 * scale);
    box.hi[d] = std::log(1e6 * scale);
  } else {
    box.lo[d] = std::log(options.noise_ratio_min);
    box.hi[d] = std::log(options.noise_ratio_max);
  }

  auto to_log = [&](const KernelParams& p) {
    Eigen::VectorXd u(d + 1);
    u.head(d) = p.lengthscales.array().log().matrix();
    u[d] = fixed_noise ? std::log(p.variance) : std::log(p.noise_variance / p.variance);
    return u;
  };

  RemlObjective objective(data, grid);
  auto value_at = [&](const Eigen::VectorXd& u, bool want_gradient) {
    return fixed_noise ? objective.evaluate_fixed_noise(u, *options.fixed_noise_variance, want_gradient)
                       : objective.evaluate(u, want_gradient);
  };
  int evaluations = 0;
  auto f = [&](const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
    const Eigen::VectorXd u = box.to_box(w);
    ProfiledValue v = value_at(u, grad != nullptr);
    ++evaluations;
    if (grad != nullptr && std::isfinite(v.neg_log_lik)) {
      *grad = v.gradient.cwiseProduct(box.jacobian(w));
    }
    return v.neg_log_lik;
  };

  std::vector<Eigen::VectorXd> starts;
  if (options.warm_start) starts.push_back(to_log(*options.warm_start));
  starts.push_back(to_log(init));
  Rng rng(derive_seed(options.seed, "reml-multistart"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(starts.size()) < std::max(options.starts, 1)) {
    Eigen::VectorXd u(d + 1);
    for (Eigen::Index k = 0; k < d; ++k) {
      u[k] = std::log(span[k]) + std::log(0.05) + unit(rng) * std::log(2.0 / 0.05);
    }
    if (fixed_noise) {
      u[d] = std::log(scale) + std::log(0.1) + unit(rng) * std::log(100.0);
    } else {
      u[d] = std::log(1e-4) + unit(rng) * std::log(1e4);
    }
    starts.push_back(u);
  }

  Minimum best;
  for (const auto& u0 : starts) {
    Minimum local = bfgs(f, box.from_box(u0), options.max_iterations);
    if (local.value < best.value) best = local;
    else if (local.converged && local.value == best.value) best.converged = true;
  }
  fit.evaluations = evaluations;
  if (!std::isfinite(best.value)) throw IllConditioned("ReML objective is not finite at any start");

  const Eigen::VectorXd u = box.to_box(best.w);
  const ProfiledValue at = value_at(u, false);
  fit.params.lengthscales = u.head(d).array().exp().matrix();
  fit.params.variance = at.s2;
  fit.params.noise_variance = fixed_noise ? *options.fixed_noise_variance : std::exp(u[d]) * at.s2;
  fit.converged = best.converged;
  fit.log_likelihood = reml_log_likelihood(data, grid, fit.params);
  fit.constant_mean = GpPosterior(data, grid, fit.params).constant_mean();

  // A noise ratio pinned at its floor means the replicates want less noise
  // than the ratio box allows. The profiled variance then absorbs the
  // replicate count and collapses, so also try the noise held at the
  // pooled replicate estimate and keep the higher likelihood.
  if (!fixed_noise && u[d] <= box.lo[d] + 1e-3) {
    RemlOptions pinned = options;
    pinned.warm_start.reset();
    pinned.fixed_noise_variance = pooled_noise_variance(data).value_or(options.noise_ratio_min * scale);
    RemlFit alternative = fit_reml(data, grid, init, pinned);
    if (alternative.log_likelihood > fit.log_likelihood) {
      alternative.evaluations += fit.evaluations;
      return alternative;
    }
  }
  return fit;
}

std::optional<double> pooled_noise_variance(const FoldedData& data) {
  const double dof = data.total_count() - static_cast<double>(data.distinct());
  if (!data.has_within || dof < 1.0 || !(data.within_ss > 0.0)) return std::nullopt;
  return data.within_ss / dof;
}

KernelParams fit_reml(const ObservationStore& store, const InputGrid& grid, std::size_t objective,
                      const KernelParams& init, const RemlOptions& options) {
  return fit_reml(store.folded(objective), grid, init, options).params;
}

}  // namespace pals
