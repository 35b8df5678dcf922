#include "pals/drivers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "pals/error.hpp"
#include "pals/metrics.hpp"
#include "pals/rng.hpp"

namespace pals {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// State shared by every driver: the evaluation store, the hyperparameters
// and the trace.
class Session {
 public:
  Session(const Problem& problem, const RunConfig& config, const RunSeeds& seeds)
      : problem_(problem),
        config_(config),
        store_(problem.grid().size(), problem.objectives()),
        noise_rng_(derive_seed(seeds.method, "noise")),
        select_rng_(derive_seed(seeds.method, "select")),
        reml_seed_(derive_seed(seeds.method, "reml")) {
    config.validate();
    const IndexSet design = initial_design(problem.grid(), config.n0, config.design_candidates,
                                           derive_seed(seeds.design, "design"));
    Rng initial_noise(derive_seed(seeds.design, "initial-noise"));
    for (std::size_t index : design) {
      store_.fold(index, problem.sample(index, config.initial_replicates, initial_noise));
    }
  }

  const Problem& problem() const { return problem_; }
  const RunConfig& config() const { return config_; }
  const ObservationStore& store() const { return store_; }
  const std::vector<KernelParams>& params() const { return params_; }
  std::size_t grid_size() const { return problem_.grid().size(); }
  std::size_t objectives() const { return problem_.objectives(); }
  Rng& select_rng() { return select_rng_; }

  bool budget_reached() const { return spent_ >= config_.budget; }

  RemlOptions reml_options(std::size_t iteration, std::size_t stream) const {
    RemlOptions options;
    options.starts = config_.reml_starts;
    options.seed = derive_seed(derive_seed(reml_seed_, iteration), stream);
    return options;
  }

  void refit(std::size_t iteration) {
    if (!params_.empty() && iteration % config_.refit_every != 0) return;
    const bool first = params_.empty();
    params_.resize(objectives());
    for (std::size_t j = 0; j < objectives(); ++j) {
      const FoldedData data = store_.folded(j);
      RemlOptions options = reml_options(iteration, j);
      if (!first) options.warm_start = params_[j];
      if (config_.noise_estimation == NoiseEstimation::Pooled) {
        options.fixed_noise_variance = pooled_noise_variance(data);
      }
      params_[j] = fit_reml(data, problem_.grid(), default_kernel_params(data, problem_.grid()), options).params;
    }
  }

  PosteriorField field() const { return posterior(store_, problem_.grid(), params_); }

  void evaluate(std::size_t index) {
    store_.fold(index, problem_.sample(index, config_.batch_size, noise_rng_));
    spent_ += config_.batch_size;
  }

  void start_iteration() { started_ = std::chrono::steady_clock::now(); }

  // Fills the prediction, metrics and bookkeeping fields of `row` and appends it.
  void record(IterationRecord row, const PosteriorField& field) {
    const PlugInPrediction prediction = plug_in_prediction(field);
    const GroundTruth& truth = problem_.truth();
    const Eigen::Vector2d ref = default_reference_point();
    row.iteration = record_.trace.size();
    row.evaluations = store_.total_evaluations();
    row.predicted_set = prediction.pareto_set;
    row.predicted_front = problem_.to_metric_units(prediction.front);
    if (objectives() == 2) {
      row.volume_difference = symmetric_difference_volume(
          clip_to_reference(problem_.to_metric_units(truth.front), ref),
          clip_to_reference(row.predicted_front, ref), ref);
    } else {
      row.volume_difference = std::numeric_limits<double>::quiet_NaN();
    }
    row.misclassification = misclassification_rate(truth.pareto_set, prediction.pareto_set, grid_size());
    if (config_.record_wall_time) row.wall_time = seconds_since(started_);
    record_.empty_intersections += row.empty_intersections;
    record_.trace.push_back(std::move(row));
  }

  RunRecord finish(Termination reason) {
    record_.termination = reason;
    record_.evaluations = store_.total_evaluations();
    if (!record_.trace.empty()) {
      record_.predicted_set = record_.trace.back().predicted_set;
      record_.predicted_front = record_.trace.back().predicted_front;
    }
    return std::move(record_);
  }

 private:
  const Problem& problem_;
  RunConfig config_;
  ObservationStore store_;
  std::vector<KernelParams> params_;
  Rng noise_rng_;
  Rng select_rng_;
  std::uint64_t reml_seed_;
  std::size_t spent_ = 0;
  std::chrono::steady_clock::time_point started_;
  RunRecord record_;
};

IndexSet merge(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// PALS and the original PAL share the classification loop.
RunRecord run_pal_family(const Problem& problem, const RunConfig& config, const RunSeeds& seeds,
                         bool original) {
  Session session(problem, config, seeds);
  const std::size_t g = session.grid_size();
  const std::size_t q = session.objectives();
  if (!config.epsilon.empty() && config.epsilon.size() != q) {
    throw ConfigError("epsilon needs one entry per objective");
  }
  const MarginVector epsilon = config.epsilon.empty()
                                   ? MarginVector::zeros(q)
                                   : MarginVector(Eigen::Map<const Eigen::VectorXd>(
                                         config.epsilon.data(), static_cast<Eigen::Index>(q)));
  const IntersectionMode mode = original ? IntersectionMode::Intersect : config.intersection;

  std::vector<UncertaintyRegion> previous;
  Classification classes;
  classes.unclassified.resize(g);
  std::iota(classes.unclassified.begin(), classes.unclassified.end(), std::size_t{0});

  for (std::size_t n = 0;; ++n) {
    session.start_iteration();
    session.refit(n);
    const PosteriorField field = session.field();
    const double beta = config.beta_mode == BetaMode::Fixed
                            ? beta_fixed(config.coverage)
                            : beta_increasing(n + 1, q, g, config.delta);

    IterationRecord row;
    row.beta = beta;
    std::vector<char> visited(g, 0);
    for (std::size_t v : session.store().visited()) visited[v] = 1;

    std::vector<UncertaintyRegion> regions;
    regions.reserve(g);
    for (std::size_t i = 0; i < g; ++i) {
      const ObjectiveVector mu = field.mean(i);
      if (original && visited[i]) {
        regions.push_back(UncertaintyRegion::point(session.store().mean_vector(i)));
        continue;
      }
      UncertaintyRegion rect = rectangle_from_posterior(mu, field.sd(i), beta);
      if (previous.empty() || mode == IntersectionMode::None) {
        regions.push_back(std::move(rect));
      } else if (mode == IntersectionMode::Corrected) {
        regions.push_back(corrected_intersect(previous[i], rect, mu));
      } else if (auto both = intersect_regions(previous[i], rect)) {
        regions.push_back(std::move(*both));
      } else {
        ++row.empty_intersections;
        regions.push_back(corrected_intersect(previous[i], rect, mu));
      }
    }

    if (original) {
      // Only the still-undecided points are re-tested; P and N only grow.
      const Classification update = classify_subset(regions, epsilon, classes.unclassified);
      classes.pareto = merge(classes.pareto, update.pareto);
      classes.dominated = merge(classes.dominated, update.dominated);
      classes.unclassified = update.unclassified;
    } else {
      classes = classify(regions, epsilon);
    }
    row.pareto_count = classes.pareto.size();
    row.dominated_count = classes.dominated.size();
    row.unclassified_count = classes.unclassified.size();

    std::optional<Termination> stop;
    std::size_t selected = 0;
    if (classes.unclassified.empty()) {
      stop = Termination::AllClassified;
    } else if (session.budget_reached()) {
      stop = Termination::Budget;
    } else {
      try {
        selected = select_next(classes, regions, original, session.store().visited());
        row.selected = selected;
      } catch (const NoSelectablePoint&) {
        stop = Termination::AllVisited;
      }
    }
    session.record(std::move(row), field);
    if (stop) return session.finish(*stop);
    session.evaluate(selected);
    previous = std::move(regions);
  }
}

// Loop for the baselines: `choose` picks the next index from the current field.
template <typename Choose>
RunRecord run_baseline(Session& session, Choose&& choose) {
  for (std::size_t n = 0;; ++n) {
    session.start_iteration();
    session.refit(n);
    const PosteriorField field = session.field();
    IterationRecord row;
    const bool done = session.budget_reached();
    const std::size_t selected = done ? 0 : choose(n, field);
    if (!done) row.selected = selected;
    session.record(std::move(row), field);
    if (done) return session.finish(Termination::Budget);
    session.evaluate(selected);
  }
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Pals: return "PALS";
    case Algorithm::Pal: return "PAL";
    case Algorithm::Prs: return "PRS";
    case Algorithm::Cors: return "CoRS";
    case Algorithm::ParegoEim: return "ParEGO-EIm";
  }
  return "?";
}

std::string_view to_string(BetaMode m) { return m == BetaMode::Fixed ? "fixed" : "increasing"; }

std::string_view to_string(IntersectionMode m) {
  switch (m) {
    case IntersectionMode::None: return "none";
    case IntersectionMode::Intersect: return "intersect";
    case IntersectionMode::Corrected: return "corrected";
  }
  return "?";
}

std::string_view to_string(NoiseEstimation m) { return m == NoiseEstimation::Joint ? "joint" : "pooled"; }

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::AllClassified: return "all_classified";
    case Termination::Budget: return "budget";
    case Termination::AllVisited: return "all_visited";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view s) {
  const std::string key = lower(s);
  for (Algorithm a : {Algorithm::Pals, Algorithm::Pal, Algorithm::Prs, Algorithm::Cors, Algorithm::ParegoEim}) {
    if (lower(to_string(a)) == key) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

IntersectionMode parse_intersection_mode(std::string_view s) {
  const std::string key = lower(s);
  for (auto m : {IntersectionMode::None, IntersectionMode::Intersect, IntersectionMode::Corrected}) {
    if (to_string(m) == key) return m;
  }
  throw ConfigError("unknown intersection mode '" + std::string(s) + "'");
}

NoiseEstimation parse_noise_estimation(std::string_view s) {
  const std::string key = lower(s);
  if (key == "joint") return NoiseEstimation::Joint;
  if (key == "pooled") return NoiseEstimation::Pooled;
  throw ConfigError("unknown noise estimation '" + std::string(s) + "'");
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  if (beta_mode == BetaMode::Fixed) require(coverage > 0.0 && coverage < 1.0, "coverage must lie in (0, 1)");
  if (beta_mode == BetaMode::Increasing) require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  for (double e : epsilon) require(e >= 0.0 && std::isfinite(e), "epsilon entries must be nonnegative");
  require(batch_size >= 1, "batch size must be at least 1");
  require(n0 >= 2, "initial design needs at least 2 points");
  require(initial_replicates >= 1, "initial replicates must be at least 1");
  require(design_candidates >= 1, "design candidates must be at least 1");
  require(refit_every >= 1, "refit_every must be at least 1");
  require(sample_paths >= 1, "sample path count must be at least 1");
  require(parego_rho >= 0.0 && std::isfinite(parego_rho), "parego_rho must be nonnegative");
  require(reml_starts >= 1, "reml_starts must be at least 1");
}

RunSeeds RunSeeds::from(std::uint64_t seed) {
  return {derive_seed(seed, "design"), derive_seed(seed, "method")};
}

double beta_fixed(double coverage) {
  if (!(coverage > 0.0 && coverage < 1.0)) throw std::invalid_argument("beta_fixed: p must lie in (0, 1)");
  const boost::math::normal_distribution<double> standard;
  const double root = boost::math::quantile(standard, 0.5 + 0.5 * coverage);
  return root * root;
}

double beta_increasing(std::size_t n, std::size_t q, std::size_t grid_size, double delta) {
  if (n < 1) throw std::invalid_argument("beta_increasing: n must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("beta_increasing: delta must lie in (0, 1)");
  const double nn = static_cast<double>(n);
  return 2.0 * std::log(static_cast<double>(q) * static_cast<double>(grid_size) * std::numbers::pi *
                        std::numbers::pi * nn * nn / (6.0 * delta));
}

IndexSet initial_design(const InputGrid& grid, std::size_t n0, std::size_t candidates, std::uint64_t seed) {
  if (n0 > grid.size()) throw std::invalid_argument("initial_design: n0 exceeds grid size");
  if (n0 == 0 || candidates == 0) throw std::invalid_argument("initial_design: n0 and candidates must be positive");
  Rng rng(seed);
  std::vector<std::size_t> pool(grid.size());
  IndexSet best;
  double best_distance = -1.0;
  for (std::size_t c = 0; c < candidates; ++c) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // Partial Fisher-Yates: the first n0 slots become a uniform subset.
    for (std::size_t i = 0; i < n0; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    double min_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n0; ++i) {
      for (std::size_t j = i + 1; j < n0; ++j) {
        const double dist = (grid.points().row(static_cast<Eigen::Index>(pool[i])) -
                             grid.points().row(static_cast<Eigen::Index>(pool[j])))
                                .norm();
        min_distance = std::min(min_distance, dist);
      }
    }
    if (min_distance > best_distance) {
      best_distance = min_distance;
      best.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n0));
    }
  }
  std::sort(best.begin(), best.end());
  return best;
}

PlugInPrediction plug_in_prediction(const PosteriorField& field) {
  const Eigen::MatrixXd means = field.means();
  PlugInPrediction out;
  out.pareto_set = pareto_indices(means);
  out.front.resize(static_cast<Eigen::Index>(out.pareto_set.size()), means.cols());
  for (std::size_t r = 0; r < out.pareto_set.size(); ++r) {
    out.front.row(static_cast<Eigen::Index>(r)) = means.row(static_cast<Eigen::Index>(out.pareto_set[r]));
  }
  return out;
}

double expected_improvement(double mean, double sd, double target) {
  const double gain = target - mean;
  if (!(sd > 0.0)) return std::max(gain, 0.0);
  const double z = gain / sd;
  return gain * normal_cdf(z) + sd * normal_pdf(z);
}

Eigen::VectorXd misclassification_weights(const Eigen::MatrixXd& means,
                                          const std::vector<Eigen::MatrixXd>& paths) {
  const auto g = means.rows();
  std::vector<char> plug_in(static_cast<std::size_t>(g), 0);
  for (std::size_t i : pareto_indices(means)) plug_in[i] = 1;
  Eigen::VectorXd disagreements = Eigen::VectorXd::Zero(g);
  for (const auto& path : paths) {
    if (path.rows() != g) throw std::invalid_argument("misclassification_weights: path size mismatch");
    std::vector<char> on_front(static_cast<std::size_t>(g), 0);
    for (std::size_t i : pareto_indices(path)) on_front[i] = 1;
    for (Eigen::Index i = 0; i < g; ++i) {
      if (on_front[static_cast<std::size_t>(i)] != plug_in[static_cast<std::size_t>(i)]) disagreements[i] += 1.0;
    }
  }
  const double total = disagreements.sum();
  if (!(total > 0.0)) return Eigen::VectorXd::Constant(g, 1.0 / static_cast<double>(g));
  return disagreements / total;
}

RunRecord run_pals(const Problem& problem, const RunConfig& config, const RunSeeds& seeds) {
  return run_pal_family(problem, config, seeds, false);
}

RunRecord run_pal_original(const Problem& problem, const RunConfig& config, const RunSeeds& seeds) {
  return run_pal_family(problem, config, seeds, true);
}

RunRecord run_prs(const Problem& problem, const RunConfig& config, const RunSeeds& seeds) {
  Session session(problem, config, seeds);
  std::uniform_int_distribution<std::size_t> uniform(0, session.grid_size() - 1);
  return run_baseline(session, [&](std::size_t, const PosteriorField&) { return uniform(session.select_rng()); });
}

RunRecord run_cors(const Problem& problem, const RunConfig& config, const RunSeeds& seeds) {
  Session session(problem, config, seeds);
  return run_baseline(session, [&](std::size_t, const PosteriorField& field) {
    const JointPosterior joint = joint_posterior(session.store(), problem.grid(), session.params());
    const auto paths = sample_paths(joint, config.sample_paths, session.select_rng()());
    const Eigen::VectorXd w = misclassification_weights(field.means(), paths);
    std::discrete_distribution<std::size_t> pick(w.data(), w.data() + w.size());
    return pick(session.select_rng());
  });
}

RunRecord run_parego_eim(const Problem& problem, const RunConfig& config, const RunSeeds& seeds) {
  Session session(problem, config, seeds);
  const std::size_t q = session.objectives();
  std::optional<KernelParams> scalar_params;
  return run_baseline(session, [&](std::size_t n, const PosteriorField&) {
    // Uniform weights on the simplex from normalized exponential draws.
    std::exponential_distribution<double> exponential(1.0);
    Eigen::VectorXd lambda(static_cast<Eigen::Index>(q));
    for (Eigen::Index j = 0; j < lambda.size(); ++j) lambda[j] = exponential(session.select_rng());
    lambda /= lambda.sum();

    const ObservationStore& store = session.store();
    FoldedData data;
    data.indices = store.visited();
    const auto m = static_cast<Eigen::Index>(data.indices.size());
    data.counts.resize(m);
    data.means.resize(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const std::size_t i = data.indices[static_cast<std::size_t>(r)];
      const Eigen::VectorXd weighted = lambda.cwiseProduct(store.mean_vector(i));
      data.counts[r] = static_cast<double>(store.count(i));
      data.means[r] = weighted.maxCoeff() + config.parego_rho * weighted.sum();
    }
    data.has_within = false;

    RemlOptions options = session.reml_options(n, q);
    options.warm_start = scalar_params;
    const RemlFit fit = fit_reml(data, problem.grid(), default_kernel_params(data, problem.grid()), options);
    scalar_params = fit.params;
    const ObjectivePosterior scalar = posterior(data, problem.grid(), fit.params);

    double target = std::numeric_limits<double>::infinity();
    for (std::size_t i : data.indices) target = std::min(target, scalar.mean[static_cast<Eigen::Index>(i)]);
    std::size_t best = 0;
    double best_ei = -1.0;
    for (Eigen::Index i = 0; i < scalar.mean.size(); ++i) {
      const double ei = expected_improvement(scalar.mean[i], scalar.sd[i], target);
      if (ei > best_ei) {
        best_ei = ei;
        best = static_cast<std::size_t>(i);
      }
    }
    return best;
  });
}

RunRecord run(const Problem& problem, const RunConfig& config, const RunSeeds& seeds) {
  switch (config.algorithm) {
    case Algorithm::Pals: return run_pals(problem, config, seeds);
    case Algorithm::Pal: return run_pal_original(problem, config, seeds);
    case Algorithm::Prs: return run_prs(problem, config, seeds);
    case Algorithm::Cors: return run_cors(problem, config, seeds);
    case Algorithm::ParegoEim: return run_parego_eim(problem, config, seeds);
  }
  throw std::invalid_argument("run: unknown algorithm");
}

}  // namespace pals
