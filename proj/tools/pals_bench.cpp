// pals_bench: run benchmark experiments, summarize results and check the
// library's invariants.
//
//   pals_bench run [--config FILE] [--profile desk|paper] [--out DIR] [--jobs N] [--seed S]
//   pals_bench table DIR [--out FILE]
//   pals_bench curves DIR --problem g2 [--metric V_d] [--methods A,B] [--out FILE]
//   pals_bench validate [--coefficients FILE]
//   pals_bench problems [list | truth ID]
//
// Exit codes: 0 success, 1 run or check failure, 2 invalid input.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pals/config.hpp"
#include "pals/error.hpp"
#include "pals/experiment.hpp"
#include "pals/problems.hpp"
#include "pals/validate.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;

struct RunOptions {
  std::string config_path;
  std::string profile = "desk";
  std::string out = "results";
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct TableOptions {
  std::string dir;
  std::string out;
};

struct CurveOptions {
  std::string dir;
  std::string problem;
  std::string metric = "V_d";
  std::vector<std::string> methods;
  std::string out;
};

struct ProblemOptions {
  std::string action = "list";
  std::string id;
};

std::vector<pals::ResultRow> load_results(const std::string& dir) {
  const std::filesystem::path path = std::filesystem::path(dir) / "results.csv";
  std::ifstream in(path);
  if (!in) throw pals::ConfigError("no results.csv in " + dir);
  auto rows = pals::read_results(in);
  if (rows.empty()) throw pals::ConfigError(path.string() + " holds no result rows");
  return rows;
}

void write_manifest(const pals::ExperimentConfig& config, const pals::ExperimentResult& result) {
  nlohmann::json doc;
  doc["master_seed"] = config.master_seed;
  doc["replications"] = config.replications;
  doc["problems"] = config.problems;
  if (config.noise_variance) doc["noise_variance"] = *config.noise_variance;
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : config.methods) {
    nlohmann::json entry;
    entry["label"] = m.label;
    std::istringstream lines(pals::describe(m.config));
    for (std::string line; std::getline(lines, line);) {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) entry["config"][line.substr(0, eq)] = line.substr(eq + 3);
    }
    methods.push_back(entry);
  }
  doc["methods"] = methods;
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& run : result.runs) {
    if (!run.error) continue;
    failures.push_back({{"problem", run.problem},
                        {"method", run.method},
                        {"replication", run.replication},
                        {"error", *run.error}});
  }
  doc["failures"] = failures;
  std::ofstream out(config.output_dir / "manifest.json");
  out << doc.dump(2) << '\n';
}

int command_run(const RunOptions& options) {
  const pals::Profile profile = pals::parse_profile(options.profile);
  pals::ExperimentConfig config = pals::default_experiment(profile);
  if (!options.config_path.empty()) config = pals::load_experiment_config(options.config_path, config);
  if (options.jobs) config.jobs = *options.jobs;
  if (options.seed) config.master_seed = *options.seed;
  config.output_dir = options.out;
  config.validate();

  std::mutex progress_mutex;
  pals::ProgressCallback progress;
  if (!options.quiet) {
    progress = [&](std::size_t done, std::size_t total) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      std::cerr << "\r" << done << "/" << total << " runs" << std::flush;
      if (done == total) std::cerr << '\n';
    };
  }
  const pals::ExperimentResult result = pals::run_experiment(config, progress);
  pals::write_experiment(config, result);
  write_manifest(config, result);

  const auto summary = pals::summarize(result.rows());
  {
    std::ofstream csv(config.output_dir / "summary.csv");
    pals::write_summary_csv(csv, summary);
  }
  pals::write_summary_text(std::cout, summary);

  const std::size_t failed = result.failures();
  if (failed > 0) {
    for (const auto& run : result.runs) {
      if (run.error) {
        std::cerr << "run failed: " << run.problem << " " << run.method << " r" << run.replication << ": "
                  << *run.error << '\n';
      }
    }
    std::cerr << failed << " of " << result.runs.size() << " runs failed\n";
    return kExitFailure;
  }
  return 0;
}

int command_table(const TableOptions& options) {
  const auto summary = pals::summarize(load_results(options.dir));
  const std::filesystem::path csv_path =
      options.out.empty() ? std::filesystem::path(options.dir) / "summary.csv" : std::filesystem::path(options.out);
  std::ofstream csv(csv_path);
  if (!csv) throw pals::ConfigError("cannot write " + csv_path.string());
  pals::write_summary_csv(csv, summary);
  pals::write_summary_text(std::cout, summary);
  return 0;
}

int command_curves(const CurveOptions& options) {
  const pals::CurveMetric metric = pals::parse_curve_metric(options.metric);
  const auto points = pals::curves(load_results(options.dir), options.problem, metric, options.methods);
  if (points.empty()) throw pals::ConfigError("no rows for problem '" + options.problem + "'");
  if (options.out.empty()) {
    pals::write_curves_csv(std::cout, options.problem, options.metric, points);
  } else {
    std::ofstream out(options.out);
    if (!out) throw pals::ConfigError("cannot write " + options.out);
    pals::write_curves_csv(out, options.problem, options.metric, points);
  }
  return 0;
}

int command_validate(const std::string& coefficients_path) {
  pals::PolynomialTable table = pals::default_polynomial_table();
  if (!coefficients_path.empty()) {
    std::ifstream in(coefficients_path);
    if (!in) throw pals::ConfigError("cannot open " + coefficients_path);
    std::stringstream text;
    text << in.rdbuf();
    table = pals::parse_polynomial_table(text.str());
  }
  const auto checks = pals::run_validation(table);
  std::size_t failed = 0;
  for (const auto& check : checks) {
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.name;
    if (!check.detail.empty()) std::cout << "  (" << check.detail << ")";
    std::cout << '\n';
    if (!check.passed) ++failed;
  }
  std::cout << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  return failed == 0 ? 0 : kExitFailure;
}

int command_problems(const ProblemOptions& options) {
  if (options.action == "list") {
    std::cout << "id,objective_1,objective_2,shift_1,shift_2,noise_variance_1,noise_variance_2,pareto_size\n"
              << std::setprecision(9);
    for (const auto& spec : pals::benchmark_specs()) {
      const auto& [a, b] = spec.objectives;
      std::cout << spec.id << ",f" << a.function_id << ",f" << b.function_id << ",\"" << a.shift(0) << ' '
                << a.shift(1) << "\",\"" << b.shift(0) << ' ' << b.shift(1) << "\"," << a.noise_variance << ','
                << b.noise_variance << ',' << pals::benchmark_problem(spec.id).truth().pareto_set.size() << '\n';
    }
    return 0;
  }
  if (options.action == "truth") {
    if (options.id.empty()) throw pals::ConfigError("problems truth needs a problem id");
    pals::benchmark_spec(options.id);
    const pals::Problem& problem = pals::benchmark_problem(options.id);
    const auto& pareto = problem.truth().pareto_set;
    std::cout << "index,x1,x2,f1,f2,pareto\n" << std::setprecision(9);
    for (std::size_t i = 0; i < problem.grid().size(); ++i) {
      const auto x = problem.grid().point(i);
      const bool on_front = std::binary_search(pareto.begin(), pareto.end(), i);
      std::cout << i << ',' << x(0) << ',' << x(1) << ',' << problem.values()(i, 0) << ','
                << problem.values()(i, 1) << ',' << (on_front ? 1 : 0) << '\n';
    }
    return 0;
  }
  throw pals::ConfigError("unknown problems action '" + options.action + "' (expected list or truth)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for Pareto active learning on finite grids"};
  app.require_subcommand(1);

  RunOptions run_options;
  auto* run = app.add_subcommand("run", "Run every (problem, method, replication) of an experiment");
  run->add_option("--config", run_options.config_path, "Experiment config file")->check(CLI::ExistingFile);
  run->add_option("--profile", run_options.profile, "Default scale: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  run->add_option("--out", run_options.out, "Output directory");
  run->add_option("--jobs", run_options.jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--seed", run_options.seed, "Master seed");
  run->add_flag("--quiet", run_options.quiet, "No progress output");

  TableOptions table_options;
  auto* table = app.add_subcommand("table", "Final-iteration averages per problem and method");
  table->add_option("dir", table_options.dir, "Results directory")->required();
  table->add_option("--out", table_options.out, "Summary CSV path (default DIR/summary.csv)");

  CurveOptions curve_options;
  auto* curve = app.add_subcommand("curves", "Per-iteration averaged metric for one problem");
  curve->add_option("dir", curve_options.dir, "Results directory")->required();
  curve->add_option("--problem", curve_options.problem, "Problem id")->required();
  curve->add_option("--metric", curve_options.metric, "V_d, M, P, N or U");
  curve->add_option("--methods", curve_options.methods, "Method labels to keep")->delimiter(',');
  curve->add_option("--out", curve_options.out, "Output CSV (default stdout)");

  std::string coefficients_path;
  auto* validate = app.add_subcommand("validate", "Run the fast invariant checks");
  validate->add_option("--coefficients", coefficients_path, "Replacement polynomial coefficient table");

  ProblemOptions problem_options;
  auto* problems = app.add_subcommand("problems", "Problem table, or one problem's scaled values and true Pareto set");
  problems->add_option("action", problem_options.action, "list or truth");
  problems->add_option("id", problem_options.id, "Problem id for truth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*run) return command_run(run_options);
    if (*table) return command_table(table_options);
    if (*curve) return command_curves(curve_options);
    if (*validate) return command_validate(coefficients_path);
    if (*problems) return command_problems(problem_options);
  } catch (const pals::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
