#pragma once

// Replicated experiment execution and result files.
//
// Output layout under ExperimentConfig::output_dir:
//   results.csv                      every trace row of every run
//   runs.csv                         one summary line per run
//   traces/<problem>/<method>/rNNNN.csv  per-run trace (when write_traces)

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pals/config.hpp"
#include "pals/drivers.hpp"

namespace pals {

/// One trace row of one run. Field order is the CSV column order.
struct ResultRow {
  std::string problem;
  std::string method;
  std::size_t replication = 0;
  std::size_t iteration = 0;
  std::size_t evaluations_used = 0;
  double volume_difference = 0.0;
  double misclassification = 0.0;
  std::optional<std::size_t> pareto_count;
  std::optional<std::size_t> dominated_count;
  std::optional<std::size_t> unclassified_count;
  std::optional<std::size_t> selected;
  double wall_time = 0.0;
};

/// Column names of results.csv.
const std::vector<std::string>& result_columns();

void write_result_header(std::ostream& out);
/// Floats use 9 significant digits; missing values are written as NA.
void write_result_row(std::ostream& out, const ResultRow& row);
/// Parses a results.csv stream (header required). Throws ConfigError on
/// malformed lines.
std::vector<ResultRow> read_results(std::istream& in);

std::vector<ResultRow> to_rows(const std::string& problem, const std::string& method,
                               std::size_t replication, const RunRecord& record);

/// Seeds of one run. The design stream depends on (master, problem,
/// replication) only, so all methods share initial designs and initial
/// evaluations; the method stream also depends on the method label.
RunSeeds run_seeds(std::uint64_t master_seed, const std::string& problem, const std::string& method_label,
                   std::size_t replication);

struct RunOutcome {
  std::string problem;
  std::string method;
  std::size_t replication = 0;
  std::optional<std::string> error;
  std::optional<Termination> termination;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  std::size_t empty_intersections = 0;
  std::vector<ResultRow> rows;
};

struct ExperimentResult {
  std::vector<RunOutcome> runs;  // problem, method, replication order

  std::size_t failures() const;
  /// Rows of every successful run in run order.
  std::vector<ResultRow> rows() const;
};

/// Called after each finished run with (done, total); may be invoked from
/// worker threads, one call at a time.
using ProgressCallback = std::function<void(std::size_t, std::size_t)>;

/// Runs every (problem, method, replication) on config.jobs worker threads.
/// Run failures are captured in the outcome and do not stop other runs. The
/// result does not depend on the number of workers.
ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressCallback& progress = {});

/// Writes results.csv, runs.csv and (optionally) per-run traces.
void write_experiment(const ExperimentConfig& config, const ExperimentResult& result);

struct SummaryRow {
  std::string problem;
  std::string method;
  std::size_t replications = 0;
  double volume_difference = 0.0;  // mean final value
  double misclassification = 0.0;  // mean final value
  bool best_volume = false;
  bool best_misclassification = false;
  bool near_volume = false;  // within 10% of the best
  bool near_misclassification = false;
};

/// Final-iteration means per (problem, method), problems and methods in
/// order of first appearance. Exactly one best flag per metric and problem;
/// ties go to the earlier method.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary);
/// Aligned text table with values in percent; '*' marks the best value and
/// '+' values within 10% of it.
void write_summary_text(std::ostream& out, const std::vector<SummaryRow>& summary);

enum class CurveMetric { VolumeDifference, Misclassification, Pareto, Dominated, Unclassified };
CurveMetric parse_curve_metric(std::string_view s);

struct CurvePoint {
  std::string method;
  std::size_t iteration = 0;
  double mean = 0.0;
  std::size_t runs = 0;
};

/// Per-iteration mean of `metric` for one problem. An empty method filter
/// keeps every method. Rows with a missing value are skipped.
std::vector<CurvePoint> curves(const std::vector<ResultRow>& rows, const std::string& problem,
                               CurveMetric metric, const std::vector<std::string>& methods = {});
void write_curves_csv(std::ostream& out, const std::string& problem, std::string_view metric,
                      const std::vector<CurvePoint>& points);

}  // namespace pals
