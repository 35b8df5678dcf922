#include "pals/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "pals/error.hpp"
#include "pals/problems.hpp"
#include "pals/rng.hpp"

namespace pals {

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_optional(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : std::string("NA");
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

std::size_t parse_size(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("bad integer '" + std::string(s) + "'");
  return v;
}

std::optional<std::size_t> parse_optional_size(std::string_view s) {
  if (s == "NA") return std::nullopt;
  return parse_size(s);
}

double parse_real(std::string_view s) {
  if (s == "NA") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("bad number '" + std::string(s) + "'");
  return v;
}

std::string replication_name(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "r%04zu.csv", r);
  return buf;
}

template <typename T, typename Key>
std::vector<T> ordered_unique(const std::vector<ResultRow>& rows, Key key) {
  std::vector<T> out;
  for (const auto& r : rows) {
    const T& k = key(r);
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> columns = {
      "problem", "method", "replication", "iteration", "evaluations_used", "V_d", "M",
      "P",       "N",      "U",           "selected",  "wall_time"};
  return columns;
}

void write_result_header(std::ostream& out) {
  const auto& cols = result_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void write_result_row(std::ostream& out, const ResultRow& row) {
  out << row.problem << ',' << row.method << ',' << row.replication << ',' << row.iteration << ','
      << row.evaluations_used << ',' << format_double(row.volume_difference) << ','
      << format_double(row.misclassification) << ',' << format_optional(row.pareto_count) << ','
      << format_optional(row.dominated_count) << ',' << format_optional(row.unclassified_count) << ','
      << format_optional(row.selected) << ',' << format_double(row.wall_time) << '\n';
}

std::vector<ResultRow> read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("results file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::ostringstream header;
    write_result_header(header);
    if (line + "\n" != header.str()) throw ConfigError("unexpected results header: " + line);
  }
  std::vector<ResultRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != result_columns().size()) {
      throw ConfigError("results line " + std::to_string(number) + ": expected " +
                        std::to_string(result_columns().size()) + " fields");
    }
    try {
      ResultRow r;
      r.problem = std::string(f[0]);
      r.method = std::string(f[1]);
      r.replication = parse_size(f[2]);
      r.iteration = parse_size(f[3]);
      r.evaluations_used = parse_size(f[4]);
      r.volume_difference = parse_real(f[5]);
      r.misclassification = parse_real(f[6]);
      r.pareto_count = parse_optional_size(f[7]);
      r.dominated_count = parse_optional_size(f[8]);
      r.unclassified_count = parse_optional_size(f[9]);
      r.selected = parse_optional_size(f[10]);
      r.wall_time = parse_real(f[11]);
      rows.push_back(std::move(r));
    } catch (const ConfigError& e) {
      throw ConfigError("results line " + std::to_string(number) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<ResultRow> to_rows(const std::string& problem, const std::string& method,
                               std::size_t replication, const RunRecord& record) {
  std::vector<ResultRow> rows;
  rows.reserve(record.trace.size());
  for (const auto& it : record.trace) {
    ResultRow r;
    r.problem = problem;
    r.method = method;
    r.replication = replication;
    r.iteration = it.iteration;
    r.evaluations_used = it.evaluations;
    r.volume_difference = it.volume_difference;
    r.misclassification = it.misclassification;
    r.pareto_count = it.pareto_count;
    r.dominated_count = it.dominated_count;
    r.unclassified_count = it.unclassified_count;
    r.selected = it.selected;
    r.wall_time = it.wall_time;
    rows.push_back(std::move(r));
  }
  return rows;
}

RunSeeds run_seeds(std::uint64_t master_seed, const std::string& problem, const std::string& method_label,
                   std::size_t replication) {
  const std::uint64_t rep = static_cast<std::uint64_t>(replication);
  RunSeeds seeds;
  seeds.design = derive_seed(derive_seed(derive_seed(master_seed, "design"), problem), rep);
  seeds.method = derive_seed(
      derive_seed(derive_seed(derive_seed(master_seed, "method"), problem), method_label), rep);
  return seeds;
}

std::size_t ExperimentResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(runs.begin(), runs.end(), [](const RunOutcome& r) { return r.error.has_value(); }));
}

std::vector<ResultRow> ExperimentResult::rows() const {
  std::vector<ResultRow> out;
  for (const auto& r : runs) out.insert(out.end(), r.rows.begin(), r.rows.end());
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressCallback& progress) {
  config.validate();
  std::vector<Problem> problems;
  problems.reserve(config.problems.size());
  for (const auto& id : config.problems) {
    const ProblemSpec& spec = benchmark_spec(id);
    problems.push_back(config.noise_variance ? make_problem(with_noise_variance(spec, *config.noise_variance))
                                             : make_problem(spec));
  }

  ExperimentResult result;
  for (std::size_t p = 0; p < problems.size(); ++p) {
    for (const auto& m : config.methods) {
      for (std::size_t r = 0; r < config.replications; ++r) {
        RunOutcome o;
        o.problem = config.problems[p];
        o.method = m.label;
        o.replication = r;
        result.runs.push_back(std::move(o));
      }
    }
  }

  std::map<std::string, std::size_t> problem_slot;
  for (std::size_t p = 0; p < problems.size(); ++p) problem_slot[config.problems[p]] = p;
  std::map<std::string, const MethodSpec*> method_by_label;
  for (const auto& m : config.methods) method_by_label[m.label] = &m;

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  const std::size_t total = result.runs.size();
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      RunOutcome& o = result.runs[i];
      const Problem& problem = problems[problem_slot.at(o.problem)];
      const MethodSpec& method = *method_by_label.at(o.method);
      try {
        const RunRecord record =
            run(problem, method.config, run_seeds(config.master_seed, o.problem, o.method, o.replication));
        o.termination = record.termination;
        o.evaluations = record.evaluations;
        o.iterations = record.iterations();
        o.empty_intersections = record.empty_intersections;
        o.rows = to_rows(o.problem, o.method, o.replication, record);
      } catch (const std::exception& e) {
        o.error = e.what();
      }
      const std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, total);
      }
    }
  };

  const std::size_t workers = std::min(config.jobs, std::max<std::size_t>(total, 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return result;
}

void write_experiment(const ExperimentConfig& config, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  {
    std::ofstream out(config.output_dir / "results.csv");
    write_result_header(out);
    for (const auto& run : result.runs) {
      for (const auto& row : run.rows) write_result_row(out, row);
    }
    if (!out) throw Error("cannot write " + (config.output_dir / "results.csv").string());
  }
  {
    std::ofstream out(config.output_dir / "runs.csv");
    out << "problem,method,replication,status,termination,evaluations,iterations,empty_intersections,"
           "final_V_d,final_M\n";
    for (const auto& run : result.runs) {
      out << run.problem << ',' << run.method << ',' << run.replication << ',';
      if (run.error) {
        std::string message = *run.error;
        std::replace(message.begin(), message.end(), ',', ';');
        std::replace(message.begin(), message.end(), '\n', ' ');
        out << "error: " << message << ",NA,NA,NA,NA,NA,NA\n";
        continue;
      }
      const ResultRow& last = run.rows.back();
      out << "ok," << to_string(*run.termination) << ',' << run.evaluations << ',' << run.iterations << ','
          << run.empty_intersections << ',' << format_double(last.volume_difference) << ','
          << format_double(last.misclassification) << '\n';
    }
  }
  if (!config.write_traces) return;
  for (const auto& run : result.runs) {
    if (run.error) continue;
    const fs::path dir = config.output_dir / "traces" / run.problem / run.method;
    fs::create_directories(dir);
    std::ofstream out(dir / replication_name(run.replication));
    write_result_header(out);
    for (const auto& row : run.rows) write_result_row(out, row);
  }
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  // Last row per run, keyed by (problem, method, replication).
  std::map<std::tuple<std::string, std::string, std::size_t>, const ResultRow*> last;
  for (const auto& r : rows) {
    auto& slot = last[{r.problem, r.method, r.replication}];
    if (slot == nullptr || r.iteration > slot->iteration) slot = &r;
  }
  const auto problems = ordered_unique<std::string>(rows, [](const ResultRow& r) -> const std::string& { return r.problem; });
  const auto methods = ordered_unique<std::string>(rows, [](const ResultRow& r) -> const std::string& { return r.method; });

  std::vector<SummaryRow> out;
  for (const auto& p : problems) {
    const std::size_t first = out.size();
    for (const auto& m : methods) {
      SummaryRow s;
      s.problem = p;
      s.method = m;
      for (const auto& [key, row] : last) {
        if (std::get<0>(key) != p || std::get<1>(key) != m) continue;
        ++s.replications;
        s.volume_difference += row->volume_difference;
        s.misclassification += row->misclassification;
      }
      if (s.replications == 0) continue;
      s.volume_difference /= static_cast<double>(s.replications);
      s.misclassification /= static_cast<double>(s.replications);
      out.push_back(std::move(s));
    }
    if (out.size() == first) continue;
    auto flag = [&](auto value, auto best_flag, auto near_flag) {
      std::size_t best = first;
      for (std::size_t i = first; i < out.size(); ++i) {
        if (value(out[i]) < value(out[best])) best = i;
      }
      out[best].*best_flag = true;
      for (std::size_t i = first; i < out.size(); ++i) {
        out[i].*near_flag = value(out[i]) <= 1.1 * value(out[best]);
      }
    };
    flag([](const SummaryRow& s) { return s.volume_difference; }, &SummaryRow::best_volume, &SummaryRow::near_volume);
    flag([](const SummaryRow& s) { return s.misclassification; }, &SummaryRow::best_misclassification,
         &SummaryRow::near_misclassification);
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary) {
  out << "problem,method,replications,V_d,M,V_d_percent,M_percent,best_V_d,best_M,near_V_d,near_M\n";
  for (const auto& s : summary) {
    out << s.problem << ',' << s.method << ',' << s.replications << ',' << format_double(s.volume_difference)
        << ',' << format_double(s.misclassification) << ',' << format_double(100.0 * s.volume_difference)
        << ',' << format_double(100.0 * s.misclassification) << ',' << s.best_volume << ','
        << s.best_misclassification << ',' << s.near_volume << ',' << s.near_misclassification << '\n';
  }
}

void write_summary_text(std::ostream& out, const std::vector<SummaryRow>& summary) {
  std::size_t width = 6;
  for (const auto& s : summary) width = std::max(width, s.method.size());
  out << std::left << std::setw(8) << "problem" << std::setw(static_cast<int>(width) + 2) << "method"
      << std::right << std::setw(6) << "reps" << std::setw(12) << "V_d %" << std::setw(12) << "M %" << '\n';
  std::string current;
  for (const auto& s : summary) {
    auto cell = [](double v, bool best, bool near) {
      std::ostringstream c;
      c << std::fixed << std::setprecision(3) << 100.0 * v << (best ? '*' : near ? '+' : ' ');
      return c.str();
    };
    out << std::left << std::setw(8) << (s.problem == current ? "" : s.problem)
        << std::setw(static_cast<int>(width) + 2) << s.method << std::right << std::setw(6) << s.replications
        << std::setw(12) << cell(s.volume_difference, s.best_volume, s.near_volume) << std::setw(12)
        << cell(s.misclassification, s.best_misclassification, s.near_misclassification) << '\n';
    current = s.problem;
  }
}

CurveMetric parse_curve_metric(std::string_view s) {
  if (s == "V_d") return CurveMetric::VolumeDifference;
  if (s == "M") return CurveMetric::Misclassification;
  if (s == "P") return CurveMetric::Pareto;
  if (s == "N") return CurveMetric::Dominated;
  if (s == "U") return CurveMetric::Unclassified;
  throw ConfigError("unknown metric '" + std::string(s) + "' (expected V_d, M, P, N or U)");
}

std::vector<CurvePoint> curves(const std::vector<ResultRow>& rows, const std::string& problem,
                               CurveMetric metric, const std::vector<std::string>& methods) {
  auto value = [metric](const ResultRow& r) -> std::optional<double> {
    switch (metric) {
      case CurveMetric::VolumeDifference: return r.volume_difference;
      case CurveMetric::Misclassification: return r.misclassification;
      case CurveMetric::Pareto:
        return r.pareto_count ? std::optional<double>(static_cast<double>(*r.pareto_count)) : std::nullopt;
      case CurveMetric::Dominated:
        return r.dominated_count ? std::optional<double>(static_cast<double>(*r.dominated_count)) : std::nullopt;
      case CurveMetric::Unclassified:
        return r.unclassified_count ? std::optional<double>(static_cast<double>(*r.unclassified_count))
                                    : std::nullopt;
    }
    return std::nullopt;
  };
  const auto order = ordered_unique<std::string>(rows, [](const ResultRow& r) -> const std::string& { return r.method; });
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> sums;
  for (const auto& r : rows) {
    if (r.problem != problem) continue;
    if (!methods.empty() && std::find(methods.begin(), methods.end(), r.method) == methods.end()) continue;
    const auto v = value(r);
    if (!v || std::isnan(*v)) continue;
    const auto m = static_cast<std::size_t>(std::find(order.begin(), order.end(), r.method) - order.begin());
    auto& cell = sums[{m, r.iteration}];
    cell.first += *v;
    cell.second += 1;
  }
  std::vector<CurvePoint> out;
  for (const auto& [key, cell] : sums) {
    out.push_back({order[key.first], key.second, cell.first / static_cast<double>(cell.second), cell.second});
  }
  return out;
}

void write_curves_csv(std::ostream& out, const std::string& problem, std::string_view metric,
                      const std::vector<CurvePoint>& points) {
  out << "problem,method,iteration,metric,mean,runs\n";
  for (const auto& p : points) {
    out << problem << ',' << p.method << ',' << p.iteration << ',' << metric << ',' << format_double(p.mean)
        << ',' << p.runs << '\n';
  }
}

}  // namespace pals
