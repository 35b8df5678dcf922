#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "pals/config.hpp"
#include "pals/error.hpp"
#include "pals/experiment.hpp"
#include "pals/metrics.hpp"

namespace {

pals::ExperimentConfig tiny_experiment() {
  std::istringstream in(
      "problems = g2, g7\n"
      "replications = 2\n"
      "budget = 400\n"
      "[method PRS]\n"
      "[method PALS]\n"
      "[method CoRS]\n"
      "sample_paths = 10\n");
  return pals::parse_experiment_config(in, pals::default_experiment(pals::Profile::Desk));
}

std::string csv_of(const std::vector<pals::ResultRow>& rows) {
  std::ostringstream out;
  pals::write_result_header(out);
  for (const auto& r : rows) pals::write_result_row(out, r);
  return out.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("result rows round-trip through CSV") {
  pals::ResultRow a;
  a.problem = "g3";
  a.method = "PALS";
  a.replication = 4;
  a.iteration = 2;
  a.evaluations_used = 600;
  a.volume_difference = 0.0123456789123;
  a.misclassification = 3.0 / 441.0;
  a.pareto_count = 10;
  a.dominated_count = 400;
  a.unclassified_count = 31;
  a.selected = 17;
  pals::ResultRow b = a;
  b.method = "PRS";
  b.pareto_count.reset();
  b.dominated_count.reset();
  b.unclassified_count.reset();
  b.selected.reset();

  const std::string text = csv_of({a, b});
  CHECK(text.substr(0, text.find('\n')) ==
        "problem,method,replication,iteration,evaluations_used,V_d,M,P,N,U,selected,wall_time");
  CHECK(text.find("0.0123456789,") != std::string::npos);
  CHECK(text.find("NA,NA,NA,NA") != std::string::npos);
  std::istringstream in(text);
  const auto back = pals::read_results(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].selected == a.selected);
  CHECK(back[0].pareto_count == a.pareto_count);
  CHECK(back[0].volume_difference == doctest::Approx(a.volume_difference).epsilon(1e-8));
  CHECK_FALSE(back[1].selected.has_value());
  CHECK(csv_of(back) == text);

  std::istringstream broken("problem,method\ng1,PALS,zero\n");
  CHECK_THROWS_AS(pals::read_results(broken), pals::ConfigError);
}

TEST_CASE("run seeds") {
  const auto a = pals::run_seeds(1, "g1", "PALS", 0);
  const auto b = pals::run_seeds(1, "g1", "PRS", 0);
  CHECK(a.design == b.design);
  CHECK(a.method != b.method);
  CHECK(pals::run_seeds(1, "g1", "PALS", 1).design != a.design);
  CHECK(pals::run_seeds(1, "g2", "PALS", 0).design != a.design);
  CHECK(pals::run_seeds(2, "g1", "PALS", 0).design != a.design);
}

TEST_CASE("experiments are independent of the number of workers") {
  auto config = tiny_experiment();
  config.jobs = 1;
  const auto one = pals::run_experiment(config);
  config.jobs = 3;
  const auto three = pals::run_experiment(config);
  CHECK(one.failures() == 0);
  CHECK(one.runs.size() == 2 * 3 * 2);
  CHECK(csv_of(one.rows()) == csv_of(three.rows()));

  SUBCASE("adding a method leaves existing runs unchanged") {
    auto wider = tiny_experiment();
    wider.methods.push_back({"PAL", wider.methods.front().config});
    wider.methods.back().config.algorithm = pals::Algorithm::Pal;
    const auto more = pals::run_experiment(wider);
    std::vector<pals::ResultRow> kept;
    for (const auto& r : more.rows()) {
      if (r.method != "PAL") kept.push_back(r);
    }
    CHECK(csv_of(kept) == csv_of(one.rows()));
  }

  SUBCASE("files") {
    const auto dir = std::filesystem::temp_directory_path() / "pals_experiment_test";
    std::filesystem::remove_all(dir);
    config.output_dir = dir;
    pals::write_experiment(config, one);
    CHECK(slurp(dir / "results.csv") == csv_of(one.rows()));
    CHECK(std::filesystem::exists(dir / "traces" / "g7" / "PALS" / "r0001.csv"));
    const std::string runs = slurp(dir / "runs.csv");
    CHECK(runs.find("g2,PRS,0,ok,budget,600,2,0,") != std::string::npos);
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("stored metrics recompute from the stored predictions") {
  const auto& problem = pals::benchmark_problem("g9");
  pals::RunConfig c;
  c.budget = 600;
  const auto record = pals::run(problem, c, 5);
  const Eigen::Vector2d ref = pals::default_reference_point();
  for (const auto& row : record.trace) {
    CHECK(row.misclassification ==
          pals::misclassification_rate(problem.truth().pareto_set, row.predicted_set, problem.grid().size()));
    CHECK(row.volume_difference == pals::symmetric_difference_volume(
                                       pals::clip_to_reference(problem.truth().front, ref),
                                       pals::clip_to_reference(row.predicted_front, ref), ref));
  }
}

TEST_CASE("summary table") {
  std::vector<pals::ResultRow> rows;
  auto add = [&](const std::string& p, const std::string& m, std::size_t rep, std::size_t it, double vd, double mis) {
    pals::ResultRow r;
    r.problem = p;
    r.method = m;
    r.replication = rep;
    r.iteration = it;
    r.volume_difference = vd;
    r.misclassification = mis;
    rows.push_back(r);
  };
  add("g1", "PRS", 0, 0, 0.9, 0.9);
  add("g1", "PRS", 0, 1, 0.020, 0.10);
  add("g1", "PRS", 1, 1, 0.040, 0.10);
  add("g1", "PALS", 0, 1, 0.030, 0.08);
  add("g1", "PALS", 1, 1, 0.030, 0.087);
  add("g1", "CoRS", 0, 1, 0.032, 0.2);
  add("g2", "PALS", 0, 3, 0.5, 0.5);

  const auto s = pals::summarize(rows);
  REQUIRE(s.size() == 4);
  CHECK(s[0].method == "PRS");
  CHECK(s[0].replications == 2);
  CHECK(s[0].volume_difference == doctest::Approx(0.03));
  // PRS and PALS tie on V_d; the earlier method takes the single best flag.
  CHECK(s[0].best_volume);
  CHECK_FALSE(s[1].best_volume);
  CHECK(s[1].near_volume);
  CHECK(s[2].near_volume);  // 0.032 is within 10% of 0.030
  CHECK(s[1].best_misclassification);
  CHECK_FALSE(s[2].near_misclassification);
  CHECK(s[3].problem == "g2");
  CHECK(s[3].best_volume);

  std::ostringstream csv;
  pals::write_summary_csv(csv, s);
  CHECK(csv.str().find("g1,PRS,2,0.03,0.1,3,10,1,0,1,0") != std::string::npos);

  SUBCASE("a single replication averages to that run") {
    const auto one = pals::summarize({rows[3]});
    REQUIRE(one.size() == 1);
    CHECK(one[0].volume_difference == rows[3].volume_difference);
  }

  SUBCASE("curves") {
    const auto all = pals::curves(rows, "g1", pals::CurveMetric::VolumeDifference);
    REQUIRE(all.size() == 4);
    CHECK(all[0].method == "PRS");
    CHECK(all[0].iteration == 0);
    CHECK(all[1].mean == doctest::Approx(0.03));
    CHECK(all[1].runs == 2);
    const auto only = pals::curves(rows, "g1", pals::CurveMetric::Misclassification, {"CoRS"});
    REQUIRE(only.size() == 1);
    CHECK(only[0].mean == 0.2);
    CHECK(pals::curves(rows, "g1", pals::CurveMetric::Pareto).empty());
    CHECK_THROWS_AS(pals::parse_curve_metric("hypervolume"), pals::ConfigError);
  }
}
