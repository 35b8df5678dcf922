#include <sstream>

#include <doctest.h>

#include "pals/config.hpp"
#include "pals/error.hpp"

namespace {

pals::ExperimentConfig parse(const std::string& text, pals::Profile profile = pals::Profile::Desk) {
  std::istringstream in(text);
  return pals::parse_experiment_config(in, pals::default_experiment(profile));
}

}  // namespace

TEST_CASE("profiles") {
  const auto desk = pals::default_experiment(pals::Profile::Desk);
  CHECK(desk.problems.size() == 9);
  CHECK(desk.replications == 50);
  REQUIRE(desk.methods.size() == 4);
  CHECK(desk.methods.back().label == "PALS");
  CHECK(desk.methods.back().config.budget == 10000);
  CHECK(desk.methods.back().config.batch_size == 200);
  const auto paper = pals::default_experiment(pals::Profile::Paper);
  CHECK(paper.replications == 200);
  CHECK(paper.methods.front().config.budget == 50000);
  CHECK(pals::parse_profile("paper") == pals::Profile::Paper);
  CHECK_THROWS_AS(pals::parse_profile("huge"), pals::ConfigError);
}

TEST_CASE("experiment keys and run defaults without sections") {
  const auto c = parse(
      "# comment\n"
      "problems = g2, g5\n"
      "replications = 3   # trailing comment\n"
      "seed = 77\n"
      "jobs = 2\n"
      "noise_variance = 1e-12\n"
      "write_traces = 0\n"
      "budget = 400\n");
  CHECK(c.problems == std::vector<std::string>{"g2", "g5"});
  CHECK(c.replications == 3);
  CHECK(c.master_seed == 77);
  CHECK(c.jobs == 2);
  REQUIRE(c.noise_variance.has_value());
  CHECK(*c.noise_variance == 1e-12);
  CHECK_FALSE(c.write_traces);
  CHECK(c.methods.size() == 4);
  for (const auto& m : c.methods) CHECK(m.config.budget == 400);
  c.validate();
}

TEST_CASE("method sections replace the method list") {
  const auto c = parse(
      "problems = g2\n"
      "budget = 1000\n"
      "[method PALS]\n"
      "coverage = 0.9\n"
      "[method pals-inc]\n"
      "algorithm = PALS\n"
      "beta = increasing\n"
      "epsilon = 0.01, 0.02\n"
      "[method PRS]\n"
      "batch_size = 500\n");
  REQUIRE(c.methods.size() == 3);
  CHECK(c.methods[0].label == "PALS");
  CHECK(c.methods[0].config.coverage == 0.9);
  CHECK(c.methods[0].config.budget == 1000);
  CHECK(c.methods[1].config.algorithm == pals::Algorithm::Pals);
  CHECK(c.methods[1].config.beta_mode == pals::BetaMode::Increasing);
  CHECK(c.methods[1].config.epsilon == std::vector<double>{0.01, 0.02});
  CHECK(c.methods[2].config.algorithm == pals::Algorithm::Prs);
  CHECK(c.methods[2].config.batch_size == 500);
  CHECK(c.methods[2].config.coverage == 0.5);
  c.validate();
}

TEST_CASE("every run key round-trips through describe") {
  pals::RunConfig c;
  std::istringstream lines(pals::describe(c));
  pals::RunConfig copy;
  copy.budget = 1;
  copy.coverage = 0.7;
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    REQUIRE(eq != std::string::npos);
    pals::apply_run_key(copy, line.substr(0, eq), line.substr(eq + 3));
  }
  CHECK(pals::describe(copy) == pals::describe(c));
}

TEST_CASE("malformed configs name the offending line") {
  auto message = [](const std::string& text) {
    try {
      parse(text).validate();
    } catch (const pals::ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("budget = lots\n").find("line 1") != std::string::npos);
  CHECK(message("replications = 2\nfoo = 1\n").find("line 2") != std::string::npos);
  CHECK(message("just words\n").find("line 1") != std::string::npos);
  CHECK(message("[method PALS\n").find("line 1") != std::string::npos);
  CHECK(message("[solver PALS]\n").find("line 1") != std::string::npos);
  CHECK_FALSE(message("[method ParEGO-KG]\n").empty());
  CHECK_FALSE(message("problems = g1, g12\n").empty());
  CHECK_FALSE(message("replications = 0\n").empty());
  CHECK_FALSE(message("[method PALS]\n[method PALS]\n").empty());
  CHECK_FALSE(message("[method a/b]\nalgorithm = PRS\n").empty());
  CHECK_FALSE(message("[method PALS]\ncoverage = 1.5\n").empty());
  CHECK_FALSE(message("noise_variance = -1\n").empty());
  CHECK(message("problems = g1\n[method PAL]\nintersection = corrected\n").empty());
}
