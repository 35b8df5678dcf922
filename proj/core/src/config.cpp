#include "pals/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "pals/error.hpp"
#include "pals/problems.hpp"

namespace pals {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = s.find(',');
    const std::string_view item = trim(s.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  // std::from_chars for double is available in GCC 11.
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
  }
  return out;
}

std::uint64_t to_unsigned(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + std::string(key) + "' expects a nonnegative integer, got '" +
                      std::string(value) + "'");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw ConfigError("'" + std::string(key) + "' expects 0 or 1, got '" + std::string(value) + "'");
}

bool is_experiment_key(std::string_view key) {
  static const std::set<std::string, std::less<>> keys = {
      "problems", "replications", "seed", "jobs", "noise_variance", "write_traces"};
  return keys.count(key) > 0;
}

void apply_experiment_key(ExperimentConfig& config, std::string_view key, std::string_view value) {
  if (key == "problems") {
    config.problems = split_list(value);
  } else if (key == "replications") {
    config.replications = to_unsigned(key, value);
  } else if (key == "seed") {
    config.master_seed = to_unsigned(key, value);
  } else if (key == "jobs") {
    config.jobs = to_unsigned(key, value);
  } else if (key == "noise_variance") {
    config.noise_variance = to_double(key, value);
  } else if (key == "write_traces") {
    config.write_traces = to_bool(key, value);
  }
}

bool usable_label(std::string_view label) {
  if (label.empty()) return false;
  for (char c : label) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

Profile parse_profile(std::string_view s) {
  if (s == "desk") return Profile::Desk;
  if (s == "paper") return Profile::Paper;
  throw ConfigError("unknown profile '" + std::string(s) + "' (expected desk or paper)");
}

void apply_run_key(RunConfig& c, std::string_view key, std::string_view value) {
  if (key == "algorithm") c.algorithm = parse_algorithm(value);
  else if (key == "beta") {
    if (value == "fixed") c.beta_mode = BetaMode::Fixed;
    else if (value == "increasing") c.beta_mode = BetaMode::Increasing;
    else throw ConfigError("'beta' expects fixed or increasing");
  } else if (key == "coverage") c.coverage = to_double(key, value);
  else if (key == "delta") c.delta = to_double(key, value);
  else if (key == "epsilon") {
    c.epsilon.clear();
    for (const auto& item : split_list(value)) c.epsilon.push_back(to_double(key, item));
  } else if (key == "batch_size") c.batch_size = to_unsigned(key, value);
  else if (key == "budget") c.budget = to_unsigned(key, value);
  else if (key == "intersection") c.intersection = parse_intersection_mode(value);
  else if (key == "n0") c.n0 = to_unsigned(key, value);
  else if (key == "initial_replicates") c.initial_replicates = to_unsigned(key, value);
  else if (key == "design_candidates") c.design_candidates = to_unsigned(key, value);
  else if (key == "refit_every") c.refit_every = to_unsigned(key, value);
  else if (key == "sample_paths") c.sample_paths = to_unsigned(key, value);
  else if (key == "parego_rho") c.parego_rho = to_double(key, value);
  else if (key == "noise_estimation") c.noise_estimation = parse_noise_estimation(value);
  else if (key == "reml_starts") c.reml_starts = static_cast<int>(to_unsigned(key, value));
  else if (key == "record_wall_time") c.record_wall_time = to_bool(key, value);
  else throw ConfigError("unknown key '" + std::string(key) + "'");
}

std::string describe(const RunConfig& c) {
  std::ostringstream out;
  out << "algorithm = " << to_string(c.algorithm) << '\n'
      << "beta = " << to_string(c.beta_mode) << '\n'
      << "coverage = " << c.coverage << '\n'
      << "delta = " << c.delta << '\n'
      << "epsilon = ";
  for (std::size_t i = 0; i < c.epsilon.size(); ++i) out << (i ? "," : "") << c.epsilon[i];
  out << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "budget = " << c.budget << '\n'
      << "intersection = " << to_string(c.intersection) << '\n'
      << "n0 = " << c.n0 << '\n'
      << "initial_replicates = " << c.initial_replicates << '\n'
      << "design_candidates = " << c.design_candidates << '\n'
      << "refit_every = " << c.refit_every << '\n'
      << "sample_paths = " << c.sample_paths << '\n'
      << "parego_rho = " << c.parego_rho << '\n'
      << "noise_estimation = " << to_string(c.noise_estimation) << '\n'
      << "reml_starts = " << c.reml_starts << '\n'
      << "record_wall_time = " << (c.record_wall_time ? 1 : 0) << '\n';
  return out.str();
}

void ExperimentConfig::validate() const {
  if (problems.empty()) throw ConfigError("no problems selected");
  for (const auto& p : problems) benchmark_spec(p);
  if (methods.empty()) throw ConfigError("no methods selected");
  if (replications < 1) throw ConfigError("replications must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (noise_variance && !(*noise_variance >= 0.0)) throw ConfigError("noise_variance must be nonnegative");
  std::set<std::string> seen;
  for (const auto& m : methods) {
    if (!usable_label(m.label)) {
      throw ConfigError("method label '" + m.label + "' may only use letters, digits, '-', '_' and '.'");
    }
    if (!seen.insert(m.label).second) throw ConfigError("duplicate method label '" + m.label + "'");
    m.config.validate();
  }
}

RunConfig profile_run_config(Profile profile) {
  RunConfig c;
  c.batch_size = 200;
  c.budget = profile == Profile::Paper ? 50000 : 10000;
  return c;
}

ExperimentConfig default_experiment(Profile profile) {
  ExperimentConfig e;
  for (const auto& spec : benchmark_specs()) e.problems.push_back(spec.id);
  e.replications = profile == Profile::Paper ? 200 : 50;
  const RunConfig base = profile_run_config(profile);
  for (Algorithm a : {Algorithm::Prs, Algorithm::Cors, Algorithm::ParegoEim, Algorithm::Pals}) {
    RunConfig c = base;
    c.algorithm = a;
    e.methods.push_back({std::string(to_string(a)), c});
  }
  return e;
}

ExperimentConfig parse_experiment_config(std::istream& in, const ExperimentConfig& base) {
  ExperimentConfig out = base;
  std::vector<std::pair<std::string, std::string>> defaults;
  struct Section {
    std::string label;
    std::vector<std::pair<std::string, std::string>> keys;
  };
  std::vector<Section> sections;

  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw ConfigError("line " + std::to_string(number) + ": " + what);
    };
    if (text.front() == '[') {
      if (text.back() != ']') fail("unterminated section header");
      const std::string_view inner = trim(text.substr(1, text.size() - 2));
      if (inner.substr(0, 7) != "method " ) fail("sections must read [method LABEL]");
      sections.push_back({std::string(trim(inner.substr(7))), {}});
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    const std::string key(trim(text.substr(0, eq)));
    const std::string value(trim(text.substr(eq + 1)));
    if (key.empty()) fail("empty key");
    try {
      if (sections.empty() && is_experiment_key(key)) {
        apply_experiment_key(out, key, value);
      } else {
        RunConfig probe;
        apply_run_key(probe, key, value);  // reject unknown keys early
        (sections.empty() ? defaults : sections.back().keys).emplace_back(key, value);
      }
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }

  if (sections.empty()) {
    for (auto& m : out.methods) {
      for (const auto& [k, v] : defaults) apply_run_key(m.config, k, v);
    }
    return out;
  }
  out.methods.clear();
  const RunConfig fallback = base.methods.empty() ? RunConfig{} : base.methods.front().config;
  for (const auto& section : sections) {
    MethodSpec m{section.label, fallback};
    bool explicit_algorithm = false;
    for (const auto& [k, v] : defaults) apply_run_key(m.config, k, v);
    for (const auto& [k, v] : section.keys) {
      apply_run_key(m.config, k, v);
      explicit_algorithm = explicit_algorithm || k == "algorithm";
    }
    if (!explicit_algorithm) m.config.algorithm = parse_algorithm(section.label);
    out.methods.push_back(std::move(m));
  }
  return out;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_experiment_config(in, base);
}

}  // namespace pals
