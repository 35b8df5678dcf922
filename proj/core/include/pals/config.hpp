#pragma once

// Experiment configuration files.
//
// A config is a flat key = value text file. '#' starts a comment. Keys
// before the first section are experiment-wide; run keys given there are
// defaults for every method. Each method is declared by a section header
//
//   [method LABEL]
//
// followed by run keys that override the defaults for that method alone.
// Without an explicit `algorithm` key the label must name an algorithm.
//
// Experiment keys: problems (comma list), replications, seed, jobs,
// noise_variance (replaces every raw noise variance), write_traces (0/1).
// Run keys: algorithm, beta (fixed | increasing), coverage, delta, epsilon
// (comma list), batch_size, budget, intersection (none | intersect |
// corrected), n0, initial_replicates, design_candidates, refit_every,
// sample_paths, parego_rho, noise_estimation (joint | pooled), reml_starts,
// record_wall_time (0/1).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pals/drivers.hpp"

namespace pals {

enum class Profile { Desk, Paper };

Profile parse_profile(std::string_view s);

struct MethodSpec {
  std::string label;
  RunConfig config;
};

struct ExperimentConfig {
  std::vector<std::string> problems;
  std::vector<MethodSpec> methods;
  std::size_t replications = 50;
  std::uint64_t master_seed = 20240501;
  std::size_t jobs = 1;
  std::optional<double> noise_variance;
  bool write_traces = true;
  std::filesystem::path output_dir = "results";

  /// Throws ConfigError on unknown problems, duplicate labels, labels that
  /// are unusable in file names, zero replications or invalid run configs.
  void validate() const;
};

/// Run settings of a profile: desk = budget 10000, paper = budget 50000,
/// both with k = 200.
RunConfig profile_run_config(Profile profile);

/// All nine problems; methods PRS, CoRS, ParEGO-EIm, PALS; 50 (desk) or
/// 200 (paper) replications.
ExperimentConfig default_experiment(Profile profile);

/// Applies the file's keys on top of `base`. A file that declares methods
/// replaces the base method list. Throws ConfigError with the offending line
/// number on malformed input.
ExperimentConfig parse_experiment_config(std::istream& in, const ExperimentConfig& base);
ExperimentConfig load_experiment_config(const std::filesystem::path& path, const ExperimentConfig& base);

/// Sets one run key; throws ConfigError for unknown keys or bad values.
void apply_run_key(RunConfig& config, std::string_view key, std::string_view value);

/// Key = value rendering of every run field, in the order above.
std::string describe(const RunConfig& config);

}  // namespace pals
