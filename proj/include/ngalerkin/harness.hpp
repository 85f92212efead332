#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ngalerkin/metrics.hpp"
#include "ngalerkin/parallel.hpp"
#include "ngalerkin/problems.hpp"
#include "ngalerkin/samplers.hpp"
#include "ngalerkin/timestepper.hpp"

namespace ngalerkin {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

struct MetricsConfig {
  bool l2 = true;
  /// Trapezoid nodes for d = 1, uniform MC draws otherwise.
  std::size_t l2_grid = 2001;
  std::size_t l2_mc = 10000;
  std::vector<std::size_t> marginal_axes;
  std::size_t marginal_points = 101;
  std::size_t marginal_samples = 2000;
  bool snis = false;
  std::size_t snis_samples = 100000;
  bool entropy = false;
  /// KDE of the benchmark uses the first kde_paths paths.
  std::size_t kde_paths = 5000;
};

struct BenchmarkConfig {
  std::size_t n_paths = 100000;
  double dt = 1e-3;
};

struct RunConfig {
  std::string preset;
  std::string problem = "kdv";
  std::size_t d = 8;
  std::optional<double> penalty_weight;
  StepperConfig stepper;
  SamplerConfig sampler;
  FitConfig fit;
  std::size_t m = 100;
  std::uint64_t seed = 0;
  std::filesystem::path out = "run";
  std::size_t stride = 1;
  MetricsConfig metrics;
  BenchmarkConfig benchmark;
  /// Settings of the config this one was derived from (static baseline audit).
  std::optional<std::vector<std::pair<std::string, std::string>>> derived_from;

  double final_time() const { return static_cast<double>(stepper.n_steps) * stepper.dt; }
};

RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(std::string_view text, const std::string& source = "<string>");

/// Checks the invariants that do not need the file system.
void validate(const RunConfig& cfg);

struct Preset {
  std::string name;
  std::string description;
  std::string yaml;
};

const std::vector<Preset>& presets();
const Preset& preset(const std::string& name);

/// Canonical "section.key" = value listing of every setting.
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg);

/// Same config with sampler kind static_uniform.
RunConfig static_baseline(RunConfig cfg);

ProblemDef build_problem(const RunConfig& cfg);

struct RunSummary {
  int exit_status = 0;
  std::size_t steps_completed = 0;
  std::optional<double> final_rel_l2;
  std::optional<MomentErrors> final_moment_errors;
  std::optional<double> final_entropy;
  std::optional<std::string> error;
  std::vector<double> final_theta;
};

/// Fit, sample, integrate and write the artifact set into cfg.out.
RunSummary run_experiment(const RunConfig& cfg, Exec exec = Exec::parallel);

/// Euler-Maruyama reference for a Fokker-Planck config, memoized per process.
const PathBundle& fokker_planck_benchmark(const RunConfig& cfg, const std::vector<double>& times);

class MissingInputs : public std::runtime_error {
 public:
  explicit MissingInputs(std::vector<std::string> names);
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

/// Writes plot data under <run>/plot and returns the files written.
std::vector<std::filesystem::path> emit_plotdata(const std::filesystem::path& run_dir, bool svg = false);

/// Shortest round-trip decimal.
std::string format_double(double v);

}  // namespace ngalerkin
