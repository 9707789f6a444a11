#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "biasltl/evaluation.hpp"

namespace biasltl {

// Baselines are the fixed biases (0 and the environment mean); LTL methods
// name the meta-gradient source and the deployed inner solver.
enum class Method {
  ItlSgd,
  ItlErm,
  MeanSgd,
  MeanErm,
  LtlSgdSgd,
  LtlErmSgd,
  LtlErmErm,
};

std::string method_name(Method m);
Method parse_method(const std::string& name);

enum class EnvironmentKind { SynthReg, SynthCls, Ratings };

std::string environment_name(EnvironmentKind k);
EnvironmentKind parse_environment(const std::string& name);

struct GridRange {
  double lo = 1e-6;
  double hi = 1e3;
  int count = 10;
};
GridRange parse_grid_range(const std::string& text);  // "lo:hi:count"

struct ExperimentConfig {
  EnvironmentKind environment = EnvironmentKind::SynthReg;

  // synthetic environments
  int d = 30;
  int n_train = 10;
  int n_test = 100;
  double task_mean_value = 4.0;  // m = value * ones(d)
  double task_std = 1.0;
  double snr = 10.0;
  double margin_threshold = 0.5;
  double logistic_scale = 10.0;

  // ratings environment
  std::string ratings_path;
  bool ratings_classification = false;  // label = sign(rating - threshold)
  double ratings_threshold = 5.0;
  int ratings_n_train = 8;

  std::vector<Method> methods = {Method::ItlSgd, Method::LtlSgdSgd};
  GridRange lambda_grid;
  GridRange gamma_grid;
  int t_train = 200;
  int t_val = 50;
  int t_test = 200;
  int runs = 10;
  std::uint64_t seed = 1;
  int eval_every = 0;  // 0 = auto: 5 when t_train > 100, else 1
  bool use_last_iterate = false;
  EvalMetric metric = EvalMetric::TrainingLoss;
  int threads = 1;
  std::string out_dir = "results";

  void validate() const;
  int effective_eval_every() const;
  EnvironmentMode ratings_mode() const {
    return ratings_classification ? EnvironmentMode::ClassificationHinge
                                  : EnvironmentMode::RegressionAbsolute;
  }
};

// Flat key = value text; '#' starts a comment; unknown keys are rejected.
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// Apply one key to an existing config (shared by the file parser and the
// command-line override path). Throws on unknown keys or bad values.
void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value);

// Canonical key = value rendering; parse_config_file(render(cfg)) == cfg.
std::string render_config(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::vector<LearningCurve> aggregated;              // one per method
  std::vector<std::vector<LearningCurve>> per_run;    // [method][run]
  std::filesystem::path manifest_path;
};

// Builds seeded task collections per repetition, runs every requested method,
// aggregates curves pointwise across repetitions and writes CSV files plus a
// rerunnable manifest into out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace biasltl
