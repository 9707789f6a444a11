#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "biasltl/task_data.hpp"

namespace biasltl {

enum class EnvironmentMode { RegressionAbsolute, ClassificationHinge };

// Generative description of a task distribution: task weight vectors are
// w = task_mean + task_std * g with g standard normal, inputs are uniform on
// the unit sphere, labels follow the mode's observation model.
struct EnvironmentSpec {
  int d = 30;
  int n_train = 10;
  int n_test = 100;
  Eigen::VectorXd task_mean;      // m
  double task_std = 1.0;
  EnvironmentMode mode = EnvironmentMode::RegressionAbsolute;
  double snr = 10.0;              // regression noise: sigma = ||w|| / (sqrt(d) * snr)
  double margin_threshold = 0.5;  // classification: reject |<x,w>| below this
  double logistic_scale = 10.0;   // classification: P(y=1) = 1/(1 + scale*exp(-<x,w>))
  std::uint64_t seed = 0;

  void validate() const;
};

struct TaskCollection {
  std::vector<TaskSplit> splits;
  std::vector<Eigen::VectorXd> true_weights;  // per-task w, synthetic only

  bool has_true_weights() const { return !true_weights.empty(); }
  int count() const { return static_cast<int>(splits.size()); }
};

// Per task: draw w, then n_train + n_test sphere points with noisy linear
// labels; the first n_train form the train split. Task i uses the generator
// stream derive_seed(spec.seed, i), so generation order is irrelevant.
TaskCollection gen_regression_tasks(const EnvironmentSpec& spec, int count);

// Same input law with low-margin points rejected and binary labels drawn from
// the logistic model. A rejection loop exceeding 10^6 attempts for a single
// point signals an infeasible margin threshold.
TaskCollection gen_classification_tasks(const EnvironmentSpec& spec, int count);

// Long-form ratings CSV (header task_id,x1,...,xk,rating; one row per
// task/item pair). Rows are grouped by task id, shuffled per task with the
// given seed; the first n_train rows form the train split. Inputs are
// rescaled globally so the max row norm is 1. Classification maps the label
// to +1 when the rating exceeds the threshold, -1 otherwise.
TaskCollection load_rating_tasks(const std::filesystem::path& csv_path,
                                 EnvironmentMode mode, double threshold = 5.0,
                                 std::uint64_t shuffle_seed = 0, int n_train = 8);

struct CollectionSplits {
  TaskCollection train;
  TaskCollection validation;
  TaskCollection test;
};

// Seeded permutation, then contiguous partition into disjoint collections.
CollectionSplits split_collection(const TaskCollection& tasks, int t_train,
                                  int t_val, int t_test, std::uint64_t seed);

// Var_h = sqrt( (1/2) * mean_i ||w_i - h||^2 ). Requires true weights.
double environment_variance(const TaskCollection& tasks, const BiasVector& h);

// Dump/load: one CSV per task plus a manifest listing task files, loss kind,
// train sizes and (when present) true weights.
void save_collection(const std::filesystem::path& dir, const TaskCollection& tasks);
TaskCollection load_collection(const std::filesystem::path& dir);

}  // namespace biasltl
