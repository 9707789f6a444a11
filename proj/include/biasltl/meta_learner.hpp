#pragma once

#include <vector>

#include <Eigen/Core>

#include "biasltl/erm_oracle.hpp"
#include "biasltl/task_data.hpp"
#include "biasltl/within_task.hpp"

namespace biasltl {

// How the meta-gradient of one task is obtained: from the within-task SGD's
// last iterate, or from the ERM oracle.
enum class GradientMode { ApproxSgd, ExactErm };

struct MetaConfig {
  double lambda = 1.0;  // within-task regularization
  double gamma = 0.1;   // meta step size; 0 freezes the bias at its start value
  GradientMode gradient_mode = GradientMode::ApproxSgd;
  FistaOptions fista;   // ExactErm solver settings
  // When set, ExactErm mode throws if the solver misses its gap tolerance;
  // by default the capped iterate is used, matching the evaluation protocol.
  bool require_convergence = false;

  void validate() const;
};

struct MetaStep {
  Eigen::VectorXd next_bias;
  Eigen::VectorXd gradient;
};

// One online update: h^(t+1) = h^(t) - gamma * grad^(t), with grad^(t) the
// (approximate or exact) gradient of h -> min_w Phi_h(w) on this task.
MetaStep meta_step(const BiasVector& bias, const TaskDataset& task,
                   const MetaConfig& cfg);

struct MetaRun {
  std::vector<Eigen::VectorXd> bias_iterates;     // h^(1..T+1), h^(1) = 0
  Eigen::VectorXd averaged_bias;                  // mean of h^(1..T)
  std::vector<Eigen::VectorXd> meta_gradients;    // T entries
  std::vector<Eigen::VectorXd> running_averages;  // mean of h^(1..t), t = 1..T
};

// Folds meta_step over the task stream from h^(1) = 0. Sequential by
// contract; independent runs may execute concurrently.
MetaRun meta_train(const std::vector<TaskDataset>& tasks, const MetaConfig& cfg,
                   bool keep_running_averages = true);

}  // namespace biasltl
