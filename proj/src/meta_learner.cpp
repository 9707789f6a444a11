#include "biasltl/meta_learner.hpp"

#include <stdexcept>

namespace biasltl {

void MetaConfig::validate() const {
  if (!(lambda > 0.0))
    throw std::invalid_argument("MetaConfig: lambda must be positive");
  if (!(gamma >= 0.0))
    throw std::invalid_argument("MetaConfig: gamma must be nonnegative");
}

MetaStep meta_step(const BiasVector& bias, const TaskDataset& task,
                   const MetaConfig& cfg) {
  cfg.validate();
  if (bias.size() != task.d())
    throw std::invalid_argument("meta_step: bias dimension mismatch");

  Eigen::VectorXd grad;
  if (cfg.gradient_mode == GradientMode::ApproxSgd) {
    const InnerRun run = sgd_inner(task, cfg.lambda, bias);
    grad = approx_meta_gradient(run, cfg.lambda, bias);
  } else {
    const ErmSolution sol = fista_solve(task, cfg.lambda, bias, cfg.fista);
    if (cfg.require_convergence && !sol.converged)
      throw std::runtime_error("meta_step: ERM solver did not converge");
    grad = -cfg.lambda * (sol.w - bias);
  }
  return {bias - cfg.gamma * grad, std::move(grad)};
}

MetaRun meta_train(const std::vector<TaskDataset>& tasks, const MetaConfig& cfg,
                   bool keep_running_averages) {
  cfg.validate();
  if (tasks.empty()) throw std::invalid_argument("meta_train: empty task stream");
  const Eigen::Index d = tasks.front().d();
  const LossKind loss = tasks.front().loss();
  for (const TaskDataset& t : tasks) {
    if (t.d() != d || t.loss() != loss)
      throw std::invalid_argument("meta_train: inconsistent task stream");
  }

  MetaRun run;
  const std::size_t T = tasks.size();
  run.bias_iterates.reserve(T + 1);
  run.meta_gradients.reserve(T);
  if (keep_running_averages) run.running_averages.reserve(T);

  Eigen::VectorXd h = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd hsum = Eigen::VectorXd::Zero(d);
  run.bias_iterates.push_back(h);
  for (std::size_t t = 0; t < T; ++t) {
    hsum += h;
    if (keep_running_averages)
      run.running_averages.push_back(hsum / static_cast<double>(t + 1));
    MetaStep step = meta_step(h, tasks[t], cfg);
    h = std::move(step.next_bias);
    run.bias_iterates.push_back(h);
    run.meta_gradients.push_back(std::move(step.gradient));
  }
  run.averaged_bias = hsum / static_cast<double>(T);
  return run;
}

}  // namespace biasltl
