#include "biasltl/within_task.hpp"

#include <cmath>
#include <stdexcept>

#include "biasltl/erm_oracle.hpp"

namespace biasltl {

namespace {

void check_inner_args(const TaskDataset& data, double lambda, const BiasVector& h) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("within_task: lambda must be positive");
  if (h.size() != data.d())
    throw std::invalid_argument("within_task: bias dimension mismatch");
}

}  // namespace

InnerRun sgd_inner(const TaskDataset& data, double lambda, const BiasVector& h,
                   bool keep_iterates) {
  check_inner_args(data, lambda, h);
  const Eigen::Index n = data.n();
  InnerRun run;
  run.step_losses.reserve(n);
  run.dual_iterate.resize(n);
  if (keep_iterates) run.iterates.reserve(n + 1);

  Eigen::VectorXd w = h;
  Eigen::VectorXd wsum = Eigen::VectorXd::Zero(data.d());
  for (Eigen::Index k = 0; k < n; ++k) {
    if (keep_iterates) run.iterates.push_back(w);
    wsum += w;
    const auto x = data.inputs().row(k);
    const double pred = x.dot(w);
    const double y = data.labels()[k];
    const double up = pick_subgradient(loss_subgradient(data.loss(), pred, y));
    run.dual_iterate[k] = up;
    run.step_losses.push_back(loss_value(data.loss(), pred, y) +
                              0.5 * lambda * (w - h).squaredNorm());
    const double gamma_k = 1.0 / (static_cast<double>(k + 1) * lambda);
    // s_k = x_k u'_k + lambda (w - h)
    w -= gamma_k * (up * x.transpose() + lambda * (w - h));
  }
  if (keep_iterates) run.iterates.push_back(w);
  run.last = std::move(w);
  run.averaged = wsum / static_cast<double>(n);
  return run;
}

InnerRun dual_coordinate_inner(const TaskDataset& data, double lambda,
                               const BiasVector& h, bool keep_iterates) {
  check_inner_args(data, lambda, h);
  const Eigen::Index n = data.n();
  InnerRun run;
  run.step_losses.reserve(n);
  run.dual_iterate.resize(n);
  if (keep_iterates) run.iterates.reserve(n + 1);

  Eigen::VectorXd w = h;
  Eigen::VectorXd wsum = Eigen::VectorXd::Zero(data.d());
  Eigen::VectorXd xtu = Eigen::VectorXd::Zero(data.d());  // X_k^T u~^(k+1)
  for (Eigen::Index k = 0; k < n; ++k) {
    if (keep_iterates) run.iterates.push_back(w);
    wsum += w;
    const auto x = data.inputs().row(k);
    const double pred = x.dot(w);
    const double y = data.labels()[k];
    const double up = pick_subgradient(loss_subgradient(data.loss(), pred, y));
    run.dual_iterate[k] = up;
    run.step_losses.push_back(loss_value(data.loss(), pred, y) +
                              0.5 * lambda * (w - h).squaredNorm());
    xtu += up * x.transpose();
    w = h - xtu / (static_cast<double>(k + 1) * lambda);
  }
  if (keep_iterates) run.iterates.push_back(w);
  run.last = std::move(w);
  run.averaged = wsum / static_cast<double>(n);
  return run;
}

Eigen::VectorXd approx_meta_gradient(const InnerRun& run, double lambda,
                                     const BiasVector& h) {
  if (run.last.size() != h.size())
    throw std::invalid_argument("approx_meta_gradient: dimension mismatch");
  return -lambda * (run.last - h);
}

double epsilon_certificate(const InnerRun& run, const TaskDataset& data,
                           double lambda, const BiasVector& h,
                           const ErmSolution& erm) {
  if (run.dual_iterate.size() != data.n() || erm.w.size() != data.d())
    throw std::invalid_argument("epsilon_certificate: mismatched problem instances");
  const double psi = dual_objective_scaled(data, lambda, h, run.dual_iterate);
  return psi + regularized_empirical_risk(data, lambda, h, erm.w);
}

double inner_regret_gap(const InnerRun& run, const TaskDataset& data, double lambda,
                        const BiasVector& h, const ErmSolution& erm) {
  if (run.step_losses.size() != static_cast<std::size_t>(data.n()) ||
      erm.w.size() != data.d())
    throw std::invalid_argument("inner_regret_gap: mismatched problem instances");
  double mean_loss = 0.0;
  for (double v : run.step_losses) mean_loss += v;
  mean_loss /= static_cast<double>(run.step_losses.size());
  return mean_loss - regularized_empirical_risk(data, lambda, h, erm.w);
}

double inner_rate_constant(double radius, double lipschitz, double lambda,
                           Eigen::Index n) {
  const double nn = static_cast<double>(n);
  return 2.0 * radius * radius * lipschitz * lipschitz * (std::log(nn) + 1.0) /
         (lambda * nn);
}

}  // namespace biasltl
