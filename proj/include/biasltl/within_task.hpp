#pragma once

#include <vector>

#include <Eigen/Core>

#include "biasltl/task_data.hpp"

namespace biasltl {

struct ErmSolution;  // erm_oracle.hpp

// Trajectory of one within-task solve. By default only the deployable pieces
// are kept (averaged and last iterates, the dual vector, per-step losses) so
// memory stays O(d + n); the full iterate list is retained on request.
struct InnerRun {
  Eigen::VectorXd averaged;      // mean of w^(1..n)
  Eigen::VectorXd last;          // w^(n+1)
  Eigen::VectorXd dual_iterate;  // picked subgradients u'_1..u'_n
  std::vector<double> step_losses;  // l_k(<x_k, w^(k)>) + (lambda/2)||w^(k) - h||^2
  std::vector<Eigen::VectorXd> iterates;  // w^(1..n+1), only when requested
};

// Subgradient descent on the biased regularized risk, step 1/(k lambda):
//   w^(1) = h
//   w^(k+1) = w^(k) - (1/(k lambda)) (x_k u'_k + lambda (w^(k) - h)).
// Examples are visited in the dataset's stored order; shuffling is the
// caller's concern.
InnerRun sgd_inner(const TaskDataset& data, double lambda, const BiasVector& h,
                   bool keep_iterates = false);

// Primal-dual twin: grows the dual vector one coordinate per step and defines
// the primal through the instantaneous KKT map
//   w^(k+1) = h - X_k^T u~^(k+1) / (k lambda).
// Produces the same primal trajectory as sgd_inner.
InnerRun dual_coordinate_inner(const TaskDataset& data, double lambda,
                               const BiasVector& h, bool keep_iterates = false);

// -lambda (w^(n+1) - h). Equals X^T u~^(n+1) / n for the run's dual vector,
// and is an eps-subgradient of the meta-objective h -> min_w Phi_h(w).
Eigen::VectorXd approx_meta_gradient(const InnerRun& run, double lambda,
                                     const BiasVector& h);

// Computable eps for the subgradient property: the dual suboptimality of the
// scaled last dual iterate, measured against the ERM reference,
//   eps = Psi_h(u~^(n+1) / n) + Phi_h(w_erm).
double epsilon_certificate(const InnerRun& run, const TaskDataset& data,
                           double lambda, const BiasVector& h,
                           const ErmSolution& erm);

// (1/n) sum_k step_losses - Phi_h(w_erm). Bounded above by
// inner_rate_constant(...) up to the ERM solver's gap tolerance.
double inner_regret_gap(const InnerRun& run, const TaskDataset& data, double lambda,
                        const BiasVector& h, const ErmSolution& erm);

// 2 R^2 L^2 (log(n) + 1) / (lambda n): the regret and eps-accuracy constant.
double inner_rate_constant(double radius, double lipschitz, double lambda,
                           Eigen::Index n);

}  // namespace biasltl
