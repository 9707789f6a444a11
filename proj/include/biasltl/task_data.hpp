#pragma once

#include <Eigen/Core>

#include "biasltl/losses.hpp"

namespace biasltl {

// Center of the squared-distance regularizer shared across tasks.
using BiasVector = Eigen::VectorXd;

// One task's labelled examples. Immutable after construction; the stored
// radius bound R (max input row norm) feeds solver step sizes and
// certificate constants.
class TaskDataset {
 public:
  TaskDataset(Eigen::MatrixXd inputs, Eigen::VectorXd labels, LossKind loss);

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& labels() const { return labels_; }
  LossKind loss() const { return loss_; }
  double radius_bound() const { return radius_bound_; }
  Eigen::Index n() const { return inputs_.rows(); }
  Eigen::Index d() const { return inputs_.cols(); }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd labels_;
  LossKind loss_;
  double radius_bound_;
};

// Train/test pair drawn from one task; same dimension, same loss kind.
struct TaskSplit {
  TaskDataset train;
  TaskDataset test;

  TaskSplit(TaskDataset tr, TaskDataset te);
};

// R_Z(w) = (1/n) sum_k l(<x_k, w>, y_k)
double empirical_risk(const TaskDataset& data, const Eigen::VectorXd& w);

// Within-task primal objective Phi_h(w) = R_Z(w) + (lambda/2) ||w - h||^2.
double regularized_empirical_risk(const TaskDataset& data, double lambda,
                                  const BiasVector& h, const Eigen::VectorXd& w);

// Dual objective
//   Psi_h(u) = (1/n) sum_k l_k*(n u_k) + ||X^T u||^2 / (2 lambda) - <X h, u>.
// Returns +inf when any scaled coordinate n*u_k leaves the conjugate domain.
double dual_objective(const TaskDataset& data, double lambda, const BiasVector& h,
                      const Eigen::VectorXd& u);

// Same objective parametrized by the scaled dual z = n*u (the per-example
// subgradient scale). Avoids the u -> n*u round trip that can push a boundary
// point out of the domain by one ulp.
double dual_objective_scaled(const TaskDataset& data, double lambda,
                             const BiasVector& h, const Eigen::VectorXd& z);

// KKT map w = h - (1/lambda) X^T u.
Eigen::VectorXd primal_from_dual(const TaskDataset& data, double lambda,
                                 const BiasVector& h, const Eigen::VectorXd& u);

}  // namespace biasltl
