#include "biasltl/task_data.hpp"

#include <stdexcept>
#include <string>

namespace biasltl {

TaskDataset::TaskDataset(Eigen::MatrixXd inputs, Eigen::VectorXd labels, LossKind loss)
    : inputs_(std::move(inputs)), labels_(std::move(labels)), loss_(loss) {
  if (inputs_.rows() < 1 || inputs_.cols() < 1)
    throw std::invalid_argument("TaskDataset: need n >= 1 and d >= 1");
  if (labels_.size() != inputs_.rows())
    throw std::invalid_argument("TaskDataset: label count does not match rows");
  for (Eigen::Index k = 0; k < labels_.size(); ++k) {
    if (!label_valid(loss_, labels_[k]))
      throw std::invalid_argument("TaskDataset: invalid label at row " +
                                  std::to_string(k));
  }
  radius_bound_ = inputs_.rowwise().norm().maxCoeff();
}

TaskSplit::TaskSplit(TaskDataset tr, TaskDataset te)
    : train(std::move(tr)), test(std::move(te)) {
  if (train.d() != test.d())
    throw std::invalid_argument("TaskSplit: train/test dimension mismatch");
  if (train.loss() != test.loss())
    throw std::invalid_argument("TaskSplit: train/test loss kind mismatch");
}

double empirical_risk(const TaskDataset& data, const Eigen::VectorXd& w) {
  if (w.size() != data.d())
    throw std::invalid_argument("empirical_risk: dimension mismatch");
  const Eigen::VectorXd preds = data.inputs() * w;
  double total = 0.0;
  for (Eigen::Index k = 0; k < data.n(); ++k)
    total += loss_value(data.loss(), preds[k], data.labels()[k]);
  return total / static_cast<double>(data.n());
}

double regularized_empirical_risk(const TaskDataset& data, double lambda,
                                  const BiasVector& h, const Eigen::VectorXd& w) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("regularized_empirical_risk: lambda must be positive");
  if (h.size() != data.d() || w.size() != data.d())
    throw std::invalid_argument("regularized_empirical_risk: dimension mismatch");
  return empirical_risk(data, w) + 0.5 * lambda * (w - h).squaredNorm();
}

double dual_objective(const TaskDataset& data, double lambda, const BiasVector& h,
                      const Eigen::VectorXd& u) {
  if (u.size() != data.n())
    throw std::invalid_argument("dual_objective: dual dimension mismatch");
  return dual_objective_scaled(data, lambda, h,
                               static_cast<double>(data.n()) * u);
}

double dual_objective_scaled(const TaskDataset& data, double lambda,
                             const BiasVector& h, const Eigen::VectorXd& z) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("dual_objective: lambda must be positive");
  if (z.size() != data.n() || h.size() != data.d())
    throw std::invalid_argument("dual_objective: dimension mismatch");
  const double n = static_cast<double>(data.n());
  double conj = 0.0;
  for (Eigen::Index k = 0; k < data.n(); ++k) {
    const double c = loss_conjugate(data.loss(), z[k], data.labels()[k]);
    if (c == kInfinity) return kInfinity;
    conj += c;
  }
  conj /= n;
  const Eigen::VectorXd xtz = data.inputs().transpose() * z;
  return conj + xtz.squaredNorm() / (2.0 * lambda * n * n) -
         (data.inputs() * h).dot(z) / n;
}

Eigen::VectorXd primal_from_dual(const TaskDataset& data, double lambda,
                                 const BiasVector& h, const Eigen::VectorXd& u) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("primal_from_dual: lambda must be positive");
  if (u.size() != data.n() || h.size() != data.d())
    throw std::invalid_argument("primal_from_dual: dimension mismatch");
  return h - (data.inputs().transpose() * u) / lambda;
}

}  // namespace biasltl
