#pragma once

#include <cmath>

#include <Eigen/Core>

#include "biasltl/rng.hpp"
#include "biasltl/task_data.hpp"

namespace biasltl {

// Population of random within-task problems used by the certificate suites.
struct RandomInstanceOptions {
  int n_min = 1;
  int n_max = 20;
  int d_min = 1;
  int d_max = 10;
  double lambda_log_lo = -3.0;  // lambda ~ 10^U[lo, hi]
  double lambda_log_hi = 2.0;
  bool unit_sphere_rows = true;  // otherwise raw gaussian rows
  bool both_losses = true;       // otherwise absolute only
  double h_scale = 1.0;
  double label_scale = 2.0;  // absolute-loss label standard deviation
};

struct RandomInstance {
  TaskDataset data;
  double lambda;
  Eigen::VectorXd h;
};

inline RandomInstance random_instance(SplitMix64& rng,
                                      const RandomInstanceOptions& opt = {}) {
  const int n = opt.n_min + static_cast<int>(rng.next() %
                    static_cast<std::uint64_t>(opt.n_max - opt.n_min + 1));
  const int d = opt.d_min + static_cast<int>(rng.next() %
                    static_cast<std::uint64_t>(opt.d_max - opt.d_min + 1));
  const LossKind kind = (opt.both_losses && rng.next() % 2 == 0) ? LossKind::Hinge
                                                                 : LossKind::Absolute;
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(d);
    do {
      for (int j = 0; j < d; ++j) x[j] = rng.gaussian();
    } while (opt.unit_sphere_rows && x.norm() < 1e-12);
    if (opt.unit_sphere_rows) x /= x.norm();
    X.row(i) = x;
  }
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i)
    y[i] = kind == LossKind::Absolute ? opt.label_scale * rng.gaussian()
                                      : (rng.uniform() < 0.5 ? -1.0 : 1.0);
  Eigen::VectorXd h(d);
  for (int j = 0; j < d; ++j) h[j] = opt.h_scale * rng.gaussian();

  const double lambda =
      std::pow(10.0, rng.uniform(opt.lambda_log_lo, opt.lambda_log_hi));
  return {TaskDataset(std::move(X), std::move(y), kind), lambda, std::move(h)};
}

}  // namespace biasltl
