#include "biasltl/erm_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace biasltl {

namespace {

// Nudge u so that every scaled coordinate n*u_k sits inside the conjugate
// domain; u = z/n can land one ulp outside when z is at a boundary.
void make_dual_feasible(const TaskDataset& data, Eigen::VectorXd& u) {
  const double n = static_cast<double>(data.n());
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    int guard = 0;
    while (loss_conjugate(data.loss(), n * u[k], data.labels()[k]) == kInfinity &&
           guard++ < 8) {
      u[k] = std::nextafter(u[k], 0.0);
    }
  }
}

struct PolishResult {
  Eigen::VectorXd w;
  Eigen::VectorXd z;  // scaled dual
  double gap;
};

// Solve the KKT system for a guessed active set: examples whose prediction
// sits within tau of the loss kink keep a free multiplier constrained to the
// kink's subgradient interval, all others carry their fixed subgradient value.
std::optional<PolishResult> polish_attempt(const TaskDataset& data, double lambda,
                                           const BiasVector& h,
                                           const Eigen::VectorXd& w_ref, double tau) {
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();
  const double nn = static_cast<double>(n);
  const Eigen::VectorXd preds = data.inputs() * w_ref;

  std::vector<Eigen::Index> active;
  Eigen::VectorXd z(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double y = data.labels()[k];
    if (data.loss() == LossKind::Absolute) {
      const double r = preds[k] - y;
      if (std::abs(r) <= tau) {
        active.push_back(k);
        z[k] = 0.0;
      } else {
        z[k] = r > 0.0 ? 1.0 : -1.0;
      }
    } else {
      const double margin = 1.0 - y * preds[k];
      if (std::abs(margin) <= tau) {
        active.push_back(k);
        z[k] = 0.0;
      } else {
        z[k] = margin > 0.0 ? -y : 0.0;
      }
    }
  }

  Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
  for (Eigen::Index k = 0; k < n; ++k)
    if (z[k] != 0.0) s += z[k] * data.inputs().row(k).transpose();

  Eigen::VectorXd w;
  if (active.empty()) {
    w = h - s / (nn * lambda);
  } else {
    const Eigen::Index m = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd A(m, d);
    Eigen::VectorXd c(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      A.row(j) = data.inputs().row(active[j]);
      // both losses kink where the prediction equals the label
      c[j] = data.labels()[active[j]];
    }
    const Eigen::MatrixXd M = A * A.transpose();
    const Eigen::VectorXd rhs = nn * lambda * (A * h - c) - A * s;
    const Eigen::VectorXd beta = M.fullPivLu().solve(rhs);
    if (!beta.allFinite()) return std::nullopt;
    if ((M * beta - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) return std::nullopt;
    for (Eigen::Index j = 0; j < m; ++j) {
      const SubgradientInterval dom =
          conjugate_domain(data.loss(), data.labels()[active[j]]);
      if (beta[j] < dom.lo - 1e-9 || beta[j] > dom.hi + 1e-9) return std::nullopt;
      z[active[j]] = std::clamp(beta[j], dom.lo, dom.hi);
    }
    w = h - (s + A.transpose() * beta) / (nn * lambda);
  }

  const double gap = regularized_empirical_risk(data, lambda, h, w) +
                     dual_objective_scaled(data, lambda, h, z);
  if (!std::isfinite(gap)) return std::nullopt;
  return PolishResult{std::move(w), std::move(z), gap};
}

}  // namespace

ErmSolution fista_solve(const TaskDataset& data, double lambda, const BiasVector& h,
                        const FistaOptions& opts) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("fista_solve: lambda must be positive");
  if (h.size() != data.d())
    throw std::invalid_argument("fista_solve: bias dimension mismatch");
  const double radius = data.radius_bound();
  if (radius <= 0.0)
    throw std::invalid_argument("fista_solve: inputs are identically zero");

  const Eigen::Index n = data.n();
  const double nn = static_cast<double>(n);
  const Eigen::MatrixXd& X = data.inputs();
  const Eigen::VectorXd Xh = X * h;
  const double step = lambda / (nn * radius * radius);

  // All dual iterates are tracked in the scaled parametrization z = n*u so the
  // prox clamp keeps them exactly inside the conjugate domain.
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd p = z;
  double t = 1.0;

  Eigen::VectorXd w = h;
  double gap = regularized_empirical_risk(data, lambda, h, w) +
               dual_objective_scaled(data, lambda, h, z);
  int iters = 0;
  bool converged = gap < opts.gap_tolerance;

  while (!converged && iters < opts.max_iters) {
    ++iters;
    // scaled gradient step: n * (p/n - step * grad F(p/n))
    const Eigen::VectorXd grad = X * (X.transpose() * p) / (lambda * nn) - Xh;
    const Eigen::VectorXd v = p - (step * nn) * grad;
    Eigen::VectorXd z_next(n);
    for (Eigen::Index k = 0; k < n; ++k)
      z_next[k] = conjugate_prox(data.loss(), nn * step, v[k], data.labels()[k]);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    p = z_next + ((t - 1.0) / t_next) * (z_next - z);
    z = std::move(z_next);
    t = t_next;

    w = h - (X.transpose() * z) / (lambda * nn);
    gap = regularized_empirical_risk(data, lambda, h, w) +
          dual_objective_scaled(data, lambda, h, z);
    converged = gap < opts.gap_tolerance;
  }

  if (opts.polish) {
    const double rw = radius * std::sqrt(2.0 * std::max(gap, 0.0) / lambda);
    for (double tau : {2.0 * rw + 1e-12, 1e-5, 1e-8}) {
      const auto refined = polish_attempt(data, lambda, h, w, tau);
      if (refined && refined->gap <= gap) {
        w = refined->w;
        z = refined->z;
        gap = refined->gap;
      }
    }
    converged = gap < opts.gap_tolerance;
  }

  ErmSolution sol;
  sol.w = std::move(w);
  sol.u = z / nn;
  make_dual_feasible(data, sol.u);
  sol.gap = gap;
  sol.iters = iters;
  sol.converged = converged;
  return sol;
}

double meta_objective_value(const TaskDataset& data, double lambda,
                            const BiasVector& h, const FistaOptions& opts) {
  const ErmSolution sol = fista_solve(data, lambda, h, opts);
  if (!sol.converged)
    throw std::runtime_error("meta_objective_value: solver did not reach the gap tolerance");
  return regularized_empirical_risk(data, lambda, h, sol.w);
}

Eigen::VectorXd exact_meta_gradient(const TaskDataset& data, double lambda,
                                    const BiasVector& h, const FistaOptions& opts) {
  const ErmSolution sol = fista_solve(data, lambda, h, opts);
  if (!sol.converged)
    throw std::runtime_error("exact_meta_gradient: solver did not reach the gap tolerance");
  return -lambda * (sol.w - h);
}

}  // namespace biasltl
