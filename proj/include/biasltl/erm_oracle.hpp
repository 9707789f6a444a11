#pragma once

#include <Eigen/Core>

#include "biasltl/task_data.hpp"

namespace biasltl {

// Minimizer of the biased regularized empirical risk, computed by accelerated
// proximal gradient (FISTA) on the dual problem, certified by the duality gap.
struct ErmSolution {
  Eigen::VectorXd w;    // primal minimizer
  Eigen::VectorXd u;    // dual vector, feasible for the conjugate domain
  double gap = 0.0;     // Phi_h(w) + Psi_h(u) at exit
  int iters = 0;        // FISTA iterations performed before any refinement
  bool converged = false;  // gap < gap_tolerance at exit
};

struct FistaOptions {
  int max_iters = 2000;
  double gap_tolerance = 1e-6;
  // After the gap-based stop, solve the KKT system of the detected active set
  // and keep the result when it improves the gap. Gives solutions accurate to
  // machine precision on non-degenerate instances; silently falls back
  // otherwise.
  bool polish = true;
};

// Dual FISTA with step lambda / (n R^2); smooth part
//   F_h(u) = ||X^T u||^2 / (2 lambda) - <X h, u>,
// proximable part G(u) = (1/n) sum_k l_k*(n u_k), primal recovered through
// the KKT map. Stops when the duality gap falls below gap_tolerance, or at
// max_iters with converged=false (the caller decides what to do with the
// capped iterate).
ErmSolution fista_solve(const TaskDataset& data, double lambda, const BiasVector& h,
                        const FistaOptions& opts = {});

// L(h) = min_w Phi_h(w), evaluated at the solver's primal point; accurate to
// the gap tolerance. Throws on non-convergence.
double meta_objective_value(const TaskDataset& data, double lambda,
                            const BiasVector& h, const FistaOptions& opts = {});

// grad L(h) = -lambda (w_h - h). Throws on non-convergence.
Eigen::VectorXd exact_meta_gradient(const TaskDataset& data, double lambda,
                                    const BiasVector& h, const FistaOptions& opts = {});

}  // namespace biasltl
