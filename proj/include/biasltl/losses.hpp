#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace biasltl {

// Piecewise-linear losses on a scalar prediction. Both are 1-Lipschitz in the
// prediction argument; the hinge loss additionally requires labels in {-1,+1}
// (validated once, at dataset construction).
enum class LossKind { Absolute, Hinge };

inline constexpr double kLossLipschitz = 1.0;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline bool label_valid(LossKind kind, double y) {
  if (kind == LossKind::Hinge) return y == 1.0 || y == -1.0;
  return std::isfinite(y);
}

// Closed subdifferential interval [lo, hi]; a singleton where the loss is
// differentiable.
struct SubgradientInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double u, double tol = 0.0) const {
    return u >= lo - tol && u <= hi + tol;
  }
  double distance(double u) const {
    if (u < lo) return lo - u;
    if (u > hi) return u - hi;
    return 0.0;
  }
};

inline double loss_value(LossKind kind, double yhat, double y) {
  if (kind == LossKind::Absolute) return std::abs(yhat - y);
  return std::max(0.0, 1.0 - y * yhat);
}

inline SubgradientInterval loss_subgradient(LossKind kind, double yhat, double y) {
  if (kind == LossKind::Absolute) {
    if (yhat > y) return {1.0, 1.0};
    if (yhat < y) return {-1.0, -1.0};
    return {-1.0, 1.0};
  }
  const double margin = 1.0 - y * yhat;
  if (margin > 0.0) return {-y, -y};
  if (margin < 0.0) return {0.0, 0.0};
  return {std::min(-y, 0.0), std::max(-y, 0.0)};
}

// Deterministic selection: 0 whenever admissible, otherwise the endpoint of
// smaller magnitude. Kinks are measure-zero events; a fixed choice keeps the
// primal and primal-dual within-task solvers in lockstep.
inline double pick_subgradient(const SubgradientInterval& iv) {
  if (iv.lo <= 0.0 && 0.0 <= iv.hi) return 0.0;
  return std::abs(iv.lo) <= std::abs(iv.hi) ? iv.lo : iv.hi;
}

// Domain of the Fenchel conjugate, as an interval.
inline SubgradientInterval conjugate_domain(LossKind kind, double y) {
  if (kind == LossKind::Absolute) return {-1.0, 1.0};
  return {std::min(-y, 0.0), std::max(-y, 0.0)};
}

// Fenchel conjugate l_y*(u); +inf outside the indicator domain.
//   absolute: u*y on [-1, 1]
//   hinge:    u/y on u/y in [-1, 0]
inline double loss_conjugate(LossKind kind, double u, double y) {
  if (kind == LossKind::Absolute) {
    if (u < -1.0 || u > 1.0) return kInfinity;
    return u * y;
  }
  const double r = u / y;
  if (r < -1.0 || r > 0.0) return kInfinity;
  return r;
}

// prox of (1/eta) l_y at a: the unique minimizer of (1/eta) l_y(p) + (p-a)^2/2.
inline double loss_prox(LossKind kind, double eta, double a, double y) {
  if (!(eta > 0.0)) throw std::invalid_argument("loss_prox: eta must be positive");
  if (kind == LossKind::Absolute) {
    const double inv = 1.0 / eta;
    if (a - y > inv) return a - inv;
    if (a - y < -inv) return a + inv;
    return y;
  }
  const double ya = y * a;  // y*y = 1
  if (ya > 1.0) return a;
  if (ya < 1.0 - 1.0 / eta) return a + y / eta;
  return 1.0 / y;
}

// prox of eta*l_y* at a, through Moreau's identity
//   prox_{eta l*}(a) = a - eta prox_{(1/eta) l}(a/eta),
// clamped onto the conjugate domain to absorb rounding.
inline double conjugate_prox(LossKind kind, double eta, double a, double y) {
  if (!(eta > 0.0)) throw std::invalid_argument("conjugate_prox: eta must be positive");
  const double p = a - eta * loss_prox(kind, eta, a / eta, y);
  const SubgradientInterval dom = conjugate_domain(kind, y);
  return std::clamp(p, dom.lo, dom.hi);
}

}  // namespace biasltl
