#pragma once

// Rate-space primitives: the uniform random rate, the hyperspherical
// parameterization of unit weight vectors, sphere optima, and construction of
// a query sphere inside the hull of achievable rates.

#include "qme/types.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace qme {

enum class RateKind { kDiagonal, kGeneral };

/// Space of predictive rates for a k-class problem. Diagonal rates have one
/// coordinate per class; general rates hold the k*k-k off-diagonal entries of
/// the rate matrix in row-major order.
struct RateSpace {
  RateKind kind = RateKind::kDiagonal;
  int classes = 2;
  /// Optional achievable rates whose convex hull is the feasible region.
  std::vector<Vector> vertices;

  static RateSpace diagonal(int k) { return {RateKind::kDiagonal, k, {}}; }
  static RateSpace general(int k) { return {RateKind::kGeneral, k, {}}; }

  Eigen::Index dim() const {
    return kind == RateKind::kDiagonal ? classes : classes * (classes - 1);
  }
};

template <typename Scalar>
struct BasicSphere {
  Vec<Scalar> center;
  Scalar radius{};

  Eigen::Index dim() const { return center.size(); }
};

using Sphere = BasicSphere<double>;

/// Rate of the classifier that predicts every class with probability 1/k.
Vector uniform_rate(const RateSpace& space);

/// True when every axis-extreme point of the sphere stays inside [0,1]^q.
template <typename Scalar>
bool sphere_in_unit_box(const BasicSphere<Scalar>& s) {
  if (!(s.radius > Scalar(0))) return false;
  return ((s.center.array() - s.radius) >= Scalar(0)).all() &&
         ((s.center.array() + s.radius) <= Scalar(1)).all();
}

/// Angle bounds: all angles in [0, pi] except the last (primary) one, which
/// lives in [0, 2 pi].
template <typename Derived>
bool valid_angles(const Eigen::MatrixBase<Derived>& theta) {
  using Scalar = typename Derived::Scalar;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Eigen::Index n = theta.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar hi = (i + 1 == n) ? Scalar(2) * pi : pi;
    if (!(theta(i) >= Scalar(0) && theta(i) <= hi)) return false;
  }
  return true;
}

/// a_i = (prod_{j<i} sin theta_j) cos theta_i, last entry the full sine
/// product. The result always has unit norm.
template <typename Derived>
Vec<typename Derived::Scalar> angles_to_weights(
    const Eigen::MatrixBase<Derived>& theta) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index q = theta.size() + 1;
  Vec<Scalar> a(q);
  Scalar sine_product(1);
  for (Eigen::Index i = 0; i + 1 < q; ++i) {
    a(i) = sine_product * std::cos(theta(i));
    sine_product *= std::sin(theta(i));
  }
  a(q - 1) = sine_product;
  return a;
}

/// Inverse of angles_to_weights. Scale is ignored; zero vectors are rejected.
template <typename Derived>
Vec<typename Derived::Scalar> weights_to_angles(
    const Eigen::MatrixBase<Derived>& weights) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index q = weights.size();
  require(q >= 2, ErrorCode::kInvalidArgument,
          "weights_to_angles: need at least two weights");
  const Scalar norm = weights.norm();
  require(norm > Scalar(0), ErrorCode::kInvalidArgument,
          "weights_to_angles: zero-norm weight vector");
  const Vec<Scalar> a = weights / norm;

  Vec<Scalar> theta(q - 1);
  for (Eigen::Index i = 0; i + 2 < q; ++i) {
    theta(i) = std::atan2(a.tail(q - i - 1).norm(), a(i));
  }
  Scalar last = std::atan2(a(q - 1), a(q - 2));
  if (last < Scalar(0)) last += Scalar(2) * std::numbers::pi_v<Scalar>;
  theta(q - 2) = last;
  return theta;
}

/// Maximizer of <a, r> over the sphere: center + radius * a.
template <typename Derived, typename Scalar>
Vec<Scalar> optimal_rate_on_sphere(const Eigen::MatrixBase<Derived>& a,
                                   const BasicSphere<Scalar>& s) {
  require_same_size(a.size(), s.center.size(), "optimal_rate_on_sphere");
  require(std::abs(a.norm() - Scalar(1)) <= Scalar(1e-9),
          ErrorCode::kInvalidArgument,
          "optimal_rate_on_sphere: weight vector must have unit norm");
  return s.center + s.radius * a;
}

/// Boundary parameterization mu(theta) of the sphere.
template <typename Derived, typename Scalar>
Vec<Scalar> boundary_point(const Eigen::MatrixBase<Derived>& theta,
                           const BasicSphere<Scalar>& s) {
  return s.center + s.radius * angles_to_weights(theta);
}

/// Tolerance used by hull membership and axis-extent searches.
inline constexpr double kHullTolerance = 1e-8;

/// Whether p is a convex combination of the space's vertices.
bool hull_contains(const RateSpace& space, const Vector& p);

/// Largest ball centered at the uniform rate inside the cross-polytope spanned
/// by the per-axis extents of the vertex hull. Throws kNoInteriorSphere when
/// the uniform rate is not interior.
Sphere find_sphere(const RateSpace& space);

/// Per-axis extents c_j found by find_sphere (exposed for diagnostics).
Vector axis_extents(const RateSpace& space);

/// {"kind":"diagonal"|"general","k":K,"vertices":[[...],...]}
RateSpace rate_space_from_json(const std::string& text);
RateSpace load_rate_space(const std::string& path);

}  // namespace qme
