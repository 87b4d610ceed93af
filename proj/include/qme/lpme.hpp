#pragma once

// Linear metric elicitation by coordinate-wise binary search over the
// hyperspherical angles of the weight vector.

#include "qme/geometry.hpp"
#include "qme/oracle.hpp"

#include <cstddef>
#include <functional>

namespace qme {

struct LpmeConfig {
  double epsilon = 1e-2;
  int cycles = 3;
  Sphere sphere;
};

void validate(const LpmeConfig& cfg);

/// Sign of each weight: -1 when the sphere optimum with coordinate i negated
/// beats the all-positive one, +1 otherwise. Issues exactly q queries.
Vector detect_orthant(const Sphere& s, RateOracle& oracle);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

/// prefer(x, y) = 1 when the candidate at parameter x beats the one at y.
using PreferFn = std::function<int(double, double)>;

/// Halves a unimodal search interval using at most three comparisons among
/// the endpoint and the quarter points. Returns the number of queries used.
int shrink_interval(Interval& iv, const PreferFn& prefer);

/// Angle interval of width pi/2 fixed by the orthant signs for angle j.
Interval orthant_interval(const Vector& orthant, Eigen::Index j);

struct LpmeResult {
  Vector weights;  ///< unit norm
  Vector angles;
  Vector orthant;
  std::size_t queries = 0;
};

LpmeResult lpme(const LpmeConfig& cfg, RateOracle& oracle);

/// Worst-case query count: q + 3 (q-1) cycles ceil(log2(pi / (2 eps))).
std::size_t lpme_query_bound(Eigen::Index q, const LpmeConfig& cfg);

}  // namespace qme
