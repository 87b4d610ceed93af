#pragma once

// Quadratic metric elicitation: local linear elicitation at the center o, at
// the shifted centers z_j = o + (rho - varrho) alpha_j and at one reflected
// center, followed by a closed-form solve for (d, B).

#include "qme/lpme.hpp"
#include "qme/metrics.hpp"
#include "qme/oracle.hpp"

#include <optional>
#include <vector>

namespace qme {

struct QpmeConfig {
  double rho = 0.2;
  std::optional<double> varrho;  ///< defaults to rho / 10
  double epsilon = 1e-2;
  int cycles = 3;
  std::optional<Vector> center;  ///< defaults to the uniform rate

  double inner_radius() const { return varrho ? *varrho : rho / 10.0; }
  double delta() const { return rho - inner_radius(); }
};

void validate(const QpmeConfig& cfg, Eigen::Index k);

struct QpmeCenters {
  Vector o;
  std::vector<Vector> z;  ///< z_j = o + delta alpha_j
  Vector z_minus;         ///< o - delta alpha_pivot
};

QpmeCenters qpme_centers(const QpmeConfig& cfg, Eigen::Index k,
                         Eigen::Index pivot = 0);

/// First coordinate whose trivial queries (o + varrho alpha_i vs o, both
/// orders) show a strict preference. At most 2k queries.
struct PivotProbe {
  Eigen::Index pivot = 0;
  std::size_t queries = 0;
};
PivotProbe find_pivot(RateOracle& oracle, const QpmeConfig& cfg,
                      Eigen::Index k);

/// Unit slopes from local linear elicitation.
struct SlopeSet {
  Vector f0;               ///< at o
  std::vector<Vector> fj;  ///< at z_1..z_k
  Vector fneg;             ///< at the reflected center o - delta alpha_pivot
};

/// Threshold below which a ratio denominator is treated as degenerate.
inline constexpr double kRegularityGuard = 1e-8;

/// Coordinate i != pivot maximizing |F^-_i - F_{i,pivot}|.
Eigen::Index solve_partner(const SlopeSet& slopes, Eigen::Index pivot);

/// Ratio R relating the reflected and shifted slopes through partner s.
double solve_ratio(const SlopeSet& slopes, Eigen::Index pivot,
                   Eigen::Index partner);

/// Recovers (d, B) up to a positive scale with d_pivot = +-1.
ShiftedQuadratic solve_coefficients(const SlopeSet& slopes, double delta,
                                    Eigen::Index pivot);

/// Noise-free slopes of a known shifted quadratic, for testing and
/// diagnostics.
SlopeSet exact_slopes(const ShiftedQuadratic& s, double delta,
                      Eigen::Index pivot);

struct QpmeResult {
  QuadraticMetric metric;    ///< jointly normalized (a, B)
  ShiftedQuadratic shifted;  ///< unnormalized solve output around o
  SlopeSet slopes;
  Vector center;
  Eigen::Index pivot = 0;
  Eigen::Index partner = 0;
  std::size_t queries = 0;
};

QpmeResult qpme(const QpmeConfig& cfg, RateOracle& oracle);

}  // namespace qme
