#include "qme/qpme.hpp"

#include <cmath>
#include <string>

namespace qme {

namespace {

void guard(double denominator, const std::string& what) {
  require(std::abs(denominator) >= kRegularityGuard,
          ErrorCode::kRegularityViolation,
          "regularity violation: denominator of " + what + " is " +
              std::to_string(denominator));
}

// Smallest pivot component over all slopes that divide by it.
double pivot_margin(const SlopeSet& s, Eigen::Index p) {
  double margin = std::abs(s.f0(p));
  for (const Vector& f : s.fj) margin = std::min(margin, std::abs(f(p)));
  return margin;
}

}  // namespace

void validate(const QpmeConfig& cfg, Eigen::Index k) {
  require(k >= 2, ErrorCode::kInvalidArgument, "qpme: need k >= 2");
  const double varrho = cfg.inner_radius();
  require(cfg.rho > 0.0 && varrho > 0.0 && varrho < cfg.rho,
          ErrorCode::kInvalidArgument, "qpme: need 0 < varrho < rho");
  if (cfg.center) require_same_size(cfg.center->size(), k, "qpme center");
}

QpmeCenters qpme_centers(const QpmeConfig& cfg, Eigen::Index k,
                         Eigen::Index pivot) {
  validate(cfg, k);
  require(pivot >= 0 && pivot < k, ErrorCode::kInvalidArgument,
          "qpme: pivot out of range");
  QpmeCenters c;
  c.o = cfg.center ? *cfg.center
                   : Vector::Constant(k, 1.0 / static_cast<double>(k));
  const double delta = cfg.delta();
  for (Eigen::Index j = 0; j < k; ++j) {
    c.z.push_back(c.o + delta * Vector::Unit(k, j));
  }
  c.z_minus = c.o - delta * Vector::Unit(k, pivot);
  return c;
}

PivotProbe find_pivot(RateOracle& oracle, const QpmeConfig& cfg,
                      Eigen::Index k) {
  const QpmeCenters c = qpme_centers(cfg, k);
  PivotProbe probe;
  for (Eigen::Index i = 0; i < k; ++i) {
    const Vector moved = c.o + cfg.inner_radius() * Vector::Unit(k, i);
    ++probe.queries;
    if (oracle.compare(moved, c.o) == 1) {
      probe.pivot = i;
      return probe;
    }
    ++probe.queries;
    if (oracle.compare(c.o, moved) == 1) {
      probe.pivot = i;
      return probe;
    }
  }
  throw Error(ErrorCode::kAssumptionViolated,
              "assumption 2 violated: no coordinate responds at the center");
}

Eigen::Index solve_partner(const SlopeSet& slopes, Eigen::Index p) {
  const Eigen::Index k = slopes.f0.size();
  Eigen::Index best = p == 0 ? 1 : 0;
  double best_gap = -1.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (i == p) continue;
    const double gap = std::abs(slopes.fneg(i) / slopes.fneg(p) -
                                slopes.fj[p](i) / slopes.fj[p](p));
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

double solve_ratio(const SlopeSet& slopes, Eigen::Index p, Eigen::Index s) {
  auto F = [&](const Vector& f, Eigen::Index i) { return f(i) / f(p); };
  const double fm = F(slopes.fneg, s);
  const double fp = F(slopes.fj.at(static_cast<std::size_t>(p)), s);
  const double denom = fm - fp;
  guard(denom, "R (F^-_{s,p} - F_{s,p,p})");
  return (fm + fp - 2.0 * F(slopes.f0, s)) / denom;
}

ShiftedQuadratic solve_coefficients(const SlopeSet& slopes, double delta,
                                    Eigen::Index p) {
  const Eigen::Index k = slopes.f0.size();
  require(k >= 2, ErrorCode::kInvalidArgument, "solve: need k >= 2");
  require(static_cast<Eigen::Index>(slopes.fj.size()) == k,
          ErrorCode::kDimensionMismatch, "solve: need one slope per center");
  require_same_size(slopes.fneg.size(), k, "solve (reflected slope)");
  require(p >= 0 && p < k, ErrorCode::kInvalidArgument,
          "solve: pivot out of range");
  require(delta > 0.0, ErrorCode::kInvalidArgument,
          "solve: delta must be positive");

  guard(slopes.f0(p), "F_{i,p,0}");
  for (Eigen::Index l = 0; l < k; ++l) {
    require_same_size(slopes.fj[l].size(), k, "solve (slope)");
    guard(slopes.fj[l](p), "F_{i,p," + std::to_string(l + 1) + "}");
  }
  guard(slopes.fneg(p), "F^-_{i,p}");

  // F(i, l) = f_il / f_pl with l = 0 the center slope.
  auto F = [&](Eigen::Index i, Eigen::Index l) {
    const Vector& f = l < 0 ? slopes.f0 : slopes.fj[l];
    return f(i) / f(p);
  };
  auto Fc = [&](Eigen::Index i) { return F(i, -1); };

  const double R = solve_ratio(slopes, p, solve_partner(slopes, p));

  const double dp = slopes.f0(p) > 0.0 ? 1.0 : -1.0;
  ShiftedQuadratic out;
  out.d.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) out.d(i) = Fc(i) * dp;

  // Pivot first, then the rest in index order; entries with
  // position(j) <= position(i) are solved and mirrored.
  std::vector<Eigen::Index> order{p};
  for (Eigen::Index i = 0; i < k; ++i) {
    if (i != p) order.push_back(i);
  }
  out.B.resize(k, k);
  for (std::size_t pi = 0; pi < order.size(); ++pi) {
    for (std::size_t pj = 0; pj <= pi; ++pj) {
      const Eigen::Index i = order[pi];
      const Eigen::Index j = order[pj];
      const double value =
          (F(i, j) * (1.0 + F(j, p) * (1.0 + R) - Fc(j)) - Fc(i)) * dp / delta;
      out.B(i, j) = value;
      out.B(j, i) = value;
    }
  }
  return out;
}

SlopeSet exact_slopes(const ShiftedQuadratic& s, double delta,
                      Eigen::Index pivot) {
  const Eigen::Index k = s.d.size();
  SlopeSet slopes;
  slopes.f0 = s.d.normalized();
  for (Eigen::Index j = 0; j < k; ++j) {
    slopes.fj.push_back((s.d + delta * s.B.col(j)).normalized());
  }
  slopes.fneg = (s.d - delta * s.B.col(pivot)).normalized();
  return slopes;
}

QpmeResult qpme(const QpmeConfig& cfg, RateOracle& oracle) {
  const Eigen::Index k = oracle.dim();
  validate(cfg, k);
  QpmeResult result;

  const PivotProbe probe = find_pivot(oracle, cfg, k);
  result.queries += probe.queries;

  const QpmeCenters base = qpme_centers(cfg, k);
  result.center = base.o;
  const double varrho = cfg.inner_radius();
  auto local_slope = [&](const Vector& center) {
    const LpmeResult r =
        lpme(LpmeConfig{cfg.epsilon, cfg.cycles, {center, varrho}}, oracle);
    result.queries += r.queries;
    return r.weights;
  };

  result.slopes.f0 = local_slope(base.o);
  for (const Vector& z : base.z) result.slopes.fj.push_back(local_slope(z));

  // The responsive coordinate gates the run; the solve pivots on the
  // coordinate whose slope components stay farthest from zero.
  Eigen::Index pivot = probe.pivot;
  double best = pivot_margin(result.slopes, pivot);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double margin = pivot_margin(result.slopes, i);
    if (margin > best) {
      best = margin;
      pivot = i;
    }
  }
  result.pivot = pivot;
  result.slopes.fneg = local_slope(qpme_centers(cfg, k, pivot).z_minus);

  result.shifted = solve_coefficients(result.slopes, cfg.delta(), pivot);
  result.partner = solve_partner(result.slopes, pivot);
  QuadraticMetric raw = unshift_quadratic(result.shifted, base.o);
  raw.B = 0.5 * (raw.B + raw.B.transpose());
  result.metric = normalize_joint(std::move(raw));
  return result;
}

}  // namespace qme
