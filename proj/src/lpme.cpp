#include "qme/lpme.hpp"

#include <cmath>
#include <numbers>

namespace qme {

namespace {

constexpr double kPi = std::numbers::pi;

int halvings(double epsilon) {
  int t = 0;
  for (double w = kPi / 2; w > epsilon; w /= 2) ++t;
  return t;
}

}  // namespace

void validate(const LpmeConfig& cfg) {
  require(cfg.epsilon > 0.0 && cfg.epsilon < kPi / 2,
          ErrorCode::kInvalidArgument, "lpme: epsilon must lie in (0, pi/2)");
  require(cfg.cycles >= 1, ErrorCode::kInvalidArgument,
          "lpme: cycles must be at least 1");
  require(cfg.sphere.radius > 0.0, ErrorCode::kInvalidArgument,
          "lpme: sphere radius must be positive");
  require(cfg.sphere.dim() >= 2, ErrorCode::kInvalidArgument,
          "lpme: need at least two coordinates");
}

Vector detect_orthant(const Sphere& s, RateOracle& oracle) {
  const Eigen::Index q = s.dim();
  require_same_size(oracle.dim(), q, "detect_orthant");
  const Vector all_positive =
      Vector::Constant(q, 1.0 / std::sqrt(static_cast<double>(q)));
  const Vector base = optimal_rate_on_sphere(all_positive, s);
  Vector signs(q);
  for (Eigen::Index i = 0; i < q; ++i) {
    Vector flipped = all_positive;
    flipped(i) = -flipped(i);
    // Ties (a zero weight) resolve to the positive side.
    signs(i) =
        oracle.compare(optimal_rate_on_sphere(flipped, s), base) == 1 ? -1.0
                                                                      : 1.0;
  }
  return signs;
}

int shrink_interval(Interval& iv, const PreferFn& prefer) {
  require(iv.lo < iv.hi, ErrorCode::kInvalidArgument,
          "shrink_interval: empty interval");
  const double w = iv.width();
  const double a = iv.lo;
  const double c = a + 0.25 * w;
  const double d = a + 0.5 * w;
  const double e = a + 0.75 * w;
  if (prefer(a, c) == 1) {
    iv.hi = d;
    return 1;
  }
  if (prefer(c, d) == 1) {
    iv.hi = d;
    return 2;
  }
  if (prefer(d, e) == 1) {
    iv.lo = c;
    iv.hi = e;
    return 3;
  }
  iv.lo = d;
  return 3;
}

Interval orthant_interval(const Vector& orthant, Eigen::Index j) {
  const Eigen::Index q = orthant.size();
  require(j >= 0 && j + 1 < q, ErrorCode::kInvalidArgument,
          "orthant_interval: angle index out of range");
  if (j + 2 < q) {
    return orthant(j) > 0 ? Interval{0.0, kPi / 2} : Interval{kPi / 2, kPi};
  }
  // The last angle carries the sign pair of the final two weights.
  const bool cos_pos = orthant(q - 2) > 0;
  const bool sin_pos = orthant(q - 1) > 0;
  if (cos_pos && sin_pos) return {0.0, kPi / 2};
  if (!cos_pos && sin_pos) return {kPi / 2, kPi};
  if (!cos_pos && !sin_pos) return {kPi, 3 * kPi / 2};
  return {3 * kPi / 2, 2 * kPi};
}

LpmeResult lpme(const LpmeConfig& cfg, RateOracle& oracle) {
  validate(cfg);
  const Eigen::Index q = cfg.sphere.dim();
  require_same_size(oracle.dim(), q, "lpme");

  LpmeResult result;
  result.orthant = detect_orthant(cfg.sphere, oracle);
  result.queries = static_cast<std::size_t>(q);

  Vector theta(q - 1);
  for (Eigen::Index j = 0; j + 1 < q; ++j) {
    theta(j) = orthant_interval(result.orthant, j).mid();
  }

  for (int cycle = 0; cycle < cfg.cycles; ++cycle) {
    for (Eigen::Index j = 0; j + 1 < q; ++j) {
      Interval iv = orthant_interval(result.orthant, j);
      const PreferFn prefer = [&](double x, double y) {
        Vector tx = theta, ty = theta;
        tx(j) = x;
        ty(j) = y;
        return oracle.compare(boundary_point(tx, cfg.sphere),
                              boundary_point(ty, cfg.sphere));
      };
      while (iv.width() > cfg.epsilon) {
        result.queries += static_cast<std::size_t>(shrink_interval(iv, prefer));
      }
      theta(j) = iv.mid();
    }
  }
  result.angles = theta;
  result.weights = angles_to_weights(theta);
  return result;
}

std::size_t lpme_query_bound(Eigen::Index q, const LpmeConfig& cfg) {
  return static_cast<std::size_t>(q) +
         3u * static_cast<std::size_t>(q - 1) *
             static_cast<std::size_t>(cfg.cycles) *
             static_cast<std::size_t>(halvings(cfg.epsilon));
}

}  // namespace qme
