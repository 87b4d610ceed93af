#include "qme/qpme.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace qme;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// Scale-free comparison of two (d, B) pairs.
double relative_gap(const ShiftedQuadratic& x, const ShiftedQuadratic& y) {
  const double nx = std::sqrt(x.d.squaredNorm() + x.B.squaredNorm());
  const double ny = std::sqrt(y.d.squaredNorm() + y.B.squaredNorm());
  return std::sqrt((x.d / nx - y.d / ny).squaredNorm() +
                   (x.B / nx - y.B / ny).squaredNorm());
}

QpmeConfig reference_config(double eps) {
  QpmeConfig cfg;
  cfg.rho = 0.2;
  cfg.varrho = 0.02;
  cfg.epsilon = eps;
  return cfg;
}

}  // namespace

TEST(QpmeCenters, Example) {
  const QpmeCenters c = qpme_centers(reference_config(1e-2), 2);
  EXPECT_TRUE(c.z[0].isApprox(vec({0.68, 0.5})));
  EXPECT_TRUE(c.z[1].isApprox(vec({0.5, 0.68})));
  EXPECT_TRUE(c.z_minus.isApprox(vec({0.32, 0.5})));
  for (const Vector& z : c.z) EXPECT_NEAR((z - c.o).norm() + 0.02, 0.2, 1e-15);
  QpmeConfig bad = reference_config(1e-2);
  bad.varrho = 0.2;
  EXPECT_THROW(qpme_centers(bad, 2), Error);
}

TEST(FindPivot, Examples) {
  const Vector o = vec({0.5, 0.5});
  // Shifted d = (1, 0) and d = (0, -1) expressed as linear metrics.
  SimulatedOracle first({vec({1, 0}), Matrix::Zero(2, 2)});
  EXPECT_EQ(find_pivot(first, reference_config(1e-2), 2).pivot, 0);
  SimulatedOracle second({vec({0, -1}), Matrix::Zero(2, 2)});
  const PivotProbe probe = find_pivot(second, reference_config(1e-2), 2);
  EXPECT_EQ(probe.pivot, 1);
  EXPECT_EQ(probe.queries, 4u);
  SimulatedOracle flat({vec({0, 0}), Matrix::Zero(2, 2)});
  try {
    find_pivot(flat, reference_config(1e-2), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAssumptionViolated);
  }
}

TEST(SolveCoefficients, WorkedExample) {
  // d = (1, 1), B = -I, delta = 0.1.
  SlopeSet s;
  s.f0 = vec({1, 1}).normalized();
  s.fj = {vec({0.9, 1}).normalized(), vec({1, 0.9}).normalized()};
  s.fneg = vec({1.1, 1}).normalized();
  const ShiftedQuadratic out = solve_coefficients(s, 0.1, 0);
  EXPECT_NEAR(out.d(0), 1.0, 1e-12);
  EXPECT_NEAR(out.d(1), 1.0, 1e-12);
  EXPECT_NEAR(out.B(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(out.B(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(out.B(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(out.B(1, 1), -1.0, 1e-12);
}

TEST(SolveCoefficients, ExactSlopeRoundTrip) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n;
  int checked = 0;
  for (int trial = 0; checked < 200; ++trial) {
    const Eigen::Index k = 2 + trial % 4;
    ShiftedQuadratic truth;
    truth.d.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) truth.d(i) = n(rng);
    Matrix M(k, k);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = n(rng);
    truth.B = -(M * M.transpose());
    const double scale = std::sqrt(truth.d.squaredNorm() + truth.B.squaredNorm());
    truth.d /= scale;
    truth.B /= scale;
    if (truth.d.cwiseAbs().maxCoeff() < 1e-2) continue;
    Eigen::Index pivot;
    truth.d.cwiseAbs().maxCoeff(&pivot);
    const double delta = 0.18;
    const SlopeSet slopes = exact_slopes(truth, delta, pivot);
    const Eigen::Index s = solve_partner(slopes, pivot);
    const double gap = std::abs(slopes.fneg(s) / slopes.fneg(pivot) -
                                slopes.fj[pivot](s) / slopes.fj[pivot](pivot));
    if (gap < 1e-3) continue;
    const ShiftedQuadratic out = solve_coefficients(slopes, delta, pivot);
    EXPECT_LE(relative_gap(out, truth), 1e-7) << "trial " << trial;
    EXPECT_GT(out.d.dot(truth.d), 0.0);
    EXPECT_EQ(out.B, out.B.transpose());
    ++checked;
  }
}

TEST(SolveCoefficients, ScaleInvariant) {
  ShiftedQuadratic truth{vec({0.3, -0.7, 0.2}), Matrix::Zero(3, 3)};
  truth.B << -1.0, 0.2, 0.1, 0.2, -0.8, 0.0, 0.1, 0.0, -0.5;
  const ShiftedQuadratic a = solve_coefficients(exact_slopes(truth, 0.1, 1), 0.1, 1);
  ShiftedQuadratic scaled{truth.d * 7.5, truth.B * 7.5};
  const ShiftedQuadratic b = solve_coefficients(exact_slopes(scaled, 0.1, 1), 0.1, 1);
  EXPECT_LT((a.d - b.d).norm(), 1e-12);
  EXPECT_LT((a.B - b.B).norm(), 1e-12);
}

TEST(SolveCoefficients, LinearMetricIsDegenerate) {
  const ShiftedQuadratic linear{vec({0.6, 0.8}), Matrix::Zero(2, 2)};
  try {
    solve_coefficients(exact_slopes(linear, 0.1, 0), 0.1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRegularityViolation);
    EXPECT_NE(std::string(e.what()).find("R"), std::string::npos);
  }
}

TEST(SolveCoefficients, ZeroPivotComponentIsDegenerate) {
  SlopeSet s;
  s.f0 = vec({0, 1});
  s.fj = {vec({0.6, 0.8}), vec({0.6, 0.8})};
  s.fneg = vec({0.8, 0.6});
  EXPECT_THROW(solve_coefficients(s, 0.1, 0), Error);
}

TEST(Qpme, RecoversRandomMetric) {
  const QuadraticMetric m = random_metric(2, 7, 1e-2);
  SimulatedOracle oracle(m);
  const QpmeResult r = qpme(reference_config(1e-3), oracle);
  const double c = 1.0 / std::sqrt(6.0);
  const double base_a = (Vector::Constant(2, c) - m.a).norm();
  const double base_b = (Matrix::Constant(2, 2, -c) - m.B).norm();
  EXPECT_LT((r.metric.a - m.a).norm() * 10, base_a);
  EXPECT_LT((r.metric.B - m.B).norm() * 10, base_b);
  EXPECT_NEAR(r.metric.a.squaredNorm() + r.metric.B.squaredNorm(), 1.0, 1e-9);
  EXPECT_EQ(r.metric.B, r.metric.B.transpose());
}

TEST(Qpme, NearlyLinearMetricGivesSmallB) {
  QuadraticMetric m{vec({0.6, 0.8}), Matrix::Zero(2, 2)};
  m.B << -0.04, -0.01, -0.01, -0.03;
  SimulatedOracle oracle(m);
  const QpmeResult r = qpme(reference_config(1e-3), oracle);
  EXPECT_LT(r.metric.B.norm(), 0.15);
}

TEST(Qpme, QueryTallyMatchesTranscript) {
  for (int k = 2; k <= 4; ++k) {
    SimulatedOracle inner(random_metric(k, 3));
    Transcript t;
    TranscribingOracle oracle(inner, t);
    const QpmeConfig cfg = reference_config(1e-2);
    const QpmeResult r = qpme(cfg, oracle);
    EXPECT_EQ(r.queries, t.count());
    const LpmeConfig lcfg{cfg.epsilon, cfg.cycles, {r.center, 0.02}};
    EXPECT_LE(r.queries,
              static_cast<std::size_t>(2 * k) + (k + 2) * lpme_query_bound(k, lcfg));
  }
}

TEST(Qpme, ErrorShrinksWithTolerance) {
  // Coarse tolerances can collapse two slopes onto one grid angle; such
  // seeds fail the regularity guard and are left out of every average.
  const std::vector<double> tolerances{1e-1, 1e-2, 1e-3};
  for (int k : {2, 3}) {
    std::vector<double> totals(tolerances.size(), 0.0);
    int used = 0;
    for (std::uint64_t seed = 0; used < 20; ++seed) {
      const QuadraticMetric m = random_metric(k, seed);
      std::vector<double> errors;
      try {
        for (double eps : tolerances) {
          SimulatedOracle oracle(m);
          errors.push_back((qpme(reference_config(eps), oracle).metric.a - m.a).norm());
        }
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::kRegularityViolation);
        continue;
      }
      for (std::size_t i = 0; i < errors.size(); ++i) totals[i] += errors[i];
      ++used;
    }
    for (std::size_t i = 1; i < totals.size(); ++i) {
      EXPECT_LE(totals[i] / used, totals[i - 1] / used + 1e-3)
          << "k=" << k << " eps=" << tolerances[i];
    }
  }
}
