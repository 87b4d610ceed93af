#include "qme/metrics.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>

using namespace qme;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace

TEST(EvalQuadratic, Examples) {
  EXPECT_DOUBLE_EQ(
      eval_quadratic(QuadraticMetric{vec({1, 0}), Matrix::Zero(2, 2)},
                     vec({0.7, 0.2})),
      0.7);
  EXPECT_DOUBLE_EQ(eval_quadratic(QuadraticMetric{vec({0, 0}),
                                                  -Matrix::Identity(2, 2)},
                                  vec({0.5, 0.5})),
                   -0.25);
  // Unnormalized qmean for k = 2; its dropped constant is 1 - 1 = 0.
  const QuadraticMetric q{Vector::Constant(2, 1.0), -Matrix::Identity(2, 2)};
  EXPECT_DOUBLE_EQ(eval_quadratic(q, vec({1, 1})), 1.0);
  EXPECT_THROW(eval_quadratic(q, vec({1, 1, 1})), Error);
}

TEST(EvalQuadratic, SymmetrizationInvariant) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int t = 0; t < 50; ++t) {
    Matrix B(3, 3);
    for (Eigen::Index i = 0; i < 9; ++i) B.data()[i] = n(rng);
    const Vector a = vec({n(rng), n(rng), n(rng)});
    const Vector r = vec({n(rng), n(rng), n(rng)});
    const Matrix sym = 0.5 * (B + B.transpose());
    EXPECT_NEAR(eval_quadratic(QuadraticMetric{a, B}, r),
                eval_quadratic(QuadraticMetric{a, sym}, r), 1e-12);
  }
}

TEST(ShiftQuadratic, Examples) {
  const Vector o = vec({0.5, 0.5});
  EXPECT_TRUE(shift_quadratic(QuadraticMetric{vec({1, 0}), Matrix::Zero(2, 2)}, o)
                  .d.isApprox(vec({1, 0})));
  const QuadraticMetric m{vec({0, 0}), -Matrix::Identity(2, 2)};
  const ShiftedQuadratic s = shift_quadratic(m, o);
  EXPECT_TRUE(s.d.isApprox(vec({-0.5, -0.5})));
  EXPECT_TRUE(unshift_quadratic(s, o).a.isApprox(m.a));
}

TEST(ShiftQuadratic, DifferenceIsConstant) {
  const QuadraticMetric m = random_metric(4, 9);
  const Vector o = Vector::Constant(4, 0.25);
  const ShiftedQuadratic s = shift_quadratic(m, o);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  const double base = eval_quadratic(m, o) - eval_shifted(s, o, o);
  for (int t = 0; t < 50; ++t) {
    Vector r(4);
    for (int i = 0; i < 4; ++i) r(i) = u(rng);
    EXPECT_NEAR(eval_quadratic(m, r) - eval_shifted(s, r, o), base, 1e-12);
  }
  const QuadraticMetric back = unshift_quadratic(s, o);
  EXPECT_LT((back.a - m.a).norm(), 1e-15);
}

TEST(EvalFair, Examples) {
  GroupModel gm{{vec({0.5, 0.5}), vec({0.5, 0.5})}};
  FairQuadraticMetric fm;
  fm.a = vec({1, 0});
  fm.groups = 2;
  fm.violations = {Matrix::Identity(2, 2) * std::sqrt(2.0)};
  fm.lambda = 1.0;
  Matrix same(2, 2);
  same << 0.3, 0.3, 0.8, 0.8;
  EXPECT_DOUBLE_EQ(eval_fair(fm, same, gm), 0.0);

  fm.lambda = 0.0;
  EXPECT_DOUBLE_EQ(eval_fair(fm, Matrix::Ones(2, 2), gm), 0.0);

  fm.lambda = 1.0;
  Matrix apart = Matrix::Zero(2, 2);
  apart(0, 0) = 1.0;
  EXPECT_NEAR(eval_fair(fm, apart, gm), std::sqrt(2.0) / 2, 1e-12);
  EXPECT_THROW(eval_fair(fm, Matrix::Zero(2, 3), gm), Error);
}

TEST(NamedMetric, Qmean) {
  const auto m = std::get<QuadraticMetric>(
      make_named_metric("qmean", RateSpace::diagonal(2)));
  EXPECT_TRUE(m.a.isApprox(vec({0.5, 0.5})));
  EXPECT_TRUE(m.B.isApprox(-0.5 * Matrix::Identity(2, 2)));
}

TEST(NamedMetric, EqualizedOdds) {
  const auto fm = std::get<FairQuadraticMetric>(
      make_named_metric("eo", RateSpace::diagonal(2), 2));
  EXPECT_TRUE(fm.violation(0, 1).isApprox(std::sqrt(2.0) *
                                          Matrix::Identity(2, 2)));
  EXPECT_NEAR(fm.a.norm(), 1.0, 1e-12);
}

TEST(NamedMetric, EqualOpportunityAndBalance) {
  const auto eopp = std::get<FairQuadraticMetric>(
      make_named_metric("eopp", RateSpace::diagonal(2), 2));
  const Matrix& b = eopp.violation(0, 1);
  EXPECT_GT(b(0, 0), 0.0);
  EXPECT_EQ(b(0, 1), 0.0);
  EXPECT_EQ(b(1, 0), 0.0);
  EXPECT_EQ(b(1, 1), 0.0);

  const auto bn = std::get<FairQuadraticMetric>(
      make_named_metric("bn", RateSpace::diagonal(2), 3));
  EXPECT_EQ(bn.violations.size(), 3u);
  EXPECT_GT(bn.violation(1, 2)(1, 1), 0.0);
  EXPECT_EQ(bn.violation(1, 2)(0, 0), 0.0);
  double total = 0.0;
  for (const Matrix& v : bn.violations) total += v.norm();
  EXPECT_NEAR(0.5 * total, 1.0, 1e-12);
}

TEST(NamedMetric, CoverageMatchesDirectExpansion) {
  const RateSpace space = RateSpace::general(3);
  const Vector pi = vec({0.2, 0.3, 0.5});
  const auto m =
      std::get<QuadraticMetric>(make_named_metric("coverage", space, 0, pi));
  // Direct coverage: cov_i = 1 - sum_{j != i} r_(i,j) + sum_{j != i} r_(j,i).
  auto idx = [](int i, int j) { return i * 2 + (j < i ? j : j - 1); };
  auto phi = [&](const Vector& r) {
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
      double cov = 1.0;
      for (int j = 0; j < 3; ++j) {
        if (j == i) continue;
        cov += r(idx(j, i)) - r(idx(i, j));
      }
      sum += (cov - pi(i)) * (cov - pi(i));
    }
    return -0.5 * sum;
  };
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 0.5);
  // Normalization rescales by a positive constant, so differences match up
  // to that constant.
  Vector r0 = Vector::Constant(6, 1.0 / 3);
  double scale = 0.0;
  for (int t = 0; t < 20; ++t) {
    Vector r(6);
    for (int i = 0; i < 6; ++i) r(i) = u(rng);
    const double direct = phi(r) - phi(r0);
    const double ours = eval_quadratic(m, r) - eval_quadratic(m, r0);
    if (std::abs(direct) < 1e-6) continue;
    if (scale == 0.0) scale = ours / direct;
    EXPECT_GT(scale, 0.0);
    EXPECT_NEAR(ours, scale * direct, 1e-10);
  }
  EXPECT_THROW(make_named_metric("coverage", space), Error);
  EXPECT_THROW(make_named_metric("coverage", RateSpace::diagonal(3), 0,
                                 vec({0.2, 0.3, 0.5})),
               Error);
}

TEST(NamedMetric, UnknownKind) {
  EXPECT_THROW(make_named_metric("f1", RateSpace::diagonal(2)), Error);
}

TEST(RandomMetric, DeterministicNormalizedRegular) {
  for (int k = 2; k <= 5; ++k) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const QuadraticMetric m = random_metric(k, seed, 1e-2);
      const QuadraticMetric again = random_metric(k, seed, 1e-2);
      EXPECT_EQ(m.a, again.a);
      EXPECT_EQ(m.B, again.B);
      EXPECT_NEAR(m.a.squaredNorm() + m.B.squaredNorm(), 1.0, 1e-9);
      EXPECT_LT((m.B - m.B.transpose()).cwiseAbs().maxCoeff(), 1e-12);
      Eigen::SelfAdjointEigenSolver<Matrix> es(m.B);
      EXPECT_LE(es.eigenvalues().maxCoeff(), 1e-10);
      const Vector d = m.a + m.B * Vector::Constant(k, 1.0 / k);
      EXPECT_GE(d.cwiseAbs().maxCoeff(), 1e-2);
    }
  }
  EXPECT_THROW(random_metric(2, 0, -1.0), Error);
}

TEST(RandomMetric, FairIsPsdAndNormalized) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FairQuadraticMetric fm = random_fair_metric(3, 3, seed);
    EXPECT_NEAR(fm.a.norm(), 1.0, 1e-12);
    EXPECT_GE(fm.a.minCoeff(), 0.0);
    EXPECT_GE(fm.lambda, 0.1);
    EXPECT_LE(fm.lambda, 0.9);
    double total = 0.0;
    for (const Matrix& b : fm.violations) {
      total += b.norm();
      Eigen::SelfAdjointEigenSolver<Matrix> es(b);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    }
    EXPECT_NEAR(0.5 * total, 1.0, 1e-9);
  }
  EXPECT_DOUBLE_EQ(random_fair_metric(2, 2, 1, 1e-2, 0.3).lambda, 0.3);
}

TEST(GroupModel, RandomSumsToOne) {
  const GroupModel gm = random_group_model(4, 3, 8);
  EXPECT_NO_THROW(validate(gm));
  Vector total = Vector::Zero(4);
  for (const Vector& t : gm.tau) total += t;
  EXPECT_LT((total.array() - 1.0).abs().maxCoeff(), 1e-12);
  GroupModel bad{{vec({0.5, 0.5}), vec({0.4, 0.5})}};
  EXPECT_THROW(validate(bad), Error);
}

TEST(MetricJson, RoundTrip) {
  const QuadraticMetric m = random_metric(3, 5);
  const MetricDocument doc = metric_from_json(to_json({m, std::nullopt}));
  const auto& back = std::get<QuadraticMetric>(doc.metric);
  EXPECT_TRUE(back.a.isApprox(m.a, 1e-15));
  EXPECT_TRUE(back.B.isApprox(m.B, 1e-15));

  const FairQuadraticMetric fm = random_fair_metric(2, 3, 5);
  const GroupModel gm = random_group_model(2, 3, 5);
  const MetricDocument fdoc = metric_from_json(to_json({fm, gm}));
  const auto& fback = std::get<FairQuadraticMetric>(fdoc.metric);
  ASSERT_EQ(fback.groups, 3);
  EXPECT_DOUBLE_EQ(fback.lambda, fm.lambda);
  for (std::size_t p = 0; p < fm.violations.size(); ++p) {
    EXPECT_TRUE(fback.violations[p].isApprox(fm.violations[p], 1e-15));
  }
  ASSERT_TRUE(fdoc.groups.has_value());
  EXPECT_TRUE(fdoc.groups->tau[2].isApprox(gm.tau[2], 1e-15));
}

TEST(MetricJson, ParsesLiteralFairDocument) {
  const MetricDocument doc = metric_from_json(R"({
    "type": "fair", "a": [1, 0], "lambda": 0.3,
    "B": {"1,2": [[1, 0], [0, 1]]}, "tau": [[0.5, 0.4], [0.5, 0.6]]})");
  const auto& fm = std::get<FairQuadraticMetric>(doc.metric);
  EXPECT_EQ(fm.groups, 2);
  EXPECT_DOUBLE_EQ(fm.lambda, 0.3);
  EXPECT_THROW(metric_from_json(R"({"type":"cubic","a":[1]})"), Error);
  EXPECT_THROW(metric_from_json("not json"), Error);
}

TEST(PairIndex, Lexicographic) {
  const auto pairs = group_pairs(4);
  ASSERT_EQ(pairs.size(), 6u);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    EXPECT_EQ(pair_index(4, pairs[p].first, pairs[p].second),
              static_cast<int>(p));
    EXPECT_EQ(pair_index(4, pairs[p].second, pairs[p].first),
              static_cast<int>(p));
  }
}
