#include "qme/experiments.hpp"
#include "qme/session.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace qme;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

SessionConfig quadratic_config(int k, double eps = 1e-2) {
  SessionConfig cfg;
  cfg.mode = SessionMode::kQuadratic;
  cfg.k = k;
  cfg.epsilon = eps;
  cfg.varrho = 0.02;
  return cfg;
}

// Answers every pending query with the given comparator until done.
template <typename Answer>
void drive(Session& s, Answer&& answer) {
  while (auto q = s.next_query()) s.answer(q->id, answer(*q));
}

}  // namespace

TEST(Session, FreshSessionHasElicitingQuery) {
  Session s(quadratic_config(2, kHumanTolerance));
  const auto q = s.next_query();
  ASSERT_TRUE(q.has_value());
  EXPECT_EQ(q->id, 0u);
  EXPECT_EQ(q->phase, Phase::kEliciting);
  EXPECT_EQ(q->left.rows(), 2);
  EXPECT_EQ(q->left.cols(), 1);
}

TEST(Session, DefaultToleranceIsHumanTolerance) {
  EXPECT_DOUBLE_EQ(SessionConfig{}.epsilon, 0.05);
}

TEST(Session, InvalidConfigsAreRejected) {
  SessionConfig cfg;
  cfg.k = 0;
  EXPECT_THROW(Session{cfg}, Error);
  cfg = {};
  cfg.priors = vec({0.5, 0.6});
  EXPECT_THROW(Session{cfg}, Error);
  cfg = {};
  cfg.mode = SessionMode::kFair;
  cfg.groups = 1;
  EXPECT_THROW(Session{cfg}, Error);
  cfg = {};
  cfg.rho = 0.6;
  EXPECT_THROW(Session{cfg}, Error);
}

TEST(Session, StaleAndDuplicateAnswersAreRejected) {
  Session s(quadratic_config(2));
  const auto q0 = s.next_query();
  EXPECT_THROW(s.answer(q0->id + 1, true), Error);
  s.answer(q0->id, true);
  const auto q1 = s.next_query();
  ASSERT_TRUE(q1.has_value());
  EXPECT_EQ(q1->id, q0->id + 1);
  try {
    s.answer(q0->id, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStaleQuery);
  }
  const auto again = s.next_query();
  EXPECT_EQ(again->id, q1->id);
  EXPECT_EQ(again->left, q1->left);
  EXPECT_EQ(s.transcript().count(), 1u);
}

TEST(Session, ResultBeforeDoneIsNotReady) {
  Session s(quadratic_config(2));
  try {
    s.result();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotReady);
  }
}

TEST(Session, ExactlyFifteenEvaluationQueriesThenDone) {
  const QuadraticMetric truth = random_metric(2, 3);
  SimulatedOracle oracle(truth);
  Session s(quadratic_config(2));
  int evaluation = 0;
  Phase last = Phase::kEliciting;
  while (auto q = s.next_query()) {
    EXPECT_GE(static_cast<int>(q->phase), static_cast<int>(last));
    last = q->phase;
    evaluation += q->phase == Phase::kEvaluating;
    s.answer(q->id, oracle.compare(q->left.col(0), q->right.col(0)) == 1);
  }
  EXPECT_EQ(evaluation, 15);
  EXPECT_EQ(s.phase(), Phase::kDone);
  EXPECT_FALSE(s.next_query().has_value());
  EXPECT_FALSE(s.next_query().has_value());
  EXPECT_THROW(s.answer(0, true), Error);
}

TEST(Session, LoopbackMatchesLibraryRun) {
  for (int k = 2; k <= 3; ++k) {
    const QuadraticMetric truth = random_metric(k, 11);
    SimulatedOracle answerer(truth);
    Session s(quadratic_config(k));
    drive(s, [&](const QueryView& q) {
      return answerer.compare(q.left.col(0), q.right.col(0)) == 1;
    });

    SimulatedOracle direct(truth);
    Transcript expected;
    TranscribingOracle recorded(direct, expected);
    const QpmeResult lib = qpme(quadratic_config(k).qpme(), recorded);

    EXPECT_EQ(s.transcript(), expected);
    const SessionResult r = s.result();
    ASSERT_TRUE(r.metric.has_value());
    const auto& m = std::get<QuadraticMetric>(r.metric->metric);
    EXPECT_EQ(m.a, lib.metric.a);
    EXPECT_EQ(m.B, lib.metric.B);
    EXPECT_EQ(r.elicitation_queries, lib.queries);
    EXPECT_EQ(r.evaluation_queries, 15u);
    EXPECT_DOUBLE_EQ(r.match, 100.0);
  }
}

TEST(Session, LinearLoopbackAndWeightString) {
  const QuadraticMetric truth{vec({0.875, 0.125}).normalized(), Matrix::Zero(2, 2)};
  SimulatedOracle answerer(truth);
  SessionConfig cfg;
  cfg.mode = SessionMode::kLinear;
  cfg.epsilon = 1e-3;
  cfg.priors = vec({0.35, 0.65});
  Session s(cfg);
  drive(s, [&](const QueryView& q) {
    return answerer.compare(q.left.col(0), q.right.col(0)) == 1;
  });
  SimulatedOracle direct(truth);
  Transcript expected;
  TranscribingOracle recorded(direct, expected);
  lpme(LpmeConfig{1e-3, 3, {Vector::Constant(2, 0.5), 0.2}}, recorded);
  EXPECT_EQ(s.transcript(), expected);
  const SessionResult r = s.result();
  EXPECT_DOUBLE_EQ(r.match, 100.0);
  EXPECT_EQ(weight_string(std::get<QuadraticMetric>(r.metric->metric)),
            "0.125 TN + 0.875 TP");
}

TEST(Session, FairLoopbackMatchesLibraryRun) {
  const FairQuadraticMetric fm = random_fair_metric(2, 2, 5, 1e-2, 0.5);
  const GroupModel gm = random_group_model(2, 2, 5);
  FairOracle answerer(fm, gm);
  SessionConfig cfg;
  cfg.mode = SessionMode::kFair;
  cfg.epsilon = 1e-2;
  cfg.tau = gm;
  Session s(cfg);
  drive(s, [&](const QueryView& q) { return answerer.compare(q.left, q.right) == 1; });

  FairOracle direct(fm, gm);
  Transcript expected;
  TranscribingGroupOracle recorded(direct, expected);
  FairConfig fc;
  fc.qpme = cfg.qpme();
  const FairResult lib = fair_qpme(fc, recorded, gm);
  EXPECT_EQ(s.transcript(), expected);
  const SessionResult r = s.result();
  const auto& m = std::get<FairQuadraticMetric>(r.metric->metric);
  EXPECT_EQ(m.a, lib.metric.a);
  EXPECT_EQ(m.lambda, lib.metric.lambda);
  EXPECT_DOUBLE_EQ(r.match, 100.0);
}

TEST(Session, ElicitationFailureEndsSessionWithError) {
  const FairQuadraticMetric fm = random_fair_metric(2, 2, 1, 1e-2, 0.0);
  const GroupModel gm = random_group_model(2, 2, 1);
  FairOracle answerer(fm, gm);
  SessionConfig cfg;
  cfg.mode = SessionMode::kFair;
  cfg.epsilon = 1e-2;
  cfg.tau = gm;
  Session s(cfg);
  drive(s, [&](const QueryView& q) { return answerer.compare(q.left, q.right) == 1; });
  const SessionResult r = s.result();
  EXPECT_FALSE(r.metric.has_value());
  EXPECT_NE(r.error.find("regularity"), std::string::npos);
  EXPECT_EQ(r.evaluation_queries, 0u);
}

TEST(Session, NoisyAnswererStillMatchesMostly) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const QuadraticMetric truth = random_linear_metric(2, seed);
    SimulatedOracle oracle(truth);
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution flip(0.2);
    SessionConfig cfg;
    cfg.mode = SessionMode::kLinear;
    cfg.seed = seed;
    Session s(cfg);
    drive(s, [&](const QueryView& q) {
      const bool truthful = oracle.compare(q.left.col(0), q.right.col(0)) == 1;
      return flip(rng) ? !truthful : truthful;
    });
    total += s.result().match;
  }
  EXPECT_GE(total / 50, 60.0);
}

TEST(Session, IndependentSessions) {
  SessionManager manager;
  const std::string a = manager.create(quadratic_config(2));
  const std::string b = manager.create(quadratic_config(2));
  EXPECT_NE(a, b);
  auto sa = manager.get(a);
  sa->answer(0, true);
  EXPECT_EQ(sa->transcript().count(), 1u);
  EXPECT_EQ(manager.get(b)->transcript().count(), 0u);
  EXPECT_EQ(manager.size(), 2u);
  try {
    manager.get("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

TEST(Rendering, BinaryCountsFromPriorsAndRates) {
  const ConfusionRendering c = render_confusion(vec({0.35, 0.65}), vec({0.8, 0.6}));
  EXPECT_DOUBLE_EQ(c.correct(0), 28.0);    // TP
  EXPECT_DOUBLE_EQ(c.incorrect(0), 7.0);   // FN
  EXPECT_DOUBLE_EQ(c.correct(1), 39.0);    // TN
  EXPECT_DOUBLE_EQ(c.incorrect(1), 26.0);  // FP
  EXPECT_DOUBLE_EQ(c.actual_totals(0), 35.0);
  EXPECT_DOUBLE_EQ(c.predicted_totals(0), 54.0);
  EXPECT_DOUBLE_EQ(c.predicted_totals(1), 46.0);
}

TEST(Rendering, RoundTripWithinRounding) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int c = 0; c < 300; ++c) {
    const int k = 2 + c % 4;
    Vector pi(k), r(k);
    for (int i = 0; i < k; ++i) {
      pi(i) = u(rng);
      r(i) = u(rng);
    }
    pi /= pi.sum();
    const ConfusionRendering view = render_confusion(pi, r);
    EXPECT_NEAR(view.correct.sum() + view.incorrect.sum(), 100.0, 0.05 * 2 * k);
    for (int i = 0; i < k; ++i) {
      const double total = view.correct(i) + view.incorrect(i);
      EXPECT_NEAR(total, 100.0 * pi(i), 0.5);
      EXPECT_NEAR(view.correct(i), 100.0 * pi(i) * r(i), 0.5);
    }
  }
}

TEST(Rendering, GroupPriors) {
  GroupModel gm;
  gm.tau = {vec({0.2, 0.6}), vec({0.8, 0.4})};
  const Vector p = group_priors(vec({0.5, 0.5}), gm, 0);
  EXPECT_NEAR(p(0), 0.25, 1e-15);
  EXPECT_NEAR(p(1), 0.75, 1e-15);
}

TEST(Rendering, WeightStringOnlyForBinaryLinear) {
  EXPECT_EQ(weight_string({vec({0.6, 0.4}), Matrix::Zero(2, 2)}), "0.400 TN + 0.600 TP");
  EXPECT_EQ(weight_string({vec({0.6, 0.4}), -Matrix::Identity(2, 2)}), "");
  EXPECT_EQ(weight_string({vec({0.6, 0.4, 0.1}), Matrix::Zero(3, 3)}), "");
}
