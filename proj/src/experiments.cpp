#include "qme/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace qme {

TrialMode parse_trial_mode(const std::string& name) {
  if (name == "linear") return TrialMode::kLinear;
  if (name == "quadratic") return TrialMode::kQuadratic;
  if (name == "fair") return TrialMode::kFair;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode: " + name);
}

std::string to_string(TrialMode mode) {
  switch (mode) {
    case TrialMode::kLinear:
      return "linear";
    case TrialMode::kQuadratic:
      return "quadratic";
    case TrialMode::kFair:
      return "fair";
  }
  return "quadratic";
}

QpmeConfig TrialConfig::qpme() const {
  QpmeConfig q;
  q.rho = rho;
  q.varrho = varrho;
  q.epsilon = epsilon;
  return q;
}

std::size_t TrialReport::failures() const {
  return static_cast<std::size_t>(std::count_if(
      trials.begin(), trials.end(), [](const TrialRecord& t) { return !t.ok; }));
}

double TrialReport::mean(double TrialRecord::*field) const {
  double total = 0.0;
  std::size_t n = 0;
  for (const TrialRecord& t : trials) {
    if (!t.ok || std::isnan(t.*field)) continue;
    total += t.*field;
    ++n;
  }
  return n == 0 ? kNan : total / static_cast<double>(n);
}

double TrialReport::mean_queries() const {
  double total = 0.0;
  std::size_t n = 0;
  for (const TrialRecord& t : trials) {
    if (!t.ok) continue;
    total += static_cast<double>(t.queries);
    ++n;
  }
  return n == 0 ? kNan : total / static_cast<double>(n);
}

QuadraticMetric baseline_equal_weights(int k) {
  require(k >= 2, ErrorCode::kInvalidArgument, "baseline: need k >= 2");
  return normalize_joint(
      QuadraticMetric{Vector::Ones(k), -Matrix::Ones(k, k)});
}

QuadraticMetric random_linear_metric(int k, std::uint64_t seed) {
  require(k >= 2, ErrorCode::kInvalidArgument, "random_linear_metric: k >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector a(k);
  do {
    for (int i = 0; i < k; ++i) a(i) = normal(rng);
  } while (a.norm() == 0.0);
  return {a.normalized(), Matrix::Zero(k, k)};
}

namespace {

NoiseConfig trial_noise(const NoiseConfig& base, std::uint64_t seed) {
  NoiseConfig noise = base;
  noise.seed = base.seed * 0x9E3779B97F4A7C15ULL + seed;
  return noise;
}

TrialRecord run_trial(const TrialConfig& cfg, std::uint64_t seed) {
  TrialRecord rec;
  rec.seed = seed;
  try {
    const QpmeConfig q = cfg.qpme();
    switch (cfg.mode) {
      case TrialMode::kLinear: {
        const QuadraticMetric truth = random_linear_metric(cfg.k, seed);
        SimulatedOracle oracle(truth, trial_noise(cfg.noise, seed));
        const Sphere ball{Vector::Constant(cfg.k, 1.0 / cfg.k), cfg.rho};
        const LpmeResult r = lpme(LpmeConfig{cfg.epsilon, q.cycles, ball}, oracle);
        rec.queries = r.queries;
        rec.a_error = (r.weights - truth.a).norm();
        rec.baseline_a_error =
            (Vector::Constant(cfg.k, 1.0 / std::sqrt(cfg.k)) - truth.a).norm();
        break;
      }
      case TrialMode::kQuadratic: {
        const QuadraticMetric truth =
            random_metric(cfg.k, seed, cfg.regularity_floor);
        SimulatedOracle oracle(truth, trial_noise(cfg.noise, seed));
        const QpmeResult r = qpme(q, oracle);
        rec.queries = r.queries;
        rec.a_error = (r.metric.a - truth.a).norm();
        rec.B_error = (r.metric.B - truth.B).norm();
        const QuadraticMetric base = baseline_equal_weights(cfg.k);
        rec.baseline_a_error = (base.a - truth.a).norm();
        rec.baseline_B_error = (base.B - truth.B).norm();
        break;
      }
      case TrialMode::kFair: {
        const FairQuadraticMetric truth = random_fair_metric(
            cfg.k, cfg.groups, seed, cfg.regularity_floor, cfg.lambda);
        const GroupModel gm = random_group_model(cfg.k, cfg.groups, seed);
        FairOracle oracle(truth, gm, trial_noise(cfg.noise, seed));
        FairConfig fc;
        fc.qpme = q;
        fc.lambda_check = cfg.lambda_check;
        const FairResult r = fair_qpme(fc, oracle, gm);
        rec.queries = r.queries;
        rec.lambda = truth.lambda;
        rec.a_error = (r.metric.a - truth.a).norm();
        rec.B_error = 0.0;
        for (std::size_t p = 0; p < truth.violations.size(); ++p) {
          rec.B_error += (r.metric.violations[p] - truth.violations[p]).norm();
        }
        rec.lambda_error = std::abs(r.metric.lambda - truth.lambda);
        if (r.lambda_search) {
          rec.lambda_search_error = std::abs(*r.lambda_search - truth.lambda);
        }
        break;
      }
    }
  } catch (const Error& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 0) {
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  threads = std::min(threads, std::max(n, 1));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

TrialReport run_trials(const TrialConfig& cfg) {
  require(cfg.trials >= 0, ErrorCode::kInvalidArgument,
          "run_trials: negative trial count");
  require(cfg.k >= 2, ErrorCode::kInvalidArgument, "run_trials: need k >= 2");
  require(cfg.mode != TrialMode::kFair || cfg.groups >= 2,
          ErrorCode::kInvalidArgument, "run_trials: need at least two groups");
  validate(cfg.qpme(), cfg.k);

  TrialReport report;
  report.config = cfg;
  report.trials.resize(static_cast<std::size_t>(cfg.trials));
  parallel_for(cfg.trials, cfg.threads, [&](int i) {
    report.trials[static_cast<std::size_t>(i)] =
        run_trial(cfg, cfg.first_seed + static_cast<std::uint64_t>(i));
  });
  return report;
}

double ndcg(const Vector& true_scores, const Vector& pred_scores) {
  require_same_size(pred_scores.size(), true_scores.size(), "ndcg");
  const Eigen::Index n = true_scores.size();
  if (n == 0) return 1.0;
  const double lo = true_scores.minCoeff();
  const double span = true_scores.maxCoeff() - lo;
  Vector gain(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double rel = span > 0.0 ? (true_scores(i) - lo) / span : 1.0;
    gain(i) = std::exp2(rel) - 1.0;
  }
  auto dcg = [&](const Vector& scores) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) {
      return scores(x) > scores(y);
    });
    double total = 0.0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      total += gain(order[pos]) / std::log2(static_cast<double>(pos) + 2.0);
    }
    return total;
  };
  const double ideal = dcg(true_scores);
  return ideal > 0.0 ? dcg(pred_scores) / ideal : 1.0;
}

double kendall_tau(const Vector& true_scores, const Vector& pred_scores) {
  require_same_size(pred_scores.size(), true_scores.size(), "kendall_tau");
  const Eigen::Index n = true_scores.size();
  double concordant = 0.0, discordant = 0.0, ties_true = 0.0, ties_pred = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dt = true_scores(i) - true_scores(j);
      const double dp = pred_scores(i) - pred_scores(j);
      if (dt == 0.0 && dp == 0.0) continue;
      if (dt == 0.0) {
        ties_true += 1.0;
      } else if (dp == 0.0) {
        ties_pred += 1.0;
      } else if ((dt > 0.0) == (dp > 0.0)) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  const double denom = std::sqrt((concordant + discordant + ties_true) *
                                 (concordant + discordant + ties_pred));
  return denom > 0.0 ? (concordant - discordant) / denom : 1.0;
}

std::vector<Vector> sample_ball(const Sphere& ball, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const Eigen::Index q = ball.dim();
  std::vector<Vector> points;
  points.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) {
    Vector dir(q);
    do {
      for (Eigen::Index j = 0; j < q; ++j) dir(j) = normal(rng);
    } while (dir.norm() == 0.0);
    const double r =
        ball.radius * std::pow(unit(rng), 1.0 / static_cast<double>(q));
    points.push_back(ball.center + r * dir.normalized());
  }
  return points;
}

std::vector<RankingRow> ranking_experiment(
    const Vector& true_scores,
    const std::vector<std::pair<std::string, Vector>>& candidates) {
  std::vector<RankingRow> rows;
  for (const auto& [name, scores] : candidates) {
    rows.push_back({name, ndcg(true_scores, scores),
                    kendall_tau(true_scores, scores)});
  }
  return rows;
}

namespace {

using Candidates = std::vector<std::pair<std::string, Vector>>;

template <typename ScoreFn>
Vector score_pool(const std::vector<Vector>& pool, ScoreFn&& score) {
  Vector out(static_cast<Eigen::Index>(pool.size()));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = score(pool[i]);
  }
  return out;
}

// Mean of per-trial rows, keyed by method order of the first trial.
std::vector<RankingRow> average_rows(
    const std::vector<std::vector<RankingRow>>& per_trial) {
  std::vector<RankingRow> mean;
  std::size_t n = 0;
  for (const auto& rows : per_trial) {
    if (rows.empty()) continue;
    if (mean.empty()) {
      for (const auto& r : rows) mean.push_back({r.method, 0.0, 0.0});
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      mean[i].ndcg += rows[i].ndcg;
      mean[i].kendall += rows[i].kendall;
    }
    ++n;
  }
  for (auto& r : mean) {
    r.ndcg /= static_cast<double>(n);
    r.kendall /= static_cast<double>(n);
  }
  return mean;
}

template <typename TrialFn>
std::vector<RankingRow> ranking_trials(const RankingConfig& cfg,
                                       TrialFn&& trial) {
  require(cfg.trials >= 1 && cfg.pool >= 2, ErrorCode::kInvalidArgument,
          "ranking: need at least one trial and two pool members");
  std::vector<std::vector<RankingRow>> rows(static_cast<std::size_t>(cfg.trials));
  parallel_for(cfg.trials, 0, [&](int i) {
    const std::uint64_t seed = cfg.first_seed + static_cast<std::uint64_t>(i);
    try {
      rows[static_cast<std::size_t>(i)] = trial(seed);
    } catch (const Error&) {
      // Trials whose metric breaks regularity are left out of the mean.
    }
  });
  return average_rows(rows);
}

}  // namespace

std::vector<RankingRow> quadratic_ranking(const RankingConfig& cfg) {
  return ranking_trials(cfg, [&](std::uint64_t seed) {
    const QuadraticMetric truth = random_metric(cfg.k, seed);
    SimulatedOracle oracle(truth);
    const QpmeResult r = qpme(cfg.qpme, oracle);
    const Vector o = Vector::Constant(cfg.k, 1.0 / cfg.k);
    const auto pool = sample_ball({o, cfg.qpme.rho}, cfg.pool, seed + 1000003);
    const QuadraticMetric accuracy = accuracy_metric(cfg.k);
    auto by = [&](const QuadraticMetric& m) {
      return score_pool(pool, [&](const Vector& x) { return eval_quadratic(m, x); });
    };
    return ranking_experiment(
        by(truth), Candidates{{"elicited", by(r.metric)},
                              {"linear", by({truth.a, Matrix::Zero(cfg.k, cfg.k)})},
                              {"accuracy", by(accuracy)}});
  });
}

std::vector<RankingRow> fair_ranking(const RankingConfig& cfg) {
  return ranking_trials(cfg, [&](std::uint64_t seed) {
    const FairQuadraticMetric truth =
        random_fair_metric(cfg.k, cfg.groups, seed, 1e-2, cfg.lambda);
    const GroupModel gm = random_group_model(cfg.k, cfg.groups, seed);
    FairOracle oracle(truth, gm);
    FairConfig fc;
    fc.qpme = cfg.qpme;
    const FairResult r = fair_qpme(fc, oracle, gm);

    const Vector o = Vector::Constant(cfg.k, 1.0 / cfg.k);
    const auto flat = sample_ball({o, cfg.qpme.rho}, cfg.pool * cfg.groups,
                                  seed + 1000003);
    std::vector<GroupRateProfile> pool;
    for (int i = 0; i < cfg.pool; ++i) {
      GroupRateProfile p(cfg.k, cfg.groups);
      for (int g = 0; g < cfg.groups; ++g) {
        p.col(g) = flat[static_cast<std::size_t>(i * cfg.groups + g)];
      }
      pool.push_back(std::move(p));
    }
    FairQuadraticMetric linear = truth;
    linear.lambda = 0.0;
    const auto eo = std::get<FairQuadraticMetric>(make_named_metric(
        "eo", RateSpace::diagonal(cfg.k), cfg.groups, std::nullopt, 0.5));
    auto by = [&](const FairQuadraticMetric& m) {
      Vector out(cfg.pool);
      for (int i = 0; i < cfg.pool; ++i) {
        out(i) = -eval_fair(m, pool[static_cast<std::size_t>(i)], gm);
      }
      return out;
    };
    return ranking_experiment(
        by(truth), Candidates{{"elicited", by(r.metric)},
                              {"linear_no_fairness", by(linear)},
                              {"accuracy_equalized_odds", by(eo)}});
  });
}

Vector diagonal_from_general(const Vector& general, int k) {
  require_same_size(general.size(), static_cast<Eigen::Index>(k) * (k - 1),
                    "diagonal_from_general");
  Vector d = Vector::Ones(k);
  for (int i = 0; i < k; ++i) {
    d(i) -= general.segment(static_cast<Eigen::Index>(i) * (k - 1), k - 1).sum();
  }
  return d;
}

Vector general_from_diagonal(const Vector& diagonal) {
  const auto k = diagonal.size();
  require(k >= 2, ErrorCode::kInvalidArgument, "general_from_diagonal: k >= 2");
  Vector g(k * (k - 1));
  for (Eigen::Index i = 0; i < k; ++i) {
    g.segment(i * (k - 1), k - 1)
        .setConstant((1.0 - diagonal(i)) / static_cast<double>(k - 1));
  }
  return g;
}

int LiftedOracle::compare(const Vector& r1, const Vector& r2) {
  return general_.compare(general_from_diagonal(r1), general_from_diagonal(r2));
}

constexpr double kGeneralSpread = 0.25;

std::vector<RankingRow> general_ranking(const RankingConfig& cfg) {
  return ranking_trials(cfg, [&](std::uint64_t seed) {
    const int k = cfg.k;
    const int q = k * (k - 1);
    const QuadraticMetric truth = random_metric(q, seed);
    SimulatedOracle general(truth);
    LiftedOracle diagonal(general, k);

    QpmeConfig diag_cfg = cfg.qpme;
    diag_cfg.center = Vector::Constant(k, 1.0 / k);
    QpmeConfig gen_cfg = cfg.qpme;
    gen_cfg.center = Vector::Constant(q, 1.0 / k);

    const QuadraticMetric quad_gen = qpme(gen_cfg, general).metric;
    const QuadraticMetric quad_diag = qpme(diag_cfg, diagonal).metric;
    const Vector lin_gen =
        lpme(LpmeConfig{cfg.qpme.epsilon, cfg.qpme.cycles,
                        {*gen_cfg.center, cfg.qpme.rho}},
             general)
            .weights;
    const Vector lin_diag =
        lpme(LpmeConfig{cfg.qpme.epsilon, cfg.qpme.cycles,
                        {*diag_cfg.center, cfg.qpme.rho}},
             diagonal)
            .weights;

    // Classifiers trade errors mostly through their diagonal rates; the
    // off-diagonal split varies around the even spread.
    const auto diag_pool =
        sample_ball({*diag_cfg.center, cfg.qpme.rho}, cfg.pool, seed + 1000003);
    const auto spread = sample_ball({Vector::Zero(q), kGeneralSpread * cfg.qpme.rho},
                                    cfg.pool, seed + 2000003);
    std::vector<Vector> pool;
    for (int i = 0; i < cfg.pool; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      pool.push_back(general_from_diagonal(diag_pool[idx]) + spread[idx]);
    }
    auto general_score = [&](const QuadraticMetric& m) {
      return score_pool(pool, [&](const Vector& x) { return eval_quadratic(m, x); });
    };
    auto diagonal_score = [&](const QuadraticMetric& m) {
      return score_pool(pool, [&](const Vector& x) {
        return eval_quadratic(m, diagonal_from_general(x, k));
      });
    };
    return ranking_experiment(
        general_score(truth),
        Candidates{{"linear_diagonal",
                    diagonal_score({lin_diag, Matrix::Zero(k, k)})},
                   {"linear_general", general_score({lin_gen, Matrix::Zero(q, q)})},
                   {"quadratic_diagonal", diagonal_score(quad_diag)},
                   {"quadratic_general", general_score(quad_gen)}});
  });
}

std::vector<std::pair<Vector, Vector>> evaluation_pairs(const Sphere& ball,
                                                        int n,
                                                        std::uint64_t seed) {
  require(n >= 1, ErrorCode::kInvalidArgument, "evaluation_pairs: n >= 1");
  const auto points = sample_ball(ball, 2 * n, seed);
  std::vector<std::pair<Vector, Vector>> pairs;
  for (int i = 0; i < n; ++i) {
    pairs.emplace_back(points[static_cast<std::size_t>(2 * i)],
                       points[static_cast<std::size_t>(2 * i + 1)]);
  }
  return pairs;
}

double match_fraction(RateOracle& oracle, const QuadraticMetric& elicited,
                      const Sphere& ball, int n, std::uint64_t seed) {
  int agree = 0;
  for (const auto& [x, y] : evaluation_pairs(ball, n, seed)) {
    const int predicted = eval_quadratic(elicited, x) > eval_quadratic(elicited, y);
    agree += predicted == oracle.compare(x, y);
  }
  return 100.0 * agree / n;
}

std::vector<RatioRecord> ratio_study(int k, int trials, double floor,
                                     const QpmeConfig& cfg,
                                     std::uint64_t first_seed) {
  std::vector<std::vector<RatioRecord>> runs(
      static_cast<std::size_t>(std::max(trials, 0)));
  parallel_for(trials, 0, [&](int t) {
    const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(t);
    auto& out = runs[static_cast<std::size_t>(t)];
    try {
      const QuadraticMetric truth = random_metric(k, seed, floor);
      SimulatedOracle oracle(truth);
      const QpmeResult r = qpme(cfg, oracle);
      const SlopeSet exact = exact_slopes(shift_quadratic(truth, r.center),
                                          cfg.delta(), r.pivot);
      auto add = [&](int l, const Vector& est, const Vector& tru) {
        for (Eigen::Index i = 0; i < k; ++i) {
          if (i == r.pivot) continue;
          out.push_back({seed, true, i, l, est(i) / est(r.pivot),
                         tru(i) / tru(r.pivot)});
        }
      };
      add(0, r.slopes.f0, exact.f0);
      for (int j = 0; j < k; ++j) {
        add(j + 1, r.slopes.fj[static_cast<std::size_t>(j)],
            exact.fj[static_cast<std::size_t>(j)]);
      }
      add(-1, r.slopes.fneg, exact.fneg);
    } catch (const Error&) {
      out.assign(1, RatioRecord{seed, false});
    }
  });
  std::vector<RatioRecord> all;
  for (auto& run : runs) all.insert(all.end(), run.begin(), run.end());
  return all;
}

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "";
  std::ostringstream out;
  out << std::setprecision(10) << x;
  return out.str();
}

double inner_radius(const TrialConfig& c) {
  if (c.mode == TrialMode::kFair) {
    FairConfig fc;
    fc.qpme = c.qpme();
    return fc.restricted().inner_radius();
  }
  return c.qpme().inner_radius();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

TrialConfig trial_config(TrialMode mode, int k, int groups, int trials) {
  TrialConfig cfg;
  cfg.mode = mode;
  cfg.k = k;
  cfg.groups = groups;
  cfg.trials = trials;
  return cfg;
}

}  // namespace

std::string trials_csv_header() {
  return "experiment,mode,k,m,epsilon,rho,varrho,noise,floor,seed,ok,queries,"
         "lambda,a_error,B_error,lambda_error,lambda_search_error,"
         "baseline_a_error,baseline_B_error,error\n";
}

std::string trials_csv_rows(const std::string& experiment,
                            const TrialReport& report) {
  const TrialConfig& c = report.config;
  std::ostringstream out;
  for (const TrialRecord& t : report.trials) {
    out << experiment << ',' << to_string(c.mode) << ',' << c.k << ','
        << (c.mode == TrialMode::kFair ? std::to_string(c.groups) : "") << ','
        << fmt(c.epsilon) << ',' << fmt(c.rho) << ','
        << fmt(inner_radius(c)) << ',' << fmt(c.noise.epsilon) << ','
        << fmt(c.regularity_floor) << ',' << t.seed << ',' << (t.ok ? 1 : 0)
        << ',' << t.queries << ',' << fmt(t.lambda) << ',' << fmt(t.a_error)
        << ',' << fmt(t.B_error) << ',' << fmt(t.lambda_error) << ','
        << fmt(t.lambda_search_error) << ',' << fmt(t.baseline_a_error) << ','
        << fmt(t.baseline_B_error) << ',' << csv_escape(t.error) << '\n';
  }
  return out.str();
}

std::string figure_csv(int figure, int trials) {
  const int n = trials > 0 ? trials : 100;
  std::ostringstream out;
  switch (figure) {
    case 4:
    case 6: {
      out << trials_csv_header();
      for (int k = 2; k <= 5; ++k) {
        out << trials_csv_rows("figure" + std::to_string(figure),
                               run_trials(trial_config(TrialMode::kQuadratic, k, 2, n)));
      }
      if (figure == 4) {
        for (int m = 2; m <= 5; ++m) {
          for (int k = 2; k <= 5; ++k) {
            out << trials_csv_rows("figure4",
                                   run_trials(trial_config(TrialMode::kFair, k, m, n)));
          }
        }
      }
      return out.str();
    }
    case 7: {
      out << trials_csv_header();
      for (int k = 2; k <= 5; ++k) {
        for (double floor : {1e-2, 0.0}) {
          TrialConfig cfg = trial_config(TrialMode::kQuadratic, k, 2, n);
          cfg.regularity_floor = floor;
          out << trials_csv_rows("figure7", run_trials(cfg));
        }
      }
      return out.str();
    }
    case 8: {
      out << "experiment,k,floor,seed,ok,coordinate,center,estimated,truth,"
             "ratio\n";
      const int runs = trials > 0 ? trials : 1000;
      for (double floor : {1e-2, 0.0}) {
        for (const RatioRecord& r : ratio_study(3, runs, floor, QpmeConfig{})) {
          out << "figure8,3," << fmt(floor) << ',' << r.seed << ','
              << (r.ok ? 1 : 0) << ',' << r.coordinate << ',' << r.center
              << ',' << fmt(r.estimated) << ',' << fmt(r.truth) << ','
              << fmt(r.ok ? r.estimated / r.truth : kNan) << '\n';
        }
      }
      return out.str();
    }
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown figure " + std::to_string(figure) +
                      " (expected 4, 6, 7 or 8)");
  }
}

std::string table_csv(int table, int trials) {
  std::ostringstream out;
  switch (table) {
    case 1: {
      const int n = trials > 0 ? trials : 100;
      out << "mode,k,m,trials,failures,mean_queries\n";
      auto row = [&](const TrialReport& r) {
        out << to_string(r.config.mode) << ',' << r.config.k << ','
            << (r.config.mode == TrialMode::kFair ? std::to_string(r.config.groups)
                                                  : "")
            << ',' << r.trials.size() << ',' << r.failures() << ','
            << fmt(r.mean_queries()) << '\n';
      };
      for (int k = 2; k <= 5; ++k) {
        row(run_trials(trial_config(TrialMode::kQuadratic, k, 2, n)));
      }
      for (int k = 2; k <= 5; ++k) {
        for (int m = 2; m <= 5; ++m) {
          row(run_trials(trial_config(TrialMode::kFair, k, m, n)));
        }
      }
      return out.str();
    }
    case 2:
    case 3: {
      RankingConfig cfg;
      cfg.trials = trials > 0 ? trials : 100;
      out << "table,k,m,method,ndcg,kendall_tau\n";
      auto emit = [&](const std::vector<RankingRow>& rows, const std::string& m) {
        for (const RankingRow& r : rows) {
          out << "table" << table << ',' << cfg.k << ',' << m << ',' << r.method
              << ',' << fmt(r.ndcg) << ',' << fmt(r.kendall) << '\n';
        }
      };
      if (table == 2) {
        for (int k : {2, 3}) {
          cfg.k = k;
          emit(fair_ranking(cfg), std::to_string(cfg.groups));
        }
      } else {
        for (int k : {2, 3}) {
          cfg.k = k;
          emit(quadratic_ranking(cfg), "");
        }
        cfg.k = 3;
        emit(general_ranking(cfg), "");
      }
      return out.str();
    }
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown table " + std::to_string(table) +
                      " (expected 1, 2 or 3)");
  }
}

}  // namespace qme
