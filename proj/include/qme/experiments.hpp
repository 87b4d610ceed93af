#pragma once

// Simulation harness: seeded elicitation trials, the equal-weights baseline,
// ranking agreement on synthetic classifier pools, and CSV reports.

#include "qme/fair.hpp"
#include "qme/lpme.hpp"
#include "qme/metrics.hpp"
#include "qme/oracle.hpp"
#include "qme/qpme.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qme {

enum class TrialMode { kLinear, kQuadratic, kFair };

TrialMode parse_trial_mode(const std::string& name);
std::string to_string(TrialMode mode);

struct TrialConfig {
  TrialMode mode = TrialMode::kQuadratic;
  int k = 2;
  int groups = 2;
  int trials = 100;
  double epsilon = 1e-2;
  double rho = 0.2;
  std::optional<double> varrho;
  NoiseConfig noise;
  std::uint64_t first_seed = 0;
  double regularity_floor = 1e-2;
  std::optional<double> lambda;  ///< fair mode; random when absent
  bool lambda_check = false;
  int threads = 0;  ///< 0 uses the hardware concurrency

  QpmeConfig qpme() const;
};

inline constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct TrialRecord {
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;  ///< set when the trial raised
  std::size_t queries = 0;
  double a_error = kNan;
  double B_error = kNan;  ///< fair mode: summed over group pairs
  double lambda_error = kNan;
  double lambda_search_error = kNan;
  double baseline_a_error = kNan;
  double baseline_B_error = kNan;
  double lambda = kNan;  ///< true trade-off in fair mode
};

struct TrialReport {
  TrialConfig config;
  std::vector<TrialRecord> trials;

  std::size_t failures() const;
  /// Mean of a field over successful trials, ignoring NaN entries.
  double mean(double TrialRecord::*field) const;
  double mean_queries() const;
};

/// Runs trials with seeds first_seed, first_seed + 1, ... in parallel.
/// Element errors from a trial are recorded on that trial only.
TrialReport run_trials(const TrialConfig& cfg);

/// Equal coefficients: a_i = c and B_ij = -c, jointly normalized.
QuadraticMetric baseline_equal_weights(int k);

/// Seeded unit linear metric (B = 0).
QuadraticMetric random_linear_metric(int k, std::uint64_t seed);

/// Full-list NDCG with exponential gain 2^rel - 1, where rel is the true score
/// min-max scaled to [0, 1]; the list is ranked by predicted score.
double ndcg(const Vector& true_scores, const Vector& pred_scores);

/// Kendall tau-b.
double kendall_tau(const Vector& true_scores, const Vector& pred_scores);

/// n points uniform in the ball.
std::vector<Vector> sample_ball(const Sphere& ball, int n, std::uint64_t seed);

struct RankingRow {
  std::string method;
  double ndcg = 0.0;
  double kendall = 0.0;
};

/// Scores each candidate list against the true scores.
std::vector<RankingRow> ranking_experiment(
    const Vector& true_scores,
    const std::vector<std::pair<std::string, Vector>>& candidates);

struct RankingConfig {
  int k = 2;
  int groups = 2;
  int pool = 80;
  int trials = 20;
  std::uint64_t first_seed = 0;
  QpmeConfig qpme;
  std::optional<double> lambda;
};

/// Random quadratic oracle over diagonal rates. Methods: "elicited",
/// "linear" (linear part of the true metric) and "accuracy".
std::vector<RankingRow> quadratic_ranking(const RankingConfig& cfg);

/// Random fair oracle; pool members are group profiles with every group in
/// the ball. Methods: "elicited", "linear_no_fairness" and
/// "accuracy_equalized_odds".
std::vector<RankingRow> fair_ranking(const RankingConfig& cfg);

/// Random quadratic oracle over general (off-diagonal) rates. Methods:
/// "linear_diagonal", "linear_general", "quadratic_diagonal" and
/// "quadratic_general".
std::vector<RankingRow> general_ranking(const RankingConfig& cfg);

/// Diagonal rate r_ii = 1 - sum_{j != i} R_ij from row-major off-diagonals.
Vector diagonal_from_general(const Vector& general, int k);
/// Spreads each class's errors evenly: R_ij = (1 - r_ii) / (k - 1).
Vector general_from_diagonal(const Vector& diagonal);

/// Asks the general-rate oracle about lifted diagonal rates.
class LiftedOracle final : public RateOracle {
 public:
  explicit LiftedOracle(RateOracle& general, int k)
      : general_(general), k_(k) {}
  int compare(const Vector& r1, const Vector& r2) override;
  Eigen::Index dim() const override { return k_; }

 private:
  RateOracle& general_;
  int k_;
};

/// n seeded pairs uniform in the ball.
std::vector<std::pair<Vector, Vector>> evaluation_pairs(const Sphere& ball,
                                                        int n,
                                                        std::uint64_t seed);

/// Percentage of seeded random pairs on which the elicited metric agrees with
/// the oracle.
double match_fraction(RateOracle& oracle, const QuadraticMetric& elicited,
                      const Sphere& ball, int n, std::uint64_t seed);

struct RatioRecord {
  std::uint64_t seed = 0;
  bool ok = true;
  Eigen::Index coordinate = 0;  ///< i in f_il / f_pl
  int center = 0;  ///< l: 0 for o, j for z_j, -1 for the reflected center
  double estimated = kNan;
  double truth = kNan;
};

/// Estimated versus exact slope fractions f_il / f_pl (i != pivot) over
/// seeded QPME runs. A failed run contributes one record with ok = false.
std::vector<RatioRecord> ratio_study(int k, int trials, double floor,
                                     const QpmeConfig& cfg,
                                     std::uint64_t first_seed = 0);

/// Per-trial CSV; columns listed in the README.
std::string trials_csv_header();
std::string trials_csv_rows(const std::string& experiment,
                            const TrialReport& report);

/// Benchmark reports by figure or table label; `trials` overrides the
/// default trial count when positive.
std::string figure_csv(int figure, int trials);
std::string table_csv(int table, int trials);

}  // namespace qme
