#pragma once

// Fair quadratic elicitation. Each proper group subset sigma pins the other
// groups to o, which turns the fair cost into a quadratic in the shared rate
// s with d = (1-lambda) tau^sigma .* a and B = -lambda W^sigma (utility
// orientation). One QPME run per sigma, then the membership system Xi
// separates the per-pair matrices.

#include "qme/metrics.hpp"
#include "qme/oracle.hpp"
#include "qme/qpme.hpp"

#include <optional>
#include <vector>

namespace qme {

struct PartitionSet {
  int groups = 2;
  std::vector<std::vector<int>> subsets;  ///< 0-based group labels
  /// Xi(sigma, pair) = 1 iff exactly one group of the pair is in sigma.
  Matrix xi;
};

/// Builds Xi for the given subsets and checks that it is invertible.
PartitionSet make_partition_set(int groups,
                                std::vector<std::vector<int>> subsets);

/// Singletons, then pairs, and so on, keeping subsets that raise the rank
/// of Xi until it is square and invertible.
PartitionSet choose_partitions(int groups);

/// Entries of a below this (after normalization) are a cost-sign violation;
/// smaller negatives are estimation noise and are clamped to zero.
inline constexpr double kCostSignSlack = 0.1;

struct FairResult {
  FairQuadraticMetric metric;  ///< lambda from the normalization estimator
  PartitionSet partitions;
  std::vector<QpmeResult> runs;  ///< one per subset, in partition order
  std::vector<Matrix> scaled;    ///< lambda/(1-lambda) B^{uv} estimates
  std::optional<double> lambda_search;  ///< from elicit_lambda, if run
  std::size_t queries = 0;
};

/// Default inner radius of fair runs as a fraction of rho. The slope bias
/// from the restricted quadratic term grows with this radius and with
/// lambda / (1 - lambda).
inline constexpr double kFairInnerRadiusRatio = 0.01;

struct FairConfig {
  QpmeConfig qpme;  ///< an unset varrho becomes rho * kFairInnerRadiusRatio
  /// Also run the one-dimensional trade-off search as a cross-check.
  bool lambda_check = false;
  std::optional<PartitionSet> partitions;

  QpmeConfig restricted() const;
};

FairResult fair_qpme(const FairConfig& cfg, GroupOracle& oracle,
                     const GroupModel& gm);

/// Solves Xi b_(ij) = beta_(ij) entrywise. `combined[s]` holds the
/// estimate of sum_{u in sigma_s, v not in sigma_s} B^{uv}.
std::vector<Matrix> solve_pair_matrices(const PartitionSet& partitions,
                                        const std::vector<Matrix>& combined);

struct LambdaResult {
  double lambda = 0.0;
  std::size_t queries = 0;
};

/// Binary search on the trade-off with known costs and violation matrices.
/// Queries profiles (s, o, ..., o) on the ball of radius varrho around
/// z_1 = o + (rho - varrho) alpha_1.
LambdaResult elicit_lambda(const QpmeConfig& cfg, GroupOracle& oracle,
                           const Vector& a, const std::vector<Matrix>& violations,
                           const GroupModel& gm);

}  // namespace qme
