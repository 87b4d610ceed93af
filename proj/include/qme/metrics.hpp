#pragma once

// Metric families over predictive rates: quadratic utilities
//   phi(r) = <a, r> + 1/2 r^T B r          (B negative semi-definite)
// and group-fair costs (lower is better)
//   (1-lambda) <a, 1 - sum_g tau^g .* r^g>
//     + lambda/2 sum_{u<v} (r^u - r^v)^T B^{uv} (r^u - r^v).

#include "qme/geometry.hpp"
#include "qme/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace qme {

template <typename Scalar>
struct BasicQuadraticMetric {
  Vec<Scalar> a;
  Mat<Scalar> B;

  Eigen::Index dim() const { return a.size(); }
};

/// Quadratic centered at a reference rate o: d = a + B o. The constant term
/// is dropped since it never changes a comparison.
template <typename Scalar>
struct BasicShiftedQuadratic {
  Vec<Scalar> d;
  Mat<Scalar> B;
};

using QuadraticMetric = BasicQuadraticMetric<double>;
using ShiftedQuadratic = BasicShiftedQuadratic<double>;

template <typename Scalar>
Scalar eval_quadratic(const BasicQuadraticMetric<Scalar>& m,
                      const Vec<Scalar>& r) {
  require_same_size(r.size(), m.a.size(), "eval_quadratic");
  require_same_size(m.B.rows(), m.a.size(), "eval_quadratic (B rows)");
  require_same_size(m.B.cols(), m.a.size(), "eval_quadratic (B cols)");
  return m.a.dot(r) + Scalar(0.5) * r.dot(m.B * r);
}

template <typename Scalar>
BasicShiftedQuadratic<Scalar> shift_quadratic(
    const BasicQuadraticMetric<Scalar>& m, const Vec<Scalar>& o) {
  require_same_size(o.size(), m.a.size(), "shift_quadratic");
  return {m.a + m.B * o, m.B};
}

/// Inverse of shift_quadratic: a = d - B o.
template <typename Scalar>
BasicQuadraticMetric<Scalar> unshift_quadratic(
    const BasicShiftedQuadratic<Scalar>& s, const Vec<Scalar>& o) {
  require_same_size(o.size(), s.d.size(), "unshift_quadratic");
  return {s.d - s.B * o, s.B};
}

template <typename Scalar>
Scalar eval_shifted(const BasicShiftedQuadratic<Scalar>& s,
                    const Vec<Scalar>& r, const Vec<Scalar>& o) {
  const Vec<Scalar> x = r - o;
  return s.d.dot(x) + Scalar(0.5) * x.dot(s.B * x);
}

/// Scales (a, B) so that ||a||^2 + ||B||_F^2 = 1.
template <typename Scalar>
BasicQuadraticMetric<Scalar> normalize_joint(BasicQuadraticMetric<Scalar> m) {
  const Scalar norm =
      std::sqrt(m.a.squaredNorm() + m.B.squaredNorm());
  require(norm > Scalar(0), ErrorCode::kInvalidArgument,
          "normalize_joint: zero metric");
  m.a /= norm;
  m.B /= norm;
  return m;
}

/// Index of the unordered group pair (u, v), u < v, both 0-based, in
/// lexicographic order (0,1), (0,2), ..., (m-2, m-1).
inline int pair_index(int groups, int u, int v) {
  if (u > v) std::swap(u, v);
  return u * groups - u * (u + 1) / 2 + (v - u - 1);
}

inline int pair_count(int groups) { return groups * (groups - 1) / 2; }

/// All pairs (u, v), u < v, in pair_index order.
std::vector<std::pair<int, int>> group_pairs(int groups);

struct FairQuadraticMetric {
  Vector a;  ///< misclassification costs, a >= 0, ||a|| = 1
  int groups = 2;
  /// One PSD matrix per group pair, indexed by pair_index.
  std::vector<Matrix> violations;
  double lambda = 0.5;

  Eigen::Index dim() const { return a.size(); }
  const Matrix& violation(int u, int v) const {
    return violations.at(static_cast<std::size_t>(pair_index(groups, u, v)));
  }
};

/// Per-group class prevalences tau^g_i = P(G = g | Y = i).
struct GroupModel {
  std::vector<Vector> tau;

  int groups() const { return static_cast<int>(tau.size()); }
  Eigen::Index dim() const { return tau.empty() ? 0 : tau.front().size(); }

  /// Sum of tau^g over the listed groups.
  Vector tau_sum(const std::vector<int>& members) const;
};

/// Column g holds the rates of group g.
using GroupRateProfile = Matrix;

void validate(const GroupModel& gm);
void validate(const FairQuadraticMetric& fm);

/// Overall rate sum_g tau^g .* r^g.
Vector overall_rate(const GroupRateProfile& profile, const GroupModel& gm);

/// Fair metric value in cost form (lower is better).
double eval_fair(const FairQuadraticMetric& fm,
                 const GroupRateProfile& profile, const GroupModel& gm);

/// Normalizes ||a|| = 1 and 1/2 sum ||B^{uv}||_F = 1 separately.
FairQuadraticMetric normalize_separate(FairQuadraticMetric fm);

using NamedMetric = std::variant<QuadraticMetric, FairQuadraticMetric>;

/// Named families: "qmean", "coverage" (general rates plus a target
/// distribution), and fairness violations "eopp", "eo", "bn", "eb".
/// Fairness kinds take uniform misclassification costs and the given
/// trade-off.
NamedMetric make_named_metric(std::string_view kind, const RateSpace& space,
                              int groups = 0,
                              const std::optional<Vector>& target = std::nullopt,
                              double lambda = 0.5);

/// Seeded quadratic utility: a standard normal, B = -M M^T / ||M M^T||_F,
/// jointly normalized, resampled until max_i |(a + B o)_i| > floor.
QuadraticMetric random_metric(int k, std::uint64_t seed,
                              double regularity_floor = 1e-2);

/// Seeded fair metric with a >= 0 and PSD violation matrices. A missing
/// lambda is drawn uniformly from [0.1, 0.9].
FairQuadraticMetric random_fair_metric(int k, int groups, std::uint64_t seed,
                                       double regularity_floor = 1e-2,
                                       std::optional<double> lambda = {});

/// Seeded prevalences: per class, normalized uniform draws over groups.
GroupModel random_group_model(int k, int groups, std::uint64_t seed);

/// Uniform linear baseline a = 1/sqrt(k), B = 0.
QuadraticMetric accuracy_metric(int k);

/// A metric plus, for fair metrics, the group prevalences it was paired with.
struct MetricDocument {
  NamedMetric metric;
  std::optional<GroupModel> groups;
};

/// {"type":"quadratic","a":[..],"B":[[..]]} or
/// {"type":"fair","a":[..],"B":{"1,2":[[..]]},"lambda":x,"tau":[[..]]}.
/// Pair keys and tau rows are 1-based group labels in file order.
std::string to_json(const MetricDocument& doc, int indent = 2);
MetricDocument metric_from_json(const std::string& text);
MetricDocument load_metric(const std::string& path);
void save_metric(const std::string& path, const MetricDocument& doc);

/// {"tau":[[..],..]} or a bare array of per-group vectors.
GroupModel group_model_from_json(const std::string& text);
GroupModel load_group_model(const std::string& path);

}  // namespace qme
