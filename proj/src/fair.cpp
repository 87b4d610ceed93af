#include "qme/fair.hpp"

#include "qme/lpme.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <functional>

namespace qme {

namespace {

Matrix membership(int groups, const std::vector<std::vector<int>>& subsets) {
  const auto pairs = group_pairs(groups);
  Matrix xi = Matrix::Zero(static_cast<Eigen::Index>(subsets.size()),
                           static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    auto in = [&](int g) {
      return std::find(subsets[s].begin(), subsets[s].end(), g) !=
             subsets[s].end();
    };
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (in(pairs[p].first) != in(pairs[p].second)) {
        xi(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(p)) = 1.0;
      }
    }
  }
  return xi;
}

Eigen::Index rank_of(const Matrix& m) {
  if (m.rows() == 0) return 0;
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(1e-9);
  return lu.rank();
}

// Calls visit on every subset of [groups] of the given size, in
// lexicographic order.
void for_each_subset(int groups, int size,
                     const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> idx(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    visit(idx);
    int i = size - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == groups - size + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < size; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

Vector recover_costs(const Vector& d, const Vector& tau) {
  Vector a = d.cwiseQuotient(tau);
  const double norm = a.norm();
  require(norm > 0.0, ErrorCode::kCostSignViolation,
          "cost-sign violation: zero linear slope");
  a /= norm;
  if (a.sum() < 0.0) a = -a;
  require(a.minCoeff() >= -kCostSignSlack, ErrorCode::kCostSignViolation,
          "cost-sign violation: recovered misclassification costs are negative");
  a = a.cwiseMax(0.0);
  return a / a.norm();
}

}  // namespace

PartitionSet make_partition_set(int groups,
                                std::vector<std::vector<int>> subsets) {
  require(groups >= 2, ErrorCode::kInvalidArgument,
          "partitions need at least two groups");
  for (auto& s : subsets) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    require(!s.empty() && static_cast<int>(s.size()) < groups,
            ErrorCode::kInvalidArgument,
            "each subset must be proper and non-empty");
    require(s.front() >= 0 && s.back() < groups, ErrorCode::kInvalidArgument,
            "subset group label out of range");
  }
  PartitionSet ps{groups, std::move(subsets), {}};
  ps.xi = membership(groups, ps.subsets);
  require(ps.xi.rows() == pair_count(groups) &&
              rank_of(ps.xi) == pair_count(groups),
          ErrorCode::kInvalidArgument,
          "partition membership matrix is not invertible");
  return ps;
}

PartitionSet choose_partitions(int groups) {
  require(groups >= 2, ErrorCode::kInvalidArgument,
          "partitions need at least two groups");
  const int target = pair_count(groups);
  std::vector<std::vector<int>> chosen;
  for (int size = 1; size < groups && static_cast<int>(chosen.size()) < target;
       ++size) {
    for_each_subset(groups, size, [&](const std::vector<int>& s) {
      if (static_cast<int>(chosen.size()) >= target) return;
      auto trial = chosen;
      trial.push_back(s);
      if (rank_of(membership(groups, trial)) ==
          static_cast<Eigen::Index>(trial.size())) {
        chosen = std::move(trial);
      }
    });
  }
  return make_partition_set(groups, std::move(chosen));
}

std::vector<Matrix> solve_pair_matrices(const PartitionSet& partitions,
                                        const std::vector<Matrix>& combined) {
  require(combined.size() == partitions.subsets.size(),
          ErrorCode::kDimensionMismatch,
          "need one combined matrix per partition subset");
  const Eigen::Index k = combined.front().rows();
  const auto rows = static_cast<Eigen::Index>(combined.size());
  Matrix beta(rows, k * k);
  for (Eigen::Index s = 0; s < rows; ++s) {
    const Matrix& w = combined[static_cast<std::size_t>(s)];
    require_same_size(w.rows(), k, "combined matrix");
    beta.row(s) = Eigen::Map<const Vector>(w.data(), k * k).transpose();
  }
  const Matrix b = partitions.xi.fullPivLu().solve(beta);
  std::vector<Matrix> out;
  for (Eigen::Index p = 0; p < b.rows(); ++p) {
    const Vector flat = b.row(p).transpose();
    out.emplace_back(Eigen::Map<const Matrix>(flat.data(), k, k));
  }
  return out;
}

FairResult fair_qpme(const FairConfig& cfg, GroupOracle& oracle,
                     const GroupModel& gm) {
  validate(gm);
  const int m = oracle.groups();
  const Eigen::Index k = oracle.dim();
  require(gm.groups() == m, ErrorCode::kDimensionMismatch,
          "fair_qpme: group model does not match the oracle");
  require_same_size(gm.dim(), k, "fair_qpme tau");
  const QpmeConfig qcfg = cfg.restricted();
  validate(qcfg, k);

  FairResult result;
  result.partitions = cfg.partitions ? *cfg.partitions : choose_partitions(m);
  require(result.partitions.groups == m, ErrorCode::kInvalidArgument,
          "fair_qpme: partition set is for a different group count");

  const Vector o = qpme_centers(qcfg, k).o;
  Vector a_hat;
  std::vector<Matrix> combined;
  for (const auto& sigma : result.partitions.subsets) {
    RestrictedOracle restricted(oracle, sigma, o);
    QpmeResult run = qpme(qcfg, restricted);
    result.queries += run.queries;
    const Vector tau = gm.tau_sum(sigma);
    if (a_hat.size() == 0) a_hat = recover_costs(run.shifted.d, tau);
    // Common scale: after dividing by t the linear part is a .* tau^sigma,
    // so the quadratic part becomes -lambda/(1-lambda) W^sigma.
    const double t = run.shifted.d.norm() / a_hat.cwiseProduct(tau).norm();
    combined.push_back(-run.shifted.B / t);
    result.runs.push_back(std::move(run));
  }

  result.scaled = solve_pair_matrices(result.partitions, combined);
  for (Matrix& b : result.scaled) b = 0.5 * (b + b.transpose());
  double total = 0.0;
  for (const Matrix& b : result.scaled) total += b.norm();
  total *= 0.5;
  require(total > 0.0, ErrorCode::kRegularityViolation,
          "regularity violation: fairness violation estimates vanish");

  FairQuadraticMetric& fm = result.metric;
  fm.a = a_hat;
  fm.groups = m;
  for (const Matrix& b : result.scaled) fm.violations.push_back(b / total);
  fm.lambda = total / (1.0 + total);

  if (cfg.lambda_check) {
    const LambdaResult lr = elicit_lambda(qcfg, oracle, fm.a,
                                          fm.violations, gm);
    result.lambda_search = lr.lambda;
    result.queries += lr.queries;
  }
  return result;
}

QpmeConfig FairConfig::restricted() const {
  QpmeConfig q = qpme;
  if (!q.varrho) q.varrho = q.rho * kFairInnerRadiusRatio;
  return q;
}

LambdaResult elicit_lambda(const QpmeConfig& cfg, GroupOracle& oracle,
                           const Vector& a, const std::vector<Matrix>& violations,
                           const GroupModel& gm) {
  const int m = oracle.groups();
  const Eigen::Index k = oracle.dim();
  validate(cfg, k);
  require_same_size(a.size(), k, "elicit_lambda costs");
  require(static_cast<int>(violations.size()) == pair_count(m),
          ErrorCode::kDimensionMismatch,
          "elicit_lambda: need one violation matrix per group pair");

  const QpmeCenters centers = qpme_centers(cfg, k);
  const Vector& o = centers.o;
  const Vector& z1 = centers.z[0];
  const Sphere small{z1, cfg.inner_radius()};

  Matrix w = Matrix::Zero(k, k);
  for (int v = 1; v < m; ++v) w += violations[static_cast<std::size_t>(pair_index(m, 0, v))];
  const Vector linear = gm.tau[0].cwiseProduct(a);
  const Vector curvature = w * (z1 - o);

  // Sphere optimum of the local linearization at trade-off x.
  auto candidate = [&](double x) {
    Vector g = (1.0 - x) * linear - x * curvature;
    if (g.norm() < 1e-12) {
      const double nudged = x + (x < 0.5 ? 1e-6 : -1e-6);
      g = (1.0 - nudged) * linear - nudged * curvature;
    }
    return restricted_profile(optimal_rate_on_sphere(g.normalized(), small), o,
                              {0}, m);
  };

  LambdaResult result;
  Interval iv{0.0, 1.0};
  const PreferFn prefer = [&](double x, double y) {
    return oracle.compare(candidate(x), candidate(y));
  };
  while (iv.width() > cfg.epsilon) {
    result.queries += static_cast<std::size_t>(shrink_interval(iv, prefer));
  }
  result.lambda = iv.mid();
  return result;
}

}  // namespace qme
