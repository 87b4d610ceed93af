#include "qme/metrics.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qme {

std::vector<std::pair<int, int>> group_pairs(int groups) {
  std::vector<std::pair<int, int>> pairs;
  for (int u = 0; u < groups; ++u) {
    for (int v = u + 1; v < groups; ++v) pairs.emplace_back(u, v);
  }
  return pairs;
}

Vector GroupModel::tau_sum(const std::vector<int>& members) const {
  Vector sum = Vector::Zero(dim());
  for (int g : members) {
    require(g >= 0 && g < groups(), ErrorCode::kInvalidArgument,
            "group index out of range");
    sum += tau[static_cast<std::size_t>(g)];
  }
  return sum;
}

void validate(const GroupModel& gm) {
  require(gm.groups() >= 2, ErrorCode::kInvalidArgument,
          "group model needs at least two groups");
  Vector total = Vector::Zero(gm.dim());
  for (const Vector& t : gm.tau) {
    require_same_size(t.size(), gm.dim(), "group model");
    require((t.array() >= 0.0).all() && (t.array() <= 1.0).all(),
            ErrorCode::kInvalidArgument, "tau entries must lie in [0,1]");
    total += t;
  }
  require((total.array() - 1.0).abs().maxCoeff() <= 1e-9,
          ErrorCode::kInvalidArgument,
          "tau vectors must sum to one in every class");
}

void validate(const FairQuadraticMetric& fm) {
  require(fm.groups >= 2, ErrorCode::kInvalidArgument,
          "fair metric needs at least two groups");
  require(static_cast<int>(fm.violations.size()) == pair_count(fm.groups),
          ErrorCode::kDimensionMismatch,
          "fair metric needs one violation matrix per group pair");
  require(fm.lambda >= 0.0 && fm.lambda <= 1.0, ErrorCode::kInvalidArgument,
          "lambda must lie in [0,1]");
  for (const Matrix& b : fm.violations) {
    require_same_size(b.rows(), fm.dim(), "violation matrix rows");
    require_same_size(b.cols(), fm.dim(), "violation matrix cols");
  }
}

Vector overall_rate(const GroupRateProfile& profile, const GroupModel& gm) {
  require_same_size(profile.cols(), gm.groups(), "overall_rate (groups)");
  require_same_size(profile.rows(), gm.dim(), "overall_rate (classes)");
  Vector r = Vector::Zero(gm.dim());
  for (int g = 0; g < gm.groups(); ++g) {
    r += gm.tau[static_cast<std::size_t>(g)].cwiseProduct(profile.col(g));
  }
  return r;
}

double eval_fair(const FairQuadraticMetric& fm,
                 const GroupRateProfile& profile, const GroupModel& gm) {
  require_same_size(profile.cols(), fm.groups, "eval_fair (groups)");
  require_same_size(profile.rows(), fm.dim(), "eval_fair (classes)");
  const Vector r = overall_rate(profile, gm);
  const double cost = fm.a.dot(Vector::Ones(r.size()) - r);
  double violation = 0.0;
  for (const auto& [u, v] : group_pairs(fm.groups)) {
    const Vector diff = profile.col(u) - profile.col(v);
    violation += diff.dot(fm.violation(u, v) * diff);
  }
  return (1.0 - fm.lambda) * cost + 0.5 * fm.lambda * violation;
}

FairQuadraticMetric normalize_separate(FairQuadraticMetric fm) {
  const double a_norm = fm.a.norm();
  require(a_norm > 0.0, ErrorCode::kInvalidArgument,
          "normalize_separate: zero cost vector");
  fm.a /= a_norm;
  double total = 0.0;
  for (const Matrix& b : fm.violations) total += b.norm();
  total *= 0.5;
  require(total > 0.0, ErrorCode::kInvalidArgument,
          "normalize_separate: zero violation matrices");
  for (Matrix& b : fm.violations) b /= total;
  return fm;
}

namespace {

// Row-major off-diagonal index of rate entry (i, j), i != j.
Eigen::Index general_index(int k, int i, int j) {
  return static_cast<Eigen::Index>(i) * (k - 1) + (j < i ? j : j - 1);
}

// cov = 1 + M r.
Matrix coverage_map(const RateSpace& space) {
  const int k = space.classes;
  if (space.kind == RateKind::kDiagonal) {
    require(k == 2, ErrorCode::kInvalidArgument,
            "coverage on diagonal rates is defined for k = 2 only");
    Matrix m(2, 2);
    m << 1.0, -1.0, -1.0, 1.0;
    return m;
  }
  Matrix m = Matrix::Zero(k, space.dim());
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      m(i, general_index(k, i, j)) -= 1.0;
      m(j, general_index(k, i, j)) += 1.0;
    }
  }
  return m;
}

FairQuadraticMetric fairness_metric(const Matrix& pattern, int groups,
                                    double lambda) {
  require(groups >= 2, ErrorCode::kInvalidArgument,
          "fairness metrics need at least two groups");
  const Eigen::Index k = pattern.rows();
  FairQuadraticMetric fm;
  fm.a = Vector::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));
  fm.groups = groups;
  fm.violations.assign(static_cast<std::size_t>(pair_count(groups)), pattern);
  fm.lambda = lambda;
  return normalize_separate(std::move(fm));
}

Matrix random_gram(Eigen::Index k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(k, k);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  Matrix gram = m * m.transpose();
  gram = 0.5 * (gram + gram.transpose());
  return gram / gram.norm();
}

}  // namespace

NamedMetric make_named_metric(std::string_view kind, const RateSpace& space,
                              int groups, const std::optional<Vector>& target,
                              double lambda) {
  const int k = space.classes;
  require(k >= 2, ErrorCode::kInvalidArgument, "need k >= 2");
  if (kind == "qmean") {
    require(space.kind == RateKind::kDiagonal, ErrorCode::kInvalidArgument,
            "qmean is defined on diagonal rates");
    // 1 - (1/k) sum (1 - r_i)^2 with constants dropped.
    QuadraticMetric m{Vector::Constant(k, 2.0 / k),
                      Matrix::Identity(k, k) * (-2.0 / k)};
    return normalize_joint(std::move(m));
  }
  if (kind == "coverage") {
    require(target.has_value(), ErrorCode::kInvalidArgument,
            "coverage needs a target distribution");
    require_same_size(target->size(), k, "coverage target");
    require(space.kind == RateKind::kGeneral || k == 2,
            ErrorCode::kInvalidArgument,
            "coverage needs general rates for k > 2");
    const Matrix m = coverage_map(space);
    // -1/2 ||1 + M r - pi||^2 with constants dropped.
    const Vector offset = Vector::Ones(k) - *target;
    return normalize_joint(
        QuadraticMetric{-m.transpose() * offset, -m.transpose() * m});
  }

  require(space.kind == RateKind::kDiagonal, ErrorCode::kInvalidArgument,
          "fairness metrics are defined on diagonal rates");
  Matrix pattern = Matrix::Zero(k, k);
  if (kind == "eopp") {
    pattern(0, 0) = 1.0;
  } else if (kind == "eo") {
    pattern.setIdentity();
  } else if (kind == "bn") {
    pattern(1, 1) = 1.0;
  } else if (kind == "eb") {
    pattern(0, 0) = 1.0;
    pattern(1, 1) = 1.0;
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown metric kind: " + std::string(kind));
  }
  return fairness_metric(pattern, groups, lambda);
}

QuadraticMetric random_metric(int k, std::uint64_t seed,
                              double regularity_floor) {
  require(k >= 2, ErrorCode::kInvalidArgument, "random_metric: need k >= 2");
  require(regularity_floor >= 0.0, ErrorCode::kInvalidArgument,
          "random_metric: negative regularity floor");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Vector o = Vector::Constant(k, 1.0 / k);
  QuadraticMetric m;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vector a(k);
    for (int i = 0; i < k; ++i) a(i) = normal(rng);
    m = normalize_joint(QuadraticMetric{a, -random_gram(k, rng)});
    if ((m.a + m.B * o).cwiseAbs().maxCoeff() >= regularity_floor) return m;
  }
  throw Error(ErrorCode::kRegularityViolation,
              "random_metric: regularity floor not reached in 1000 draws");
}

FairQuadraticMetric random_fair_metric(int k, int groups, std::uint64_t seed,
                                       double regularity_floor,
                                       std::optional<double> lambda) {
  require(k >= 2 && groups >= 2, ErrorCode::kInvalidArgument,
          "random_fair_metric: need k >= 2 and at least two groups");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> trade_off(0.1, 0.9);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    FairQuadraticMetric fm;
    fm.groups = groups;
    fm.a.resize(k);
    for (int i = 0; i < k; ++i) fm.a(i) = std::abs(normal(rng));
    for (int p = 0; p < pair_count(groups); ++p) {
      fm.violations.push_back(random_gram(k, rng));
    }
    fm.lambda = lambda ? *lambda : trade_off(rng);
    fm = normalize_separate(std::move(fm));
    // Shifted gradient of every restricted problem is (1-lambda) tau .* a.
    if ((1.0 - fm.lambda) * fm.a.maxCoeff() >= regularity_floor) return fm;
  }
  throw Error(ErrorCode::kRegularityViolation,
              "random_fair_metric: regularity floor not reached in 1000 draws");
}

GroupModel random_group_model(int k, int groups, std::uint64_t seed) {
  require(k >= 2 && groups >= 2, ErrorCode::kInvalidArgument,
          "random_group_model: need k >= 2 and at least two groups");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(0.1, 1.0);
  GroupModel gm;
  gm.tau.assign(static_cast<std::size_t>(groups), Vector::Zero(k));
  for (int i = 0; i < k; ++i) {
    double total = 0.0;
    for (auto& t : gm.tau) total += (t(i) = draw(rng));
    for (auto& t : gm.tau) t(i) /= total;
  }
  return gm;
}

QuadraticMetric accuracy_metric(int k) {
  return {Vector::Constant(k, 1.0 / std::sqrt(static_cast<double>(k))),
          Matrix::Zero(k, k)};
}

namespace {

detail::json group_model_json(const GroupModel& gm) {
  detail::json rows = detail::json::array();
  for (const Vector& t : gm.tau) rows.push_back(detail::to_json_array(t));
  return rows;
}

GroupModel group_model_from(const detail::json& rows) {
  GroupModel gm;
  for (const auto& row : rows) gm.tau.push_back(detail::vector_from_json(row));
  validate(gm);
  return gm;
}

}  // namespace

std::string to_json(const MetricDocument& doc, int indent) {
  detail::json j;
  if (const auto* m = std::get_if<QuadraticMetric>(&doc.metric)) {
    j["type"] = "quadratic";
    j["a"] = detail::to_json_array(m->a);
    j["B"] = detail::to_json_array(m->B);
  } else {
    const auto& fm = std::get<FairQuadraticMetric>(doc.metric);
    j["type"] = "fair";
    j["a"] = detail::to_json_array(fm.a);
    detail::json pairs = detail::json::object();
    for (const auto& [u, v] : group_pairs(fm.groups)) {
      pairs[std::to_string(u + 1) + "," + std::to_string(v + 1)] =
          detail::to_json_array(fm.violation(u, v));
    }
    j["B"] = pairs;
    j["lambda"] = fm.lambda;
    if (doc.groups) j["tau"] = group_model_json(*doc.groups);
  }
  return j.dump(indent);
}

MetricDocument metric_from_json(const std::string& text) {
  try {
    const auto j = detail::json::parse(text);
    const std::string type = j.at("type").get<std::string>();
    const Vector a = detail::vector_from_json(j.at("a"));
    if (type == "quadratic") {
      const Matrix b = detail::matrix_from_json(j.at("B"));
      require_same_size(b.rows(), a.size(), "metric B rows");
      require_same_size(b.cols(), a.size(), "metric B cols");
      return {QuadraticMetric{a, b}, std::nullopt};
    }
    require(type == "fair", ErrorCode::kInvalidArgument,
            "unknown metric type: " + type);
    FairQuadraticMetric fm;
    fm.a = a;
    fm.lambda = j.at("lambda").get<double>();
    int groups = 0;
    std::vector<std::pair<std::pair<int, int>, Matrix>> entries;
    for (const auto& [key, value] : j.at("B").items()) {
      const auto comma = key.find(',');
      require(comma != std::string::npos, ErrorCode::kInvalidArgument,
              "pair key must look like \"u,v\": " + key);
      const int u = std::stoi(key.substr(0, comma)) - 1;
      const int v = std::stoi(key.substr(comma + 1)) - 1;
      require(u >= 0 && v > u, ErrorCode::kInvalidArgument,
              "pair key must satisfy 1 <= u < v: " + key);
      groups = std::max(groups, v + 1);
      entries.push_back({{u, v}, detail::matrix_from_json(value)});
    }
    fm.groups = groups;
    fm.violations.assign(static_cast<std::size_t>(pair_count(groups)),
                         Matrix::Zero(a.size(), a.size()));
    for (auto& [uv, b] : entries) {
      fm.violations[static_cast<std::size_t>(
          pair_index(groups, uv.first, uv.second))] = std::move(b);
    }
    validate(fm);
    MetricDocument doc{fm, std::nullopt};
    if (j.contains("tau")) {
      doc.groups = group_model_from(j.at("tau"));
      require(doc.groups->groups() == groups, ErrorCode::kDimensionMismatch,
              "tau group count does not match the violation matrices");
    }
    return doc;
  } catch (const detail::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed metric JSON: ") + e.what());
  }
}

MetricDocument load_metric(const std::string& path) {
  return metric_from_json(detail::read_file(path));
}

void save_metric(const std::string& path, const MetricDocument& doc) {
  detail::write_file(path, to_json(doc) + "\n");
}

GroupModel group_model_from_json(const std::string& text) {
  try {
    const auto j = detail::json::parse(text);
    return group_model_from(j.is_object() ? j.at("tau") : j);
  } catch (const detail::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed tau JSON: ") + e.what());
  }
}

GroupModel load_group_model(const std::string& path) {
  return group_model_from_json(detail::read_file(path));
}

}  // namespace qme
