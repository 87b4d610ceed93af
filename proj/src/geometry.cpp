#include "qme/geometry.hpp"

#include "qme/lp.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <cmath>

namespace qme {

Vector uniform_rate(const RateSpace& space) {
  require(space.classes >= 2, ErrorCode::kInvalidArgument,
          "uniform_rate: need at least two classes");
  // Diagonal: P(h = i | Y = i) = 1/k. General: each off-diagonal entry
  // P(h = j | Y = i) is also 1/k.
  return Vector::Constant(space.dim(), 1.0 / space.classes);
}

bool hull_contains(const RateSpace& space, const Vector& p) {
  require(!space.vertices.empty(), ErrorCode::kInvalidArgument,
          "hull_contains: vertex set is empty");
  const Eigen::Index q = space.dim();
  require_same_size(p.size(), q, "hull_contains");

  const auto n = static_cast<Eigen::Index>(space.vertices.size());
  Matrix A(q + 1, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vector& v = space.vertices[static_cast<std::size_t>(j)];
    require_same_size(v.size(), q, "hull_contains vertex");
    A.col(j).head(q) = v;
    A(q, j) = 1.0;
  }
  Vector b(q + 1);
  b.head(q) = p;
  b(q) = 1.0;
  return is_feasible(A, b, kHullTolerance);
}

Vector axis_extents(const RateSpace& space) {
  const Vector o = uniform_rate(space);
  // Without vertices every rate in the unit box counts as achievable.
  if (space.vertices.empty()) {
    return o.cwiseMin(Vector::Ones(o.size()) - o);
  }
  require(hull_contains(space, o), ErrorCode::kNoInteriorSphere,
          "no interior sphere: uniform rate lies outside the vertex hull");

  const Eigen::Index q = space.dim();
  Vector extents(q);
  for (Eigen::Index j = 0; j < q; ++j) {
    auto feasible = [&](double c) {
      Vector plus = o, minus = o;
      plus(j) += c;
      minus(j) -= c;
      return hull_contains(space, plus) && hull_contains(space, minus);
    };
    double lo = 0.0;
    double hi = std::min(o(j), 1.0 - o(j));
    if (feasible(hi)) {
      extents(j) = hi;
      continue;
    }
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
    extents(j) = lo;
  }
  return extents;
}

Sphere find_sphere(const RateSpace& space) {
  const Vector extents = axis_extents(space);
  // Extents at the LP tolerance scale are boundary artifacts, not room.
  require((extents.array() > 100 * kHullTolerance).all(),
          ErrorCode::kNoInteriorSphere,
          "no interior sphere: uniform rate lies on the hull boundary");
  // Inradius of the cross-polytope with semi-axes c_j.
  const double radius = 1.0 / std::sqrt(extents.array().inverse().square().sum());
  return {uniform_rate(space), radius};
}

RateSpace rate_space_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RateSpace space;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "diagonal") {
    space.kind = RateKind::kDiagonal;
  } else if (kind == "general") {
    space.kind = RateKind::kGeneral;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown rate space kind: " + kind);
  }
  space.classes = j.at("k").get<int>();
  require(space.classes >= 2, ErrorCode::kInvalidArgument,
          "rate space needs k >= 2");
  if (j.contains("vertices")) {
    for (const auto& row : j.at("vertices")) {
      const auto values = row.get<std::vector<double>>();
      require(static_cast<Eigen::Index>(values.size()) == space.dim(),
              ErrorCode::kDimensionMismatch,
              "vertex length does not match rate space dimension");
      Vector v = Eigen::Map<const Vector>(values.data(),
                                          static_cast<Eigen::Index>(values.size()));
      require((v.array() >= 0.0).all() && (v.array() <= 1.0).all(),
              ErrorCode::kInvalidArgument, "vertex entries must lie in [0,1]");
      space.vertices.push_back(std::move(v));
    }
  }
  return space;
}

RateSpace load_rate_space(const std::string& path) {
  return rate_space_from_json(detail::read_file(path));
}

}  // namespace qme
