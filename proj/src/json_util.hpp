#pragma once

#include "qme/types.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace qme::detail {

using json = nlohmann::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kNotFound, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kNotFound,
          "cannot write " + path);
  out << text;
}

inline json to_json_array(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline json to_json_array(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(to_json_array(Vector(m.row(i).transpose())));
  }
  return rows;
}

inline Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Eigen::Index>(values.size()));
}

inline Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  Matrix m(rows, rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector row = vector_from_json(j.at(static_cast<std::size_t>(i)));
    require_same_size(row.size(), m.cols(), "matrix row");
    m.row(i) = row.transpose();
  }
  return m;
}

}  // namespace qme::detail
