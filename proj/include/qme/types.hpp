#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace qme {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = Vec<double>;
using Matrix = Mat<double>;

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNoInteriorSphere,
  kAssumptionViolated,
  kRegularityViolation,
  kCostSignViolation,
  kNotFound,
  kStaleQuery,
  kNotReady,
};

/// Error raised by every module; `code()` lets callers (e.g. the session
/// server) map failures without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

inline void require_same_size(Eigen::Index lhs, Eigen::Index rhs,
                              const char* context) {
  if (lhs != rhs) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(context) + ": dimension mismatch (" +
                    std::to_string(lhs) + " vs " + std::to_string(rhs) + ")");
  }
}

}  // namespace qme
