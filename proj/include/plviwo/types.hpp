#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace plviwo {

template <typename S>
using Vec2 = Eigen::Matrix<S, 2, 1>;
template <typename S>
using Vec3 = Eigen::Matrix<S, 3, 1>;
template <typename S>
using Vec4 = Eigen::Matrix<S, 4, 1>;
template <typename S>
using Vec6 = Eigen::Matrix<S, 6, 1>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using Mat2 = Eigen::Matrix<S, 2, 2>;
template <typename S>
using Mat3 = Eigen::Matrix<S, 3, 3>;
template <typename S>
using Mat4 = Eigen::Matrix<S, 4, 4>;
template <typename S>
using Mat6 = Eigen::Matrix<S, 6, 6>;
template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;
using Vec4d = Vec4<double>;
using Vec6d = Vec6<double>;
using VecXd = VecX<double>;
using Mat2d = Mat2<double>;
using Mat3d = Mat3<double>;
using Mat4d = Mat4<double>;
using Mat6d = Mat6<double>;
using MatXd = MatX<double>;

enum class ErrorCode {
  NonPositiveDepth,
  DegenerateProjection,
  DegenerateLine,
  IllConditioned,
  NegativeDepth,
  CoincidentPoints,
  ParallelPlanes,
  NoStrategy,
  NonMonotonicTime,
  WindowFull,
  WindowEmpty,
  MissingClone,
  SingularInnovation,
  SingularNormalEquations,
  InvalidConfig,
  SchemaViolation,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::DegenerateProjection: return "DegenerateProjection";
    case ErrorCode::DegenerateLine: return "DegenerateLine";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NegativeDepth: return "NegativeDepth";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::ParallelPlanes: return "ParallelPlanes";
    case ErrorCode::NoStrategy: return "NoStrategy";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::WindowFull: return "WindowFull";
    case ErrorCode::WindowEmpty: return "WindowEmpty";
    case ErrorCode::MissingClone: return "MissingClone";
    case ErrorCode::SingularInnovation: return "SingularInnovation";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
  }
  return "Unknown";
}

// Single exception type for the whole stack; code() tells callers which
// contract was violated so recoverable failures (e.g. a degenerate
// triangulation) can be filtered from programming errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace plviwo
