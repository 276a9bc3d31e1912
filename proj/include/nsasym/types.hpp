#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace nsasym {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Argument outside the mathematical domain of an operation (A <= 1, t <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Evaluation at a point where the field is singular or not finite.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller-supplied hypothesis (envelope, flux condition, ...) violated on a sample.
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical procedure failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

std::string format_point(const Vec3& x);

}  // namespace nsasym
