#pragma once

#include <string>

#include <Eigen/Dense>

#include "fraglink/errors.hpp"

namespace fraglink::detail {

inline constexpr double kMinReciprocalCondition = 1e-13;

/// LU solve that refuses numerically singular systems.
template <typename Rhs>
Eigen::MatrixXd solve_checked(const Eigen::MatrixXd& a, const Rhs& rhs, const std::string& what) {
  if (a.rows() == 0) return Eigen::MatrixXd(0, rhs.cols());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > kMinReciprocalCondition)) {
    throw NumericError(what + ": system is numerically singular (rcond " + std::to_string(rcond) + ")");
  }
  return lu.solve(rhs);
}

}  // namespace fraglink::detail
