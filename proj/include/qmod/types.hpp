#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qmod {

using cx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kDefaultTol = 1e-10;

/// Frobenius-style sup norm used for residual reporting: max over blocks of
/// the operator 2-norm would be expensive, so we use the elementwise max
/// modulus, which bounds it up to dimension factors at desk scale.
inline double sup_abs(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

}  // namespace qmod
