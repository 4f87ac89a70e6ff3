#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace fgneg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

// Tolerances shared across modules.
inline constexpr double kStructuralTol = 1e-12;
inline constexpr double kSpectralTol = 1e-9;
inline constexpr double kOracleTol = 1e-8;

}  // namespace fgneg
