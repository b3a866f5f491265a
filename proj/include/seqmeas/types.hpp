#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace seqmeas {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace tol {

// Shared numerical tolerances. States are validated against these at
// construction; channels re-symmetrize after every application to keep
// drift below them.
inline constexpr double hermitian = 1e-12;
inline constexpr double trace = 1e-10;
inline constexpr double eigenvalue_floor = -1e-10;
inline constexpr double projector = 1e-10;
inline constexpr double fixed_point = 1e-10;

}  // namespace tol

}  // namespace seqmeas
