#include "seqmeas/density_operator.hpp"

#include <cmath>
#include <stdexcept>

namespace seqmeas {

namespace {

void check_basic(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw std::invalid_argument("DensityOperator: matrix must be square and nonempty");
  }
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol::hermitian) {
    throw std::invalid_argument("DensityOperator: not Hermitian (defect " +
                                std::to_string(herm) + ")");
  }
  const double tr_err = std::abs(m.trace() - Complex(1.0, 0.0));
  if (tr_err > tol::trace) {
    throw std::invalid_argument("DensityOperator: trace differs from 1 by " +
                                std::to_string(tr_err));
  }
}

void check_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  const double lambda_min = solver.eigenvalues().minCoeff();
  if (lambda_min < tol::eigenvalue_floor) {
    throw std::invalid_argument("DensityOperator: eigenvalue " +
                                std::to_string(lambda_min) + " below PSD floor");
  }
}

}  // namespace

DensityOperator::DensityOperator(Matrix matrix, CheckLevel level)
    : matrix_(std::move(matrix)) {
  check_basic(matrix_);
  if (level == CheckLevel::Full) check_psd(matrix_);
}

DensityOperator DensityOperator::pure(const Vector& psi) {
  const double n = psi.norm();
  if (n <= 0.0) throw std::invalid_argument("DensityOperator::pure: zero vector");
  Vector unit = psi / n;
  return DensityOperator(unit * unit.adjoint());
}

DensityOperator DensityOperator::maximally_mixed(Index dim) {
  if (dim < 1) throw std::invalid_argument("DensityOperator: dim must be positive");
  return DensityOperator(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

void DensityOperator::validate(CheckLevel level) const {
  check_basic(matrix_);
  if (level == CheckLevel::Full) check_psd(matrix_);
}

}  // namespace seqmeas
