#include "seqmeas/superoperator.hpp"

#include <cmath>
#include <stdexcept>

namespace seqmeas {

Vector vectorize(const Matrix& m) {
  const Index d = m.rows();
  Vector v(d * d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) v(i * d + j) = m(i, j);
  }
  return v;
}

Matrix unvectorize(const Vector& v, Index dim) {
  if (v.size() != dim * dim) {
    throw std::invalid_argument("unvectorize: size is not dim^2");
  }
  Matrix m(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) m(i, j) = v(i * dim + j);
  }
  return m;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index k = 0; k < a.cols(); ++k) {
      out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
    }
  }
  return out;
}

Superoperator::Superoperator(Matrix m, Index hilbert_dim)
    : matrix_(std::move(m)), hilbert_dim_(hilbert_dim) {}

Superoperator Superoperator::from_channel(const MeasurementChannel& channel,
                                          Index dim_cap) {
  const Index d = channel.dim();
  if (d > dim_cap) {
    throw std::invalid_argument(
        "Superoperator: dim " + std::to_string(d) + " exceeds dense cap " +
        std::to_string(dim_cap) + "; use the iterative path (iterate_channel)");
  }
  Matrix m = Matrix::Zero(d * d, d * d);
  for (std::size_t x = 0; x < channel.size(); ++x) {
    const double w = channel.weights()[x];
    const Pvm& pvm = channel.pvm(x);
    for (std::size_t a = 0; a < pvm.outcomes(); ++a) {
      const Matrix& p = pvm.projector(a);
      m.noalias() += w * kronecker(p, p.conjugate());
    }
  }
  return Superoperator(std::move(m), d);
}

Matrix Superoperator::apply_to_operator(const Matrix& sigma) const {
  return unvectorize(matrix_ * vectorize(sigma), hilbert_dim_);
}

void Superoperator::ensure_spectrum() const {
  if (spectrum_ready_) return;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix_);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Superoperator: eigendecomposition failed");
  }
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  spectrum_ready_ = true;
}

double Superoperator::operator_norm() const {
  ensure_spectrum();
  return std::max(std::abs(eigenvalues_.minCoeff()),
                  std::abs(eigenvalues_.maxCoeff()));
}

double Superoperator::spectral_excess() const {
  ensure_spectrum();
  return eigenvalues_.maxCoeff() - 1.0;
}

const Eigen::VectorXd& Superoperator::eigenvalues() const {
  ensure_spectrum();
  return eigenvalues_;
}

const Matrix& Superoperator::eigenvectors() const {
  ensure_spectrum();
  return eigenvectors_;
}

Vector Superoperator::apply_power(const Vector& v, long steps) const {
  if (steps < 0) throw std::invalid_argument("apply_power: steps < 0");
  ensure_spectrum();
  Vector coeffs = eigenvectors_.adjoint() * v;
  for (Index i = 0; i < coeffs.size(); ++i) {
    coeffs(i) *= std::pow(eigenvalues_(i), static_cast<double>(steps));
  }
  return eigenvectors_ * coeffs;
}

Superoperator::FixedPoint Superoperator::fixed_point_projector(double tol) const {
  ensure_spectrum();
  FixedPoint fp;
  const Index n = matrix_.rows();
  fp.projector = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    if (eigenvalues_(i) > 1.0 - tol) {
      fp.projector.noalias() +=
          eigenvectors_.col(i) * eigenvectors_.col(i).adjoint();
      ++fp.rank;
    }
  }
  return fp;
}

}  // namespace seqmeas
