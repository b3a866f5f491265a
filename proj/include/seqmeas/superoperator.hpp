#pragma once

#include "seqmeas/pvm.hpp"
#include "seqmeas/types.hpp"

namespace seqmeas {

// Vectorization convention, used everywhere: row-major stacking
// sigma -> |sigma> with component (i*d + j) = sigma_ij, so that
// vec(A sigma B) = (A (x) B^T) vec(sigma) and tr(a^dagger b) = <a|b>.
Vector vectorize(const Matrix& m);
Matrix unvectorize(const Vector& v, Index dim);
Matrix kronecker(const Matrix& a, const Matrix& b);

/// The matrix of a measurement channel on vectorized operators:
/// Omega_bar = sum_{x,a} p_x F^x_a (x) (F^x_a)^*. Hermitian, PSD,
/// operator norm at most 1 for a valid channel.
class Superoperator {
 public:
  static constexpr Index default_dim_cap = 4096;

  static Superoperator from_channel(const MeasurementChannel& channel,
                                    Index dim_cap = default_dim_cap);

  Index hilbert_dim() const { return hilbert_dim_; }
  const Matrix& matrix() const { return matrix_; }

  Vector apply(const Vector& v) const { return matrix_ * v; }
  Matrix apply_to_operator(const Matrix& sigma) const;

  /// Largest eigenvalue magnitude (the matrix is Hermitian).
  double operator_norm() const;
  /// How far the top eigenvalue exceeds 1. In exact arithmetic the spectrum
  /// lies in [0,1]; truncation and rounding can push it above, and we report
  /// the excess rather than hide it.
  double spectral_excess() const;

  const Eigen::VectorXd& eigenvalues() const;
  const Matrix& eigenvectors() const;
  /// Omega_bar^N applied to a vectorized operator through the spectrum.
  Vector apply_power(const Vector& v, long steps) const;

  struct FixedPoint {
    Matrix projector;  // Pi_1 on the vectorized space
    Index rank = 0;
  };

  /// Projector onto eigenvectors with eigenvalue > 1 - tol ("Pi_1").
  /// Rank 0 is a legal result.
  FixedPoint fixed_point_projector(double tol = tol::fixed_point) const;

 private:
  Superoperator(Matrix m, Index hilbert_dim);
  void ensure_spectrum() const;

  Matrix matrix_;
  Index hilbert_dim_;
  mutable bool spectrum_ready_ = false;
  mutable Eigen::VectorXd eigenvalues_;
  mutable Matrix eigenvectors_;
};

}  // namespace seqmeas
