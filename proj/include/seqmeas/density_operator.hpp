#pragma once

#include <string>

#include "seqmeas/types.hpp"

namespace seqmeas {

/// Level of validation performed when wrapping a matrix as a state.
/// Basic checks hermiticity and trace (O(d^2)); Full additionally checks
/// positive semidefiniteness through an eigendecomposition (O(d^3)).
enum class CheckLevel { Basic, Full };

/// A unit-trace, Hermitian, positive-semidefinite operator on a declared
/// finite-dimensional space. The truncated stand-in for a trace-class state.
class DensityOperator {
 public:
  explicit DensityOperator(Matrix matrix, CheckLevel level = CheckLevel::Basic);

  static DensityOperator pure(const Vector& psi);
  static DensityOperator maximally_mixed(Index dim);

  Index dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }

  /// (sigma + sigma^dagger)/2, applied after channel steps to suppress
  /// rounding-induced asymmetry.
  static Matrix resymmetrize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

  /// Re-runs validation at the requested level; throws on violation.
  void validate(CheckLevel level) const;

 private:
  Matrix matrix_;
};

}  // namespace seqmeas
