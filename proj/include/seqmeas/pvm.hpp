#pragma once

#include <string>
#include <vector>

#include "seqmeas/density_operator.hpp"
#include "seqmeas/types.hpp"

namespace seqmeas {

/// Measured deviations of a projector family from an ideal PVM.
struct PvmDiagnostics {
  double idempotency_defect = 0.0;   // max over outcomes of max|P^2 - P|
  double hermiticity_defect = 0.0;   // max over outcomes of max|P - P^dagger|
  double completeness_defect = 0.0;  // max|sum_a P_a - I|
};

/// A complete set of orthogonal projectors summing to the identity.
/// Basis-truncated constructions may only satisfy this approximately; the
/// construction tolerance is declared, and the measured defects are kept.
class Pvm {
 public:
  Pvm(std::vector<Matrix> projectors, std::vector<std::string> labels = {},
      double tolerance = tol::projector);

  /// {F, I - F} with labels "0" and "1".
  static Pvm dichotomic(const Matrix& f, double tolerance = tol::projector);
  static Pvm identity(Index dim);

  Index dim() const { return projectors_.front().rows(); }
  std::size_t outcomes() const { return projectors_.size(); }
  const Matrix& projector(std::size_t a) const { return projectors_.at(a); }
  const std::string& label(std::size_t a) const { return labels_.at(a); }
  double tolerance() const { return tolerance_; }
  const PvmDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Matrix> projectors_;
  std::vector<std::string> labels_;
  double tolerance_;
  PvmDiagnostics diagnostics_;
};

/// Weighted mixture of PVMs: Omega(sigma) = sum_x p_x sum_a F^x_a sigma F^x_a.
class MeasurementChannel {
 public:
  MeasurementChannel(std::vector<Pvm> pvms, std::vector<double> weights);

  Index dim() const { return pvms_.front().dim(); }
  std::size_t size() const { return pvms_.size(); }
  const Pvm& pvm(std::size_t x) const { return pvms_.at(x); }
  const std::vector<double>& weights() const { return weights_; }

  DensityOperator apply(const DensityOperator& state) const;
  /// Raw matrix path without state validation (used by iteration loops).
  Matrix apply_matrix(const Matrix& sigma) const;

 private:
  std::vector<Pvm> pvms_;
  std::vector<double> weights_;
};

DensityOperator apply_channel(const MeasurementChannel& channel,
                              const DensityOperator& state);

}  // namespace seqmeas
