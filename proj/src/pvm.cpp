#include "seqmeas/pvm.hpp"

#include <cmath>
#include <stdexcept>

namespace seqmeas {

namespace {

PvmDiagnostics measure(const std::vector<Matrix>& projectors) {
  PvmDiagnostics d;
  const Index n = projectors.front().rows();
  Matrix sum = Matrix::Zero(n, n);
  for (const Matrix& p : projectors) {
    d.idempotency_defect =
        std::max(d.idempotency_defect, (p * p - p).cwiseAbs().maxCoeff());
    d.hermiticity_defect =
        std::max(d.hermiticity_defect, (p - p.adjoint()).cwiseAbs().maxCoeff());
    sum += p;
  }
  d.completeness_defect = (sum - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  return d;
}

}  // namespace

Pvm::Pvm(std::vector<Matrix> projectors, std::vector<std::string> labels,
         double tolerance)
    : projectors_(std::move(projectors)),
      labels_(std::move(labels)),
      tolerance_(tolerance) {
  if (projectors_.empty()) throw std::invalid_argument("Pvm: no projectors");
  const Index n = projectors_.front().rows();
  for (const Matrix& p : projectors_) {
    if (p.rows() != n || p.cols() != n) {
      throw std::invalid_argument("Pvm: projector dimensions disagree");
    }
  }
  if (labels_.empty()) {
    for (std::size_t a = 0; a < projectors_.size(); ++a) {
      labels_.push_back(std::to_string(a));
    }
  }
  if (labels_.size() != projectors_.size()) {
    throw std::invalid_argument("Pvm: label count differs from outcome count");
  }
  diagnostics_ = measure(projectors_);
  if (diagnostics_.idempotency_defect > tolerance_ ||
      diagnostics_.hermiticity_defect > tolerance_ ||
      diagnostics_.completeness_defect > tolerance_) {
    throw std::invalid_argument(
        "Pvm: projector family violates declared tolerance " +
        std::to_string(tolerance_) + " (idempotency " +
        std::to_string(diagnostics_.idempotency_defect) + ", completeness " +
        std::to_string(diagnostics_.completeness_defect) + ")");
  }
}

Pvm Pvm::dichotomic(const Matrix& f, double tolerance) {
  const Index n = f.rows();
  std::vector<Matrix> ps;
  ps.push_back(f);
  ps.push_back(Matrix::Identity(n, n) - f);
  return Pvm(std::move(ps), {"0", "1"}, tolerance);
}

Pvm Pvm::identity(Index dim) {
  std::vector<Matrix> ps;
  ps.push_back(Matrix::Identity(dim, dim));
  return Pvm(std::move(ps), {"0"});
}

MeasurementChannel::MeasurementChannel(std::vector<Pvm> pvms,
                                       std::vector<double> weights)
    : pvms_(std::move(pvms)), weights_(std::move(weights)) {
  if (pvms_.empty()) throw std::invalid_argument("MeasurementChannel: no PVMs");
  if (weights_.size() != pvms_.size()) {
    throw std::invalid_argument("MeasurementChannel: weight count mismatch");
  }
  const Index n = pvms_.front().dim();
  double total = 0.0;
  for (std::size_t x = 0; x < pvms_.size(); ++x) {
    if (pvms_[x].dim() != n) {
      throw std::invalid_argument("MeasurementChannel: PVM dims disagree");
    }
    if (weights_[x] <= 0.0) {
      throw std::invalid_argument("MeasurementChannel: weights must be strictly positive");
    }
    total += weights_[x];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("MeasurementChannel: weights sum to " +
                                std::to_string(total) + ", expected 1");
  }
}

Matrix MeasurementChannel::apply_matrix(const Matrix& sigma) const {
  if (sigma.rows() != dim() || sigma.cols() != dim()) {
    throw std::invalid_argument("MeasurementChannel: state dimension mismatch");
  }
  Matrix out = Matrix::Zero(dim(), dim());
  for (std::size_t x = 0; x < pvms_.size(); ++x) {
    for (std::size_t a = 0; a < pvms_[x].outcomes(); ++a) {
      const Matrix& p = pvms_[x].projector(a);
      out.noalias() += weights_[x] * (p * sigma * p);
    }
  }
  return DensityOperator::resymmetrize(out);
}

DensityOperator MeasurementChannel::apply(const DensityOperator& state) const {
  return DensityOperator(apply_matrix(state.matrix()));
}

DensityOperator apply_channel(const MeasurementChannel& channel,
                              const DensityOperator& state) {
  return channel.apply(state);
}

}  // namespace seqmeas
