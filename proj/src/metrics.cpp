#include "seqmeas/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace seqmeas {

double purity(const Matrix& sigma) { return sigma.squaredNorm(); }

double purity(const DensityOperator& state) { return purity(state.matrix()); }

double von_neumann_entropy_bits(const Matrix& sigma) {
  const double herm = (sigma - sigma.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol::hermitian) {
    throw std::invalid_argument("entropy: operator is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sigma, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double lambda = solver.eigenvalues()(i);
    if (lambda > 0.0) s -= lambda * std::log2(lambda);
  }
  return s;
}

double von_neumann_entropy_bits(const DensityOperator& state) {
  return von_neumann_entropy_bits(state.matrix());
}

double trace_norm(const Matrix& a) {
  const double herm = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (herm <= tol::hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

double trace_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("trace_distance: dimension mismatch");
  }
  return 0.5 * trace_norm(a - b);
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  return trace_distance(a.matrix(), b.matrix());
}

double hs_norm(const Matrix& a) { return a.norm(); }

double tail_mass(const DensityOperator& state, const Matrix& basis_projector) {
  if (basis_projector.rows() != state.dim()) {
    throw std::invalid_argument("tail_mass: projector dimension mismatch");
  }
  return (state.matrix() * basis_projector).trace().real();
}

namespace {

MetricTrace run_iteration(const std::function<Matrix(const Matrix&)>& step,
                          const DensityOperator& state, int steps,
                          std::span<const MetricObserver> observers) {
  if (steps < 0) throw std::invalid_argument("iterate: steps must be >= 0");
  MetricTrace trace;
  for (const auto& obs : observers) trace.names.push_back(obs.name);
  Matrix sigma = state.matrix();
  for (int t = 0; t <= steps; ++t) {
    DensityOperator current(sigma);
    std::vector<double> row;
    row.reserve(observers.size());
    for (const auto& obs : observers) {
      try {
        row.push_back(obs.fn(current));
      } catch (const std::exception& e) {
        throw std::runtime_error("observer '" + obs.name + "' failed at step " +
                                 std::to_string(t) + ": " + e.what());
      }
    }
    trace.rows.push_back(std::move(row));
    if (t < steps) sigma = step(sigma);
  }
  return trace;
}

}  // namespace

MetricTrace iterate_channel(const MeasurementChannel& channel,
                            const DensityOperator& state, int steps,
                            std::span<const MetricObserver> observers) {
  return run_iteration(
      [&channel](const Matrix& sigma) { return channel.apply_matrix(sigma); },
      state, steps, observers);
}

MetricTrace iterate_map(const std::function<Matrix(const Matrix&)>& step,
                        const DensityOperator& state, int steps,
                        std::span<const MetricObserver> observers) {
  return run_iteration(step, state, steps, observers);
}

}  // namespace seqmeas
