#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seqmeas/density_operator.hpp"
#include "seqmeas/pvm.hpp"

namespace seqmeas {

/// tr(sigma^2), in (0, 1].
double purity(const DensityOperator& state);
double purity(const Matrix& sigma);

/// Von Neumann entropy in bits: -sum lambda log2 lambda.
double von_neumann_entropy_bits(const DensityOperator& state);
double von_neumann_entropy_bits(const Matrix& sigma);

/// (1/2)||a - b||_1 via singular values of the Hermitian difference.
double trace_distance(const DensityOperator& a, const DensityOperator& b);
double trace_distance(const Matrix& a, const Matrix& b);

/// sqrt(tr(a^dagger a)): the Hilbert-Schmidt (Frobenius) norm.
double hs_norm(const Matrix& a);

double trace_norm(const Matrix& a);

/// tr(sigma P_K) for a basis projector P_K; the convergence-in-trace-norm
/// diagnostic (plot K versus the large-step limit of this quantity).
double tail_mass(const DensityOperator& state, const Matrix& basis_projector);

struct MetricObserver {
  std::string name;
  std::function<double(const DensityOperator&)> fn;
};

struct MetricTrace {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;  // rows[t][m], t = 0..steps
};

/// Drives Omega^t(sigma) without materializing the superoperator; step t
/// reports the observers on Omega^t(sigma). Memory stays O(dim^2).
MetricTrace iterate_channel(const MeasurementChannel& channel,
                            const DensityOperator& state, int steps,
                            std::span<const MetricObserver> observers);

/// Same driver for an arbitrary one-step map on raw matrices.
MetricTrace iterate_map(const std::function<Matrix(const Matrix&)>& step,
                        const DensityOperator& state, int steps,
                        std::span<const MetricObserver> observers);

}  // namespace seqmeas
