#include "seqmeas/random_states.hpp"

#include <stdexcept>

#include "seqmeas/rng.hpp"

namespace seqmeas {

namespace {

Matrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  // Box-Muller on the specified uniform so draws are engine-portable.
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double u1 = std::max(uniform_unit(rng), 1e-300);
      const double u2 = uniform_unit(rng);
      const double r = std::sqrt(-2.0 * std::log(u1));
      m(i, j) = Complex(r * std::cos(2.0 * M_PI * u2),
                        r * std::sin(2.0 * M_PI * u2));
    }
  }
  return m;
}

}  // namespace

Vector random_pure_state(Index dim, std::mt19937_64& rng) {
  Vector v = gaussian_matrix(dim, 1, rng).col(0);
  return v / v.norm();
}

DensityOperator random_density_matrix(Index dim, std::mt19937_64& rng) {
  Matrix a = gaussian_matrix(dim, dim, rng);
  Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return DensityOperator(DensityOperator::resymmetrize(rho));
}

Matrix random_projector(Index dim, Index rank, std::mt19937_64& rng) {
  if (rank < 0 || rank > dim) {
    throw std::invalid_argument("random_projector: rank out of range");
  }
  if (rank == 0) return Matrix::Zero(dim, dim);
  Matrix a = gaussian_matrix(dim, rank, rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, rank);
  Matrix p = q * q.adjoint();
  return DensityOperator::resymmetrize(p);
}

}  // namespace seqmeas
