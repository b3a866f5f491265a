#pragma once

#include <random>

#include "seqmeas/density_operator.hpp"
#include "seqmeas/types.hpp"

namespace seqmeas {

Vector random_pure_state(Index dim, std::mt19937_64& rng);

/// Ginibre construction: A A^dagger normalized to unit trace.
DensityOperator random_density_matrix(Index dim, std::mt19937_64& rng);

/// Orthogonal projector onto a Haar-ish random subspace of the given rank
/// (QR of a complex Gaussian matrix).
Matrix random_projector(Index dim, Index rank, std::mt19937_64& rng);

}  // namespace seqmeas
