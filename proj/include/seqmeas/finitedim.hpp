#pragma once

#include <vector>

#include "seqmeas/density_operator.hpp"
#include "seqmeas/metrics.hpp"
#include "seqmeas/superoperator.hpp"
#include "seqmeas/types.hpp"

namespace seqmeas::finitedim {

enum class BlockKind {
  BothRange,   // range(P) ∩ range(Q)
  FirstOnly,   // range(P) ∩ ker(Q)
  SecondOnly,  // ker(P) ∩ range(Q)
  Neither,     // ker(P) ∩ ker(Q)
  Pair,        // genuine 2x2 block at principal angle in (0, pi/2)
};

struct JordanBlock {
  BlockKind kind = BlockKind::Neither;
  double angle = 0.0;  // principal angle; meaningful for Pair blocks
  int col0 = -1;       // basis column(s) in JordanDecomposition::basis
  int col1 = -1;       // second column for Pair blocks, -1 otherwise
};

/// Basis in which two Hermitian projectors are simultaneous direct sums of
/// 1x1 and 2x2 blocks (principal-angle pairing of range/kernel
/// intersections). Pair blocks come first, sorted by angle descending; the
/// basis phase convention makes the output deterministic.
struct JordanDecomposition {
  Matrix basis;  // unitary; columns ordered per `blocks`
  std::vector<JordanBlock> blocks;

  Matrix reconstruct_first() const;
  Matrix reconstruct_second() const;
  std::size_t pair_count() const;
};

JordanDecomposition jordan_blocks(const Matrix& p, const Matrix& q,
                                  double angle_tol = 1e-8);

struct InvariantState {
  DensityOperator state;
  /// False when the projectors commute and no 2x2 block exists; the state is
  /// then supported on a 1x1 intersection block instead.
  bool from_pair_block = true;
};

/// The entropy-1 state I_2/2 on a chosen 2x2 block: invariant under both
/// dichotomic measurement channels.
InvariantState invariant_state(const JordanDecomposition& jd,
                               std::size_t pair_index = 0);

struct SaturationResult {
  MetricTrace trace;        // step, distance-to-limit, purity, entropy
  DensityOperator limit;    // Pi_1 applied to the vectorized input
  /// First step with trace distance <= threshold, found through the
  /// superoperator spectrum (may exceed the traced step range when the
  /// spectral gap is small); -1 if unreachable within 2^40 steps.
  long steps_to_limit = -1;
};

/// Iterates the two-projector channel with the given weights and reports
/// ||Omega^N(sigma) - sigma_hat||_1 against the Pi_1 limit.
SaturationResult saturation_demo(const Matrix& p, const Matrix& q,
                                 const DensityOperator& sigma, int steps,
                                 double weight_p = 0.5,
                                 double distance_threshold = 1e-8);

}  // namespace seqmeas::finitedim
