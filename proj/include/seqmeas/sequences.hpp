#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seqmeas/pvm.hpp"
#include "seqmeas/site_spin.hpp"
#include "seqmeas/types.hpp"

namespace seqmeas::sequences {

enum class StrategyKind { Fixed, Alternating, IidRandom };

/// Which PVM to apply at each step: a fixed index string, the alternating
/// +-+-... pattern, or iid random draws with declared weights (the draw
/// sequence is part of each trajectory record).
class Strategy {
 public:
  static Strategy fixed(std::vector<int> indices);
  static Strategy alternating(int length);
  static Strategy iid(int length, std::vector<double> weights);

  StrategyKind kind() const { return kind_; }
  int length() const { return length_; }
  bool deterministic() const { return kind_ != StrategyKind::IidRandom; }
  /// PVM index at a step (deterministic kinds only).
  int pvm_index(int step) const;
  const std::vector<double>& weights() const { return weights_; }

 private:
  StrategyKind kind_ = StrategyKind::Alternating;
  int length_ = 0;
  std::vector<int> indices_;
  std::vector<double> weights_;
};

/// Probability floor below which conditioning is treated as unreachable.
inline constexpr double probability_floor = 1e-14;

/// P(a_vec) = tr(F_{aN} ... F_{a1} sigma F_{a1} ... F_{aN}) for a
/// deterministic strategy over the channel's two site-diagonal measurements
/// (index 0 = plus, 1 = minus). Cost O(sites * N).
double outcome_probability(const SiteSpinChannel& channel,
                           const Strategy& strategy, const Matrix& sigma,
                           std::span<const int> outcomes);

/// Dense generic route over arbitrary PVMs.
double outcome_probability(std::span<const Pvm> pvms, const Strategy& strategy,
                           const DensityOperator& state,
                           std::span<const int> outcomes);

struct Posterior {
  DensityOperator state;
  double probability = 0.0;
};

/// F sigma F / tr(F sigma F); throws when the outcome probability is below
/// the floor.
Posterior posterior_state(const DensityOperator& state, const Pvm& pvm,
                          std::size_t outcome);

struct PurePosterior {
  Vector state;
  double probability = 0.0;
};

PurePosterior posterior_pure(const Vector& psi, const SiteSpinPvm& pvm,
                             int outcome);

struct TrajectoryRecord {
  std::string choices;   // PVM per step, '+'/'-'
  std::string outcomes;  // '0'/'1'
  std::uint64_t count = 0;
};

struct SampleResult {
  std::vector<TrajectoryRecord> records;  // sorted by (choices, outcomes)
  std::uint64_t total = 0;
};

/// Seeded Monte-Carlo trajectories from a pure initial state. Trajectory i
/// draws from an engine seeded with trajectory_seed(master_seed, i), so the
/// outcome multiset is bit-reproducible across runs and thread counts.
/// OpenMP-parallel over trajectories; `sample_trajectories_serial` is the
/// reference loop and must produce identical records.
SampleResult sample_trajectories(const SiteSpinChannel& channel,
                                 const Strategy& strategy, const Vector& psi0,
                                 std::uint64_t n_traj,
                                 std::uint64_t master_seed);
SampleResult sample_trajectories_serial(const SiteSpinChannel& channel,
                                        const Strategy& strategy,
                                        const Vector& psi0,
                                        std::uint64_t n_traj,
                                        std::uint64_t master_seed);

/// Dense-state variant for small dimensions (general mixed input).
SampleResult sample_trajectories(std::span<const Pvm> pvms,
                                 const Strategy& strategy,
                                 const DensityOperator& state,
                                 std::uint64_t n_traj,
                                 std::uint64_t master_seed);

}  // namespace seqmeas::sequences
