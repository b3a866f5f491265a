#include "seqmeas/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "seqmeas/rng.hpp"

namespace seqmeas::sequences {

Strategy Strategy::fixed(std::vector<int> indices) {
  Strategy s;
  s.kind_ = StrategyKind::Fixed;
  s.length_ = static_cast<int>(indices.size());
  for (int i : indices) {
    if (i < 0) throw std::invalid_argument("Strategy: negative PVM index");
  }
  s.indices_ = std::move(indices);
  return s;
}

Strategy Strategy::alternating(int length) {
  if (length < 0) throw std::invalid_argument("Strategy: negative length");
  Strategy s;
  s.kind_ = StrategyKind::Alternating;
  s.length_ = length;
  return s;
}

Strategy Strategy::iid(int length, std::vector<double> weights) {
  if (length < 0) throw std::invalid_argument("Strategy: negative length");
  double total = 0.0;
  for (double w : weights) {
    if (w <= 0.0) throw std::invalid_argument("Strategy: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("Strategy: weights must sum to 1");
  }
  Strategy s;
  s.kind_ = StrategyKind::IidRandom;
  s.length_ = length;
  s.weights_ = std::move(weights);
  return s;
}

int Strategy::pvm_index(int step) const {
  if (step < 0 || step >= length_) {
    throw std::out_of_range("Strategy: step out of range");
  }
  switch (kind_) {
    case StrategyKind::Fixed:
      return indices_[step];
    case StrategyKind::Alternating:
      return step % 2;
    case StrategyKind::IidRandom:
      throw std::logic_error("Strategy: iid strategies have no fixed index");
  }
  return 0;
}

double outcome_probability(const SiteSpinChannel& channel,
                           const Strategy& strategy, const Matrix& sigma,
                           std::span<const int> outcomes) {
  if (!strategy.deterministic()) {
    throw std::invalid_argument("outcome_probability: deterministic strategy required");
  }
  if (static_cast<int>(outcomes.size()) != strategy.length()) {
    throw std::invalid_argument("outcome_probability: outcome length mismatch");
  }
  if (sigma.rows() != channel.dim()) {
    throw std::invalid_argument("outcome_probability: dimension mismatch");
  }
  if (outcomes.empty()) return 1.0;
  const int n = channel.sites();
  double p = 0.0;
  for (int j = 0; j < n; ++j) {
    // A = P_{aN} ... P_{a1} on this site's 2x2 spin space
    double a00 = 1.0, a01 = 0.0, a10 = 0.0, a11 = 1.0;
    for (int t = 0; t < strategy.length(); ++t) {
      const SiteSpinPvm& pvm =
          strategy.pvm_index(t) == 0 ? channel.plus() : channel.minus();
      SpinBlock b = pvm.block(j);
      if (outcomes[t] == 1) b = b.complement();
      const double n00 = b.p00 * a00 + b.p01 * a10;
      const double n01 = b.p00 * a01 + b.p01 * a11;
      const double n10 = b.p01 * a00 + b.p11 * a10;
      const double n11 = b.p01 * a01 + b.p11 * a11;
      a00 = n00; a01 = n01; a10 = n10; a11 = n11;
    }
    // tr(A sigma_j A^dagger) with sigma_j the diagonal 2x2 site block
    const Complex s00 = sigma(2 * j, 2 * j);
    const Complex s01 = sigma(2 * j, 2 * j + 1);
    const Complex s10 = sigma(2 * j + 1, 2 * j);
    const Complex s11 = sigma(2 * j + 1, 2 * j + 1);
    const double row0 = (a00 * (s00 * a00 + s01 * a01) +
                         a01 * (s10 * a00 + s11 * a01)).real();
    const double row1 = (a10 * (s00 * a10 + s01 * a11) +
                         a11 * (s10 * a10 + s11 * a11)).real();
    p += row0 + row1;
  }
  return p;
}

double outcome_probability(std::span<const Pvm> pvms, const Strategy& strategy,
                           const DensityOperator& state,
                           std::span<const int> outcomes) {
  if (!strategy.deterministic()) {
    throw std::invalid_argument("outcome_probability: deterministic strategy required");
  }
  if (static_cast<int>(outcomes.size()) != strategy.length()) {
    throw std::invalid_argument("outcome_probability: outcome length mismatch");
  }
  Matrix op = Matrix::Identity(state.dim(), state.dim());
  for (int t = 0; t < strategy.length(); ++t) {
    const Pvm& pvm = pvms[strategy.pvm_index(t)];
    if (pvm.dim() != state.dim()) {
      throw std::invalid_argument("outcome_probability: dimension mismatch");
    }
    op = pvm.projector(outcomes[t]) * op;
  }
  return (op * state.matrix() * op.adjoint()).trace().real();
}

Posterior posterior_state(const DensityOperator& state, const Pvm& pvm,
                          std::size_t outcome) {
  if (pvm.dim() != state.dim()) {
    throw std::invalid_argument("posterior_state: dimension mismatch");
  }
  const Matrix& f = pvm.projector(outcome);
  Matrix num = f * state.matrix() * f;
  const double p = num.trace().real();
  if (p <= probability_floor) {
    throw std::runtime_error("posterior_state: outcome probability " +
                             std::to_string(p) + " below floor");
  }
  return Posterior{DensityOperator(DensityOperator::resymmetrize(num / p)), p};
}

PurePosterior posterior_pure(const Vector& psi, const SiteSpinPvm& pvm,
                             int outcome) {
  Vector projected = psi;
  pvm.project_vector(outcome, projected);
  const double p = projected.squaredNorm();
  if (p <= probability_floor) {
    throw std::runtime_error("posterior_pure: outcome probability below floor");
  }
  return PurePosterior{projected / std::sqrt(p), p};
}

namespace {

struct TrajectoryDraw {
  std::string choices;
  std::string outcomes;
};

TrajectoryDraw run_trajectory(const SiteSpinChannel& channel,
                              const Strategy& strategy, const Vector& psi0,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vector psi = psi0;
  TrajectoryDraw draw;
  draw.choices.reserve(strategy.length());
  draw.outcomes.reserve(strategy.length());
  for (int t = 0; t < strategy.length(); ++t) {
    int which;
    if (strategy.deterministic()) {
      which = strategy.pvm_index(t);
    } else {
      const double u = uniform_unit(rng);
      which = u < strategy.weights()[0] ? 0 : 1;
    }
    const SiteSpinPvm& pvm = which == 0 ? channel.plus() : channel.minus();
    Vector projected = psi;
    pvm.project_vector(0, projected);
    const double p0 = projected.squaredNorm();
    const double u = uniform_unit(rng);
    int outcome;
    if (u < p0) {
      outcome = 0;
      psi = projected / std::sqrt(p0);
    } else {
      outcome = 1;
      pvm.project_vector(1, psi);
      const double p1 = psi.squaredNorm();
      psi /= std::sqrt(std::max(p1, probability_floor));
    }
    draw.choices.push_back(which == 0 ? '+' : '-');
    draw.outcomes.push_back(outcome == 0 ? '0' : '1');
  }
  return draw;
}

SampleResult aggregate(std::vector<std::map<std::pair<std::string, std::string>,
                                            std::uint64_t>>& partials,
                       std::uint64_t total) {
  std::map<std::pair<std::string, std::string>, std::uint64_t> merged;
  for (auto& part : partials) {
    for (auto& [key, count] : part) merged[key] += count;
  }
  SampleResult result;
  result.total = total;
  for (auto& [key, count] : merged) {
    result.records.push_back(TrajectoryRecord{key.first, key.second, count});
  }
  return result;
}

}  // namespace

SampleResult sample_trajectories_serial(const SiteSpinChannel& channel,
                                        const Strategy& strategy,
                                        const Vector& psi0,
                                        std::uint64_t n_traj,
                                        std::uint64_t master_seed) {
  if (n_traj < 1) throw std::invalid_argument("sample_trajectories: n_traj < 1");
  if (psi0.size() != channel.dim()) {
    throw std::invalid_argument("sample_trajectories: dimension mismatch");
  }
  if (!strategy.deterministic() && strategy.weights().size() != 2) {
    throw std::invalid_argument(
        "sample_trajectories: the dichotomic channel takes two iid weights");
  }
  std::vector<std::map<std::pair<std::string, std::string>, std::uint64_t>>
      partials(1);
  for (std::uint64_t i = 0; i < n_traj; ++i) {
    TrajectoryDraw d = run_trajectory(channel, strategy, psi0,
                                      trajectory_seed(master_seed, i));
    ++partials[0][{std::move(d.choices), std::move(d.outcomes)}];
  }
  return aggregate(partials, n_traj);
}

SampleResult sample_trajectories(const SiteSpinChannel& channel,
                                 const Strategy& strategy, const Vector& psi0,
                                 std::uint64_t n_traj,
                                 std::uint64_t master_seed) {
  if (n_traj < 1) throw std::invalid_argument("sample_trajectories: n_traj < 1");
  if (psi0.size() != channel.dim()) {
    throw std::invalid_argument("sample_trajectories: dimension mismatch");
  }
  if (!strategy.deterministic() && strategy.weights().size() != 2) {
    throw std::invalid_argument(
        "sample_trajectories: the dichotomic channel takes two iid weights");
  }
#ifdef _OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif
  std::vector<std::map<std::pair<std::string, std::string>, std::uint64_t>>
      partials(threads);
  const std::int64_t n = static_cast<std::int64_t>(n_traj);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
#ifdef _OPENMP
    const int tid = omp_get_thread_num();
#else
    const int tid = 0;
#endif
    TrajectoryDraw d =
        run_trajectory(channel, strategy, psi0,
                       trajectory_seed(master_seed, static_cast<std::uint64_t>(i)));
    ++partials[tid][{std::move(d.choices), std::move(d.outcomes)}];
  }
  return aggregate(partials, n_traj);
}

SampleResult sample_trajectories(std::span<const Pvm> pvms,
                                 const Strategy& strategy,
                                 const DensityOperator& state,
                                 std::uint64_t n_traj,
                                 std::uint64_t master_seed) {
  if (n_traj < 1) throw std::invalid_argument("sample_trajectories: n_traj < 1");
  std::vector<std::map<std::pair<std::string, std::string>, std::uint64_t>>
      partials(1);
  for (std::uint64_t i = 0; i < n_traj; ++i) {
    std::mt19937_64 rng(trajectory_seed(master_seed, i));
    Matrix sigma = state.matrix();
    std::string choices, outcomes;
    for (int t = 0; t < strategy.length(); ++t) {
      int which;
      if (strategy.deterministic()) {
        which = strategy.pvm_index(t);
      } else {
        const double u = uniform_unit(rng);
        double acc = 0.0;
        which = static_cast<int>(strategy.weights().size()) - 1;
        for (std::size_t x = 0; x < strategy.weights().size(); ++x) {
          acc += strategy.weights()[x];
          if (u < acc) {
            which = static_cast<int>(x);
            break;
          }
        }
      }
      const Pvm& pvm = pvms[which];
      const double u = uniform_unit(rng);
      double acc = 0.0;
      std::size_t outcome = pvm.outcomes() - 1;
      std::vector<double> probs(pvm.outcomes());
      for (std::size_t a = 0; a < pvm.outcomes(); ++a) {
        probs[a] = (pvm.projector(a) * sigma).trace().real();
      }
      for (std::size_t a = 0; a < pvm.outcomes(); ++a) {
        acc += probs[a];
        if (u < acc) {
          outcome = a;
          break;
        }
      }
      const Matrix& f = pvm.projector(outcome);
      sigma = f * sigma * f;
      const double p = std::max(sigma.trace().real(), probability_floor);
      sigma /= p;
      choices.push_back(which == 0 ? '+' : (which == 1 ? '-' : char('0' + which)));
      outcomes.push_back(char('0' + static_cast<int>(outcome)));
    }
    ++partials[0][{std::move(choices), std::move(outcomes)}];
  }
  return aggregate(partials, n_traj);
}

}  // namespace seqmeas::sequences
