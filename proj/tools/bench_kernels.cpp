// Serial reference vs OpenMP kernels for the three hot paths: closed-form
// channel evolution, trajectory sampling, and the free-group generator sum.

#include <benchmark/benchmark.h>

#include <random>

#include "seqmeas/box.hpp"
#include "seqmeas/freegroup.hpp"
#include "seqmeas/random_states.hpp"
#include "seqmeas/sequences.hpp"

using namespace seqmeas;

namespace {

Matrix box_state(int grid_points) {
  box::BoxConfig cfg;
  cfg.grid_points = grid_points;
  cfg.modes = grid_points / 4;
  box::BoxRepresentation rep(cfg, box::Basis::Grid);
  const Vector psi = rep.mode_spin_state(1, Eigen::Vector2cd(1.0, Complex(0, 1)));
  return psi * psi.adjoint();
}

void bm_kernel_evolve_serial(benchmark::State& state) {
  const int g = static_cast<int>(state.range(0));
  box::BoxConfig cfg;
  cfg.grid_points = g;
  cfg.modes = g / 4;
  box::BoxRepresentation rep(cfg, box::Basis::Grid);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  const Matrix sigma = box_state(g);
  for (auto _ : state) {
    benchmark::DoNotOptimize(channel.evolve_serial(sigma, 10));
  }
}

void bm_kernel_evolve_omp(benchmark::State& state) {
  const int g = static_cast<int>(state.range(0));
  box::BoxConfig cfg;
  cfg.grid_points = g;
  cfg.modes = g / 4;
  box::BoxRepresentation rep(cfg, box::Basis::Grid);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  const Matrix sigma = box_state(g);
  for (auto _ : state) {
    benchmark::DoNotOptimize(channel.evolve(sigma, 10));
  }
}

void bm_sampling_serial(benchmark::State& state) {
  box::BoxConfig cfg;
  cfg.grid_points = 128;
  cfg.modes = 32;
  box::BoxRepresentation rep(cfg, box::Basis::Grid);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  const Vector psi = rep.mode_spin_state(1, Eigen::Vector2cd(1.0, 0.0));
  const auto strat = sequences::Strategy::alternating(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sequences::sample_trajectories_serial(channel, strat, psi, 2000, 7));
  }
}

void bm_sampling_omp(benchmark::State& state) {
  box::BoxConfig cfg;
  cfg.grid_points = 128;
  cfg.modes = 32;
  box::BoxRepresentation rep(cfg, box::Basis::Grid);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  const Vector psi = rep.mode_spin_state(1, Eigen::Vector2cd(1.0, 0.0));
  const auto strat = sequences::Strategy::alternating(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sequences::sample_trajectories(channel, strat, psi, 2000, 7));
  }
}

void bm_generator_sum_serial(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  const auto ws = freegroup::WordSpace::enumerate(5, l);
  std::vector<double> x(ws.word_count(), 1.0), y(ws.word_count());
  for (auto _ : state) {
    freegroup::generator_sum_apply_serial(ws, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

void bm_generator_sum_omp(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  const auto ws = freegroup::WordSpace::enumerate(5, l);
  std::vector<double> x(ws.word_count(), 1.0), y(ws.word_count());
  for (auto _ : state) {
    freegroup::generator_sum_apply(ws, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

}  // namespace

BENCHMARK(bm_kernel_evolve_serial)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_kernel_evolve_omp)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_sampling_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_sampling_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_generator_sum_serial)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_generator_sum_omp)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
