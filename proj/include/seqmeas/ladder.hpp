#pragma once

#include <span>
#include <utility>
#include <vector>

#include "seqmeas/site_spin.hpp"
#include "seqmeas/types.hpp"

namespace seqmeas::ladder {

/// Discrete position ladder n = 1..sites with a spin, measured by the
/// site-diagonal projectors G+- at angle k*n. Unbounded information
/// extraction with no heat vision: the channel converges in trace norm and
/// a diagonal energy operator stays constant.
struct LadderConfig {
  int sites = 16;
  double wavenumber = 1.0;  // k; irrationality is modeled as non-resonance

  void validate() const;
};

std::pair<SiteSpinPvm, SiteSpinPvm> build_g_projectors(int sites, double k);

SiteSpinChannel ladder_channel(const LadderConfig& cfg);

/// lim_N Omega^N(sigma) = sum_n <n|tr_spin(sigma)|n> |n><n| (x) I_2/2.
Matrix analytic_limit(const Matrix& sigma);

struct ResonanceReport {
  bool resonant = false;
  /// Largest channel eigenvalue strictly below 1: the empirical spectral gap
  /// is 1 minus this.
  double slowest_factor = 0.0;
};

/// Detects coherences that the truncated index range cannot decay (some
/// 2k(n-m) or 2kn a multiple of 2pi within tolerance).
ResonanceReport resonance_check(const LadderConfig& cfg, double tol = 1e-12);

/// Energy under the diagonal 0-band operator H = sum_n n^2 |n><n| (x) I_2.
double ladder_energy(const Matrix& sigma);

struct ConvergencePoint {
  long step = 0;
  double trace_distance_to_limit = 0.0;
  double energy = 0.0;
  double purity = 0.0;
  double entropy_bits = 0.0;
};

/// Evaluates Omega^N(sigma) in closed form on a step schedule and reports
/// distance to the analytic limit plus the invariance diagnostics.
std::vector<ConvergencePoint> convergence_curve(const LadderConfig& cfg,
                                                const Matrix& sigma0,
                                                std::span<const long> steps);

/// First step on a doubling schedule where the trace distance to the limit
/// drops to the threshold; also verifies monotonicity along the schedule.
struct ConvergenceSearch {
  long steps_to_threshold = -1;
  bool monotone = true;
  std::vector<ConvergencePoint> curve;
};
ConvergenceSearch find_convergence(const LadderConfig& cfg,
                                   const Matrix& sigma0, double threshold,
                                   long max_steps);

}  // namespace seqmeas::ladder
