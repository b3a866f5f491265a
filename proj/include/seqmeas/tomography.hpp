#pragma once

#include <functional>
#include <span>
#include <vector>

#include "seqmeas/sequences.hpp"
#include "seqmeas/types.hpp"

namespace seqmeas::tomography {

/// <cos^{2M}(2kx)> for M = 0..count-1, obtained from the extreme
/// outcome-string probabilities of the alternating strategy:
///   moment M = P(0^{M+1}) + P(1^{M+1}).
/// stderrs is empty on the exact path. The cos-power basis is 4^M-conditioned
/// against the harmonic basis, so a single double per moment cannot carry a
/// harmonic back through order ~20; `low` holds sub-ulp compensation terms
/// (produced by harmonics_to_moments, empty for measured moments) that keep
/// analytic round trips exact.
struct MomentSet {
  std::vector<double> values;
  std::vector<double> stderrs;
  std::vector<double> low;
};

/// <cos(4 k j x)> for j = 0..count-1 (value at j = 0 is 1).
struct HarmonicSet {
  std::vector<double> values;
  std::vector<double> stderrs;
  /// Set when propagated standard errors exceed the requested tolerance:
  /// the 4^M-amplified inversion has outrun the input statistics.
  bool ill_conditioned = false;
};

/// Exact moments from a probability source: prob(outcomes) must return the
/// alternating-strategy probability of the given outcome string.
MomentSet exact_moments(
    const std::function<double(std::span<const int>)>& alternating_probability,
    int count);

/// Empirical moments from sampled trajectories of an alternating strategy
/// with length >= count: moment M counts the trajectories whose first M+1
/// outcomes are all equal, with binomial standard errors.
MomentSet empirical_moments(const sequences::SampleResult& samples, int count);

/// Inverts cos^{2M}(t) = 4^{-M} [C(2M,M) + 2 sum_j C(2M,M-j) cos(2jt)] by
/// forward substitution; exact on exact inputs. Standard errors are
/// propagated to first order assuming independent moments; the result is
/// flagged ill-conditioned when any propagated error exceeds stderr_tol.
HarmonicSet cospower_to_harmonics(const MomentSet& moments,
                                  double stderr_tol = 1.0);
MomentSet harmonics_to_moments(const HarmonicSet& harmonics);

/// Cosine-series coefficients of the even extension of rho on
/// [-pi/4k, pi/4k]: c_0 = (4k/pi) h_0, c_j = (8k/pi) h_j.
std::vector<double> cosine_coefficients(const HarmonicSet& harmonics, double k);

struct DensityReconstruction {
  std::vector<double> raw;      // truncated cosine series on the x-grid
  std::vector<double> clipped;  // negative excursions clipped, renormalized
  std::vector<double> stderrs;
};

/// Sampled reconstruction rho_hat(x) = sum_j c_j cos(4kjx). Requires the
/// tomography-legal regime k <= pi/(4L); rho is taken to vanish on the dead
/// zone (L, pi/4k]. Negative excursions are reconstruction error, not state
/// error, and are reported through the clipped variant; tests use raw.
DensityReconstruction reconstruct_density(const HarmonicSet& harmonics,
                                          double k, double box_length,
                                          std::span<const double> xs);

struct DecayFit {
  double exponent = 0.0;
  double residual = 0.0;
  int points = 0;
};

/// Log-log least squares of moment M against M (M >= 1). A finite density
/// slope at x = 0 gives exponents near -1.
DecayFit decay_probe(const MomentSet& moments);

}  // namespace seqmeas::tomography
