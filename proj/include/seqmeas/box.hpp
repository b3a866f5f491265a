#pragma once

#include <span>
#include <utility>
#include <vector>

#include "seqmeas/pvm.hpp"
#include "seqmeas/site_spin.hpp"
#include "seqmeas/types.hpp"

namespace seqmeas::box {

/// Spin-1/2 particle in a 1-D box of length L, Dirichlet walls, hbar = 1.
/// The measurement field couples spin to position through the wavenumber k;
/// tomography additionally requires k <= pi/(4L).
struct BoxConfig {
  double length = 1.0;       // L
  double mass = 1.0;         // m
  double wavenumber = 0.25 * M_PI;  // k, largest tomography-legal value at L=1
  int modes = 64;            // D, energy-basis truncation
  int grid_points = 256;     // G

  void validate() const;
  bool tomography_legal() const;
  /// E_n = pi^2 n^2 / (2 m L^2), n = 1, 2, ...
  double energy_level(int n) const;
};

std::vector<double> energy_levels(const BoxConfig& cfg, int count);

enum class Basis { Grid, EnergyModes };

/// Discretization of L^2([0, L]) (x) C^2. The grid basis samples the box at
/// midpoints x_j = (j + 1/2) L / G and is the source of truth for channel
/// dynamics (the measurement projectors are exact there). The energy basis
/// keeps D sine modes and exists for energy/entropy bookkeeping; its
/// truncated projectors are only approximately idempotent, which is measured
/// and reported rather than hidden. Composite index = 2*site + spin.
class BoxRepresentation {
 public:
  BoxRepresentation(BoxConfig cfg, Basis basis);

  const BoxConfig& config() const { return cfg_; }
  Basis basis() const { return basis_; }
  int spatial_dim() const;
  Index dim() const { return 2 * static_cast<Index>(spatial_dim()); }

  std::vector<double> grid_points() const;
  double grid_weight() const { return cfg_.length / cfg_.grid_points; }

  /// Unit-norm grid samples of Psi_n (n = 1..G-1 exactly orthonormal under
  /// the midpoint rule).
  RealVector mode_samples(int n) const;
  /// G x count matrix of mode samples (orthonormal columns).
  RealMatrix sine_modes(int count) const;

  /// |mode n> (x) |spin>, as a pure state vector in this representation.
  Vector mode_spin_state(int n, const Eigen::Vector2cd& spin) const;

  struct StateTerm {
    int mode = 1;
    Eigen::Vector2cd spin = Eigen::Vector2cd(1.0, 0.0);
    Complex amplitude = 1.0;
  };
  /// Normalized superposition of mode (x) spin terms.
  Vector superposition_state(std::span<const StateTerm> terms) const;

 private:
  BoxConfig cfg_;
  Basis basis_;
};

/// <n| cos(2kx) |m> and <n| sin(2kx) |m> on the first D sine modes.
struct TrigMatrices {
  RealMatrix c;
  RealMatrix s;
};

/// Closed-form matrix elements via product-to-sum decomposition, with
/// analytic limit branches at resonant denominators (n +- m)pi/L = +-2k.
TrigMatrices trig_matrices_closed_form(const BoxConfig& cfg);
/// Composite-Simpson oracle for the same integrals.
TrigMatrices trig_matrices_quadrature(const BoxConfig& cfg, int panels = 10000);

/// Grid-basis F projectors: block-diagonal over grid points with rank-1
/// spin blocks at angle k x_j; exactly idempotent and Hermitian.
std::pair<SiteSpinPvm, SiteSpinPvm> build_f_projectors_grid(
    const BoxRepresentation& rep);

struct EnergyProjectors {
  Pvm plus;
  Pvm minus;
  PvmDiagnostics plus_diagnostics;
  PvmDiagnostics minus_diagnostics;
};

/// Energy-basis F = (1/2)(I(x)I + C(x)Z +- S(x)X); approximate idempotency
/// is measured and reported. Throws if closed form and quadrature disagree
/// beyond 1e-8 when verify is set.
EnergyProjectors build_f_projectors_energy(const BoxRepresentation& rep,
                                           bool verify = false);

/// The two-measurement random channel of the model on the grid
/// representation (weights 1/2 each). kernel evolution and the direct
/// projector route both live on the returned channel.
SiteSpinChannel heat_vision_channel(const BoxRepresentation& rep);

/// Omega^N(sigma) through the closed-form kernel (grid representation).
Matrix kernel_evolve(const BoxRepresentation& rep, const Matrix& sigma,
                     long steps);

/// phi(N)^2 = 2 int_{-1}^{1} (1-|x|) [cos^{4N}(kLx) + sin^{4N}(kLx)] dx,
/// evaluated by adaptive quadrature (relative error 1e-8).
double phi_bound_squared(long steps, const BoxConfig& cfg);
double phi_bound(long steps, const BoxConfig& cfg);

/// E^(N) = E^(0) + (k^2/m) N.
double predicted_energy(double e0, long steps, const BoxConfig& cfg);

struct EnergyMeasurement {
  double energy = 0.0;
  std::vector<double> mode_populations;  // n = 1..D
  double top_decile_population = 0.0;
  bool truncation_flagged = false;  // top-decile mode population > 1e-6
};

/// Sum_n E_n <n| tr_spin sigma |n> over the first D modes. Grid states are
/// transformed with the discrete sine transform; heat vision pushes
/// population upward forever, so the top-decile flag marks measurements the
/// truncation can no longer support.
EnergyMeasurement measured_energy(const BoxRepresentation& rep,
                                  const Matrix& sigma);

/// Position populations <x_j| tr_spin sigma |x_j> (grid, sums to 1).
RealVector position_density(const Matrix& sigma);
/// Spin-traced position kernel (G x G).
Matrix position_kernel(const Matrix& sigma);
/// Mode populations <n| tr_spin sigma |n>, n = 1..count.
std::vector<double> mode_populations(const BoxRepresentation& rep,
                                     const Matrix& sigma, int count);
/// tr(sigma P_K) with P_K the projector onto modes 1..K+1 (both spins).
double tail_mass_modes(const BoxRepresentation& rep, const Matrix& sigma,
                       int k_cut);

/// Finite-truncation heuristic for the 0-band property: level clusters
/// strictly increase and no cluster dominates the list.
bool hamiltonian_is_zero_band(std::span<const double> levels);

}  // namespace seqmeas::box
