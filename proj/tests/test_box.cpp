#include <doctest.h>

#include <cmath>

#include "seqmeas/box.hpp"
#include "seqmeas/metrics.hpp"
#include "seqmeas/quadrature.hpp"
#include "seqmeas/random_states.hpp"
#include "test_util.hpp"

using namespace seqmeas;
using seqmeas::box::Basis;
using seqmeas::box::BoxConfig;
using seqmeas::box::BoxRepresentation;

namespace {

BoxConfig small_config(int g = 64, int d = 16) {
  BoxConfig cfg;
  cfg.grid_points = g;
  cfg.modes = d;
  return cfg;
}

Eigen::Vector2cd spin_up() { return {1.0, 0.0}; }
Eigen::Vector2cd spin_plus_i() {
  return {Complex(1.0, 0.0) / std::sqrt(2.0), Complex(0.0, 1.0) / std::sqrt(2.0)};
}

}  // namespace

TEST_CASE("energy levels") {
  BoxConfig cfg;
  CHECK(cfg.energy_level(1) ==
        doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-14));
  // E_n / E_1 = n^2
  for (int n = 2; n <= 8; ++n) {
    CHECK(cfg.energy_level(n) / cfg.energy_level(1) ==
          doctest::Approx(static_cast<double>(n) * n).epsilon(1e-13));
  }
  BoxConfig wide;
  wide.length = 2.0;
  CHECK(wide.energy_level(3) ==
        doctest::Approx(9.0 * M_PI * M_PI / 8.0).epsilon(1e-13));
}

TEST_CASE("config validation and tomography legality") {
  BoxConfig cfg;
  CHECK(cfg.tomography_legal());  // k = pi/4, L = 1
  cfg.wavenumber = M_PI / 2.0;
  CHECK(!cfg.tomography_legal());
  CHECK_NOTHROW(cfg.validate());  // legal for dynamics, only flagged
  cfg.length = -1.0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("grid mode samples are orthonormal under the midpoint rule") {
  BoxRepresentation rep(small_config(256, 64), Basis::Grid);
  const RealMatrix u = rep.sine_modes(64);
  const RealMatrix gram = u.transpose() * u;
  CHECK((gram - RealMatrix::Identity(64, 64)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("closed-form trig matrices match the quadrature oracle") {
  BoxConfig cfg = small_config(64, 16);
  const auto closed = box::trig_matrices_closed_form(cfg);
  const auto oracle = box::trig_matrices_quadrature(cfg, 10000);
  CHECK((closed.c - oracle.c).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((closed.s - oracle.s).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("closed-form trig matrices at a resonant wavenumber") {
  // k = pi/2, L = 1 puts (n-m) pi/L = 2k on the n-m = +-1 diagonals; the
  // analytic limit branch has to take over.
  BoxConfig cfg = small_config(64, 8);
  cfg.wavenumber = M_PI / 2.0;
  const auto closed = box::trig_matrices_closed_form(cfg);
  const auto oracle = box::trig_matrices_quadrature(cfg, 10000);
  CHECK((closed.c - oracle.c).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((closed.s - oracle.s).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("grid projectors: k = 0 gives I (x) |0><0|") {
  BoxConfig cfg = small_config(8, 4);
  cfg.wavenumber = 1e-300;  // validate() requires k > 0
  BoxRepresentation rep(cfg, Basis::Grid);
  auto [plus, minus] = box::build_f_projectors_grid(rep);
  for (int j = 0; j < plus.sites(); ++j) {
    CHECK(plus.block(j).p00 == 1.0);
    CHECK(plus.block(j).p01 == 0.0);
    CHECK(minus.block(j).p11 == 0.0);
  }
}

TEST_CASE("grid projectors are exactly idempotent") {
  BoxRepresentation rep(small_config(256, 64), Basis::Grid);
  auto [plus, minus] = box::build_f_projectors_grid(rep);
  CHECK(plus.inexact_blocks() == 0);
  CHECK(minus.inexact_blocks() == 0);
  for (int j = 0; j < plus.sites(); ++j) {
    CHECK(plus.block(j).exactly_idempotent());
    CHECK(minus.block(j).exactly_idempotent());
  }
}

TEST_CASE("energy-basis projectors carry measured diagnostics") {
  BoxRepresentation rep(small_config(64, 16), Basis::EnergyModes);
  const auto ep = box::build_f_projectors_energy(rep, true);
  // truncated projectors are not exact; the defect must be visible, small,
  // and declared
  CHECK(ep.plus_diagnostics.idempotency_defect > 0.0);
  CHECK(ep.plus_diagnostics.idempotency_defect < 0.2);
  CHECK(ep.plus_diagnostics.completeness_defect < 1e-12);
  CHECK(ep.minus_diagnostics.idempotency_defect ==
        doctest::Approx(ep.plus_diagnostics.idempotency_defect).epsilon(1e-9));
}

TEST_CASE("kernel evolution matches direct channel iteration") {
  BoxRepresentation rep(small_config(64, 16), Basis::Grid);
  auto gen = testutil::rng(211);
  const auto sigma = random_density_matrix(rep.dim(), gen);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  Matrix direct = sigma.matrix();
  for (int n = 1; n <= 20; ++n) {
    direct = channel.apply_reference(direct);
  }
  const Matrix kernel = box::kernel_evolve(rep, sigma.matrix(), 20);
  CHECK((kernel - direct).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("kernel N=1 equals one channel application, G=64") {
  BoxRepresentation rep(small_config(64, 16), Basis::Grid);
  auto gen = testutil::rng(223);
  const auto sigma = random_density_matrix(rep.dim(), gen);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  const Matrix once = channel.apply_reference(sigma.matrix());
  const Matrix kernel = box::kernel_evolve(rep, sigma.matrix(), 1);
  CHECK((kernel - once).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("phi bound values") {
  BoxConfig cfg;  // kL = pi/4
  CHECK(box::phi_bound_squared(0, cfg) == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(box::phi_bound(0, cfg) == doctest::Approx(2.0).epsilon(1e-10));
  // independent fixed-panel Simpson oracle for N = 1
  const double kl = cfg.wavenumber * cfg.length;
  const double oracle = 4.0 * simpson(
                                 [&](double x) {
                                   const double c = std::cos(kl * x);
                                   const double s = std::sin(kl * x);
                                   return (1.0 - x) *
                                          (std::pow(c, 4) + std::pow(s, 4));
                                 },
                                 0.0, 1.0, 20000);
  CHECK(box::phi_bound_squared(1, cfg) == doctest::Approx(oracle).epsilon(1e-9));
  // strictly decreasing toward zero (the rate is a slow N^{-1/4})
  double prev = box::phi_bound_squared(0, cfg);
  for (long n = 1; n <= 40; n += 3) {
    const double cur = box::phi_bound_squared(n, cfg);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(box::phi_bound(200, cfg) < 0.5);
  CHECK(box::phi_bound(3200, cfg) < 0.25);
}

TEST_CASE("predicted energy is affine with slope k^2/m") {
  BoxConfig cfg;
  CHECK(box::predicted_energy(3.0, 0, cfg) == 3.0);
  CHECK(box::predicted_energy(3.0, 10, cfg) ==
        doctest::Approx(3.0 + 10.0 * cfg.wavenumber * cfg.wavenumber).epsilon(
            1e-13));
}

TEST_CASE("measured energy of pure modes and the first channel kick") {
  BoxConfig cfg = small_config(512, 128);
  BoxRepresentation rep(cfg, Basis::Grid);
  const Vector psi = rep.mode_spin_state(1, spin_up());
  const Matrix sigma = psi * psi.adjoint();
  const auto em0 = box::measured_energy(rep, sigma);
  CHECK(em0.energy == doctest::Approx(cfg.energy_level(1)).epsilon(1e-9));
  CHECK(!em0.truncation_flagged);

  const Matrix kicked = box::kernel_evolve(rep, sigma, 1);
  const auto em1 = box::measured_energy(rep, kicked);
  const double gain = em1.energy - em0.energy;
  const double expected = cfg.wavenumber * cfg.wavenumber / cfg.mass;
  CHECK(std::abs(gain - expected) / expected < 0.01);
  CHECK(!em1.truncation_flagged);
}

TEST_CASE("occupation bound from the phi function") {
  BoxConfig cfg = small_config(128, 32);
  BoxRepresentation rep(cfg, Basis::Grid);
  const Vector psi = rep.mode_spin_state(2, spin_plus_i());
  Matrix sigma = psi * psi.adjoint();
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  for (int n = 0; n <= 25; n += 5) {
    const Matrix state = channel.evolve(sigma, n);
    const double phi = box::phi_bound(n, cfg);
    const auto pops = box::mode_populations(rep, state, 8);
    for (double q : pops) CHECK(q <= phi + 1e-9);
  }
}

TEST_CASE("tail mass against the occupation bound and flat value") {
  BoxConfig cfg = small_config(128, 32);
  BoxRepresentation rep(cfg, Basis::Grid);
  const Vector psi = rep.mode_spin_state(1, spin_plus_i());
  const Matrix sigma = psi * psi.adjoint();
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  const int k_cut = 4;
  double prev = 2.0;
  for (int n = 0; n <= 30; n += 6) {
    const Matrix state = channel.evolve(sigma, n);
    const double mass = box::tail_mass_modes(rep, state, k_cut);
    CHECK(mass <= 1.0 + 1e-10);
    // Schwartz bound: each |n, s> occupation is at most phi(N)
    CHECK(mass <= 2.0 * (k_cut + 1) * box::phi_bound(n, cfg) + 1e-9);
    if (n > 0) CHECK(mass <= prev + 1e-9);
    prev = mass;
  }
  // ground state, K = 0 cut keeps everything at step 0
  CHECK(box::tail_mass_modes(rep, sigma, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero-band heuristic") {
  BoxConfig cfg;
  const auto levels = box::energy_levels(cfg, 32);
  CHECK(box::hamiltonian_is_zero_band(levels));
  const std::vector<double> flat(16, 3.0);
  CHECK(!box::hamiltonian_is_zero_band(flat));
  std::vector<double> harmonic(32);
  for (int n = 0; n < 32; ++n) harmonic[n] = n + 0.5;
  CHECK(box::hamiltonian_is_zero_band(harmonic));
}

TEST_CASE("entropy grows and obeys the purity bound on a heat vision run") {
  BoxConfig cfg = small_config(64, 16);
  BoxRepresentation rep(cfg, Basis::Grid);
  const Vector psi = rep.mode_spin_state(1, spin_plus_i());
  Matrix sigma = psi * psi.adjoint();
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  double prev_entropy = -1.0;
  for (int n = 0; n <= 20; ++n) {
    const double pur = purity(sigma);
    const double ent = von_neumann_entropy_bits(sigma);
    CHECK(ent >= -std::log2(pur) - 1e-9);
    if (n >= 2) CHECK(ent >= prev_entropy - 1e-9);
    prev_entropy = ent;
    sigma = channel.apply(sigma);
  }
}

TEST_CASE("purity of |n,+i> inputs stays below phi squared") {
  BoxConfig cfg = small_config(256, 64);
  BoxRepresentation rep(cfg, Basis::Grid);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  for (int mode : {1, 2, 3, 4}) {
    const Vector psi = rep.mode_spin_state(mode, spin_plus_i());
    const Matrix sigma = psi * psi.adjoint();
    for (int n = 0; n <= 50; n += 10) {
      const double pur = purity(Matrix(channel.evolve(sigma, n)));
      CHECK(pur <= box::phi_bound_squared(n, cfg) + 1e-9);
    }
  }
}
