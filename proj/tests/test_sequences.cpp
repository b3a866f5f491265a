#include <doctest.h>

#include <cmath>

#include "seqmeas/box.hpp"
#include "seqmeas/metrics.hpp"
#include "seqmeas/quadrature.hpp"
#include "seqmeas/random_states.hpp"
#include "seqmeas/sequences.hpp"
#include "test_util.hpp"

using namespace seqmeas;
using sequences::Strategy;

namespace {

box::BoxRepresentation grid_rep(int g = 128) {
  box::BoxConfig cfg;
  cfg.grid_points = g;
  cfg.modes = g / 4;
  return box::BoxRepresentation(cfg, box::Basis::Grid);
}

}  // namespace

TEST_CASE("strategy construction and validation") {
  CHECK(Strategy::alternating(4).pvm_index(0) == 0);
  CHECK(Strategy::alternating(4).pvm_index(3) == 1);
  CHECK(Strategy::fixed({1, 1, 0}).pvm_index(2) == 0);
  CHECK_THROWS(Strategy::iid(3, {0.5, 0.6}));
  CHECK_THROWS(Strategy::iid(3, {1.5, -0.5}));
  CHECK_THROWS(Strategy::alternating(2).pvm_index(5));
  CHECK(!Strategy::iid(2, {0.5, 0.5}).deterministic());
}

TEST_CASE("single-step outcome probabilities are complete") {
  const auto rep = grid_rep();
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  auto gen = testutil::rng(301);
  const auto sigma = random_density_matrix(rep.dim(), gen);
  const auto strat = Strategy::alternating(1);
  const int zero[] = {0};
  const int one[] = {1};
  const double p0 = sequences::outcome_probability(channel, strat,
                                                   sigma.matrix(), zero);
  const double p1 = sequences::outcome_probability(channel, strat,
                                                   sigma.matrix(), one);
  CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("P(0|+) for the ground state against the quadrature oracle") {
  // sigma = Psi_1^2-distributed (x) |0><0|, k = pi/4, L = 1:
  // P(0|+) = int_0^1 2 sin^2(pi x) cos^2(pi x / 4) dx = 1/2 + 16/(15 pi)
  const auto rep = grid_rep(512);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  const Vector psi = rep.mode_spin_state(1, Eigen::Vector2cd(1.0, 0.0));
  const Matrix sigma = psi * psi.adjoint();
  const int zero[] = {0};
  const double p = sequences::outcome_probability(
      channel, Strategy::alternating(1), sigma, zero);
  const double analytic = 0.5 + 16.0 / (15.0 * M_PI);
  const double quadrature = simpson(
      [](double x) {
        return 2.0 * std::pow(std::sin(M_PI * x), 2) *
               std::pow(std::cos(M_PI * x / 4.0), 2);
      },
      0.0, 1.0, 4000);
  CHECK(analytic == doctest::Approx(quadrature).epsilon(1e-10));
  // grid expectation differs from the continuum by O(G^-2)
  CHECK(p == doctest::Approx(analytic).epsilon(1e-4));
}

TEST_CASE("outcome strings are complete for N up to 10") {
  const auto rep = grid_rep(64);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  auto gen = testutil::rng(307);
  const auto sigma = random_density_matrix(rep.dim(), gen);
  for (int n : {2, 5, 10}) {
    const auto strat = Strategy::alternating(n);
    double total = 0.0;
    for (int mask = 0; mask < (1 << n); ++mask) {
      std::vector<int> outcomes(n);
      for (int t = 0; t < n; ++t) outcomes[t] = (mask >> t) & 1;
      total += sequences::outcome_probability(channel, strat, sigma.matrix(),
                                              outcomes);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("dense and site outcome probabilities agree") {
  const auto rep = grid_rep(16);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  auto gen = testutil::rng(311);
  const auto sigma = random_density_matrix(rep.dim(), gen);
  const std::vector<Pvm> pvms = {channel.plus().to_pvm(),
                                 channel.minus().to_pvm()};
  const auto strat = Strategy::alternating(5);
  const std::vector<int> outcomes = {0, 1, 1, 0, 1};
  const double site = sequences::outcome_probability(channel, strat,
                                                     sigma.matrix(), outcomes);
  const double dense =
      sequences::outcome_probability(pvms, strat, sigma, outcomes);
  CHECK(site == doctest::Approx(dense).epsilon(1e-11));
}

TEST_CASE("repeating a measurement repeats its outcome (Zeno property)") {
  const auto rep = grid_rep(64);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  auto gen = testutil::rng(313);
  const auto sigma = random_density_matrix(rep.dim(), gen);
  const Pvm plus = channel.plus().to_pvm();
  const auto posterior = sequences::posterior_state(sigma, plus, 0);
  // second round: same outcome with probability 1, state unchanged
  const auto second = sequences::posterior_state(posterior.state, plus, 0);
  CHECK(second.probability == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((second.state.matrix() - posterior.state.matrix())
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  // constant strategy: P(0,0,...,0) = P(0)
  const auto constant = Strategy::fixed({0, 0, 0, 0});
  const std::vector<int> all_zero = {0, 0, 0, 0};
  const int zero[] = {0};
  CHECK(sequences::outcome_probability(channel, constant, sigma.matrix(),
                                       all_zero) ==
        doctest::Approx(sequences::outcome_probability(
                            channel, Strategy::fixed({0}), sigma.matrix(), zero))
            .epsilon(1e-11));
}

TEST_CASE("posterior of a pure eigenstate is unchanged") {
  auto gen = testutil::rng(317);
  const Matrix p = random_projector(6, 3, gen);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  // take an eigenvector with eigenvalue 1
  Vector v = es.eigenvectors().col(5);
  const auto state = DensityOperator::pure(v);
  const auto post = sequences::posterior_state(state, Pvm::dichotomic(p), 0);
  CHECK(post.probability == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(trace_distance(post.state, state) < 1e-9);
}

TEST_CASE("maximally mixed posterior probability is rank over dim") {
  auto gen = testutil::rng(331);
  const Matrix p = random_projector(8, 3, gen);
  const auto mixed = DensityOperator::maximally_mixed(8);
  const auto post = sequences::posterior_state(mixed, Pvm::dichotomic(p), 0);
  CHECK(post.probability == doctest::Approx(3.0 / 8.0).epsilon(1e-10));
}

TEST_CASE("zero-probability outcomes are rejected") {
  Matrix p0 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  Vector ground = Vector::Zero(2);
  ground(0) = 1.0;
  const auto state = DensityOperator::pure(ground);
  CHECK_THROWS(sequences::posterior_state(state, Pvm::dichotomic(p0), 1));
}

TEST_CASE("length-zero strategies produce the empty record") {
  const auto rep = grid_rep(16);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  const Vector psi = rep.mode_spin_state(1, Eigen::Vector2cd(1.0, 0.0));
  const auto result = sequences::sample_trajectories(
      channel, Strategy::alternating(0), psi, 50, 9);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].outcomes.empty());
  CHECK(result.records[0].count == 50);
}

TEST_CASE("sampling is reproducible and matches exact probabilities") {
  const auto rep = grid_rep(64);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  const Vector psi = rep.mode_spin_state(1, Eigen::Vector2cd(1.0, 0.0));
  const auto strat = Strategy::alternating(4);
  const std::uint64_t n_traj = 20000;
  const auto result = sequences::sample_trajectories(channel, strat, psi,
                                                     n_traj, 12345);
  const auto again = sequences::sample_trajectories(channel, strat, psi,
                                                    n_traj, 12345);
  REQUIRE(result.records.size() == again.records.size());
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    CHECK(result.records[i].outcomes == again.records[i].outcomes);
    CHECK(result.records[i].count == again.records[i].count);
  }
  // empirical frequencies converge at the binomial rate
  const Matrix sigma = psi * psi.adjoint();
  std::uint64_t extreme_count = 0;
  for (const auto& rec : result.records) {
    if (rec.outcomes == "0000" || rec.outcomes == "1111") {
      extreme_count += rec.count;
    }
  }
  const std::vector<int> zeros = {0, 0, 0, 0};
  const std::vector<int> ones = {1, 1, 1, 1};
  const double exact =
      sequences::outcome_probability(channel, strat, sigma, zeros) +
      sequences::outcome_probability(channel, strat, sigma, ones);
  const double freq = static_cast<double>(extreme_count) / n_traj;
  const double sd = std::sqrt(exact * (1.0 - exact) / n_traj);
  CHECK(std::abs(freq - exact) <= 4.0 * sd);
}

TEST_CASE("iid strategies record the drawn pvm sequence") {
  const auto rep = grid_rep(16);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  const Vector psi = rep.mode_spin_state(1, Eigen::Vector2cd(1.0, 0.0));
  const auto strat = Strategy::iid(3, {0.5, 0.5});
  const auto result =
      sequences::sample_trajectories(channel, strat, psi, 400, 77);
  bool saw_minus = false;
  std::uint64_t total = 0;
  for (const auto& rec : result.records) {
    REQUIRE(rec.choices.size() == 3);
    for (char c : rec.choices) {
      CHECK((c == '+' || c == '-'));
      saw_minus = saw_minus || c == '-';
    }
    total += rec.count;
  }
  CHECK(total == 400);
  CHECK(saw_minus);
}

TEST_CASE("reweighting identity: iid weights only reweight the statistics") {
  // P_w(choices, outcomes) = prod_t w_{c_t} * P(outcomes | choices): sampled
  // joint frequencies, divided by the weight factor, must agree with the
  // deterministic-strategy conditional for any weight assignment.
  const auto rep = grid_rep(32);
  SiteSpinChannel channel = box::heat_vision_channel(rep);
  const Vector psi = rep.mode_spin_state(1, Eigen::Vector2cd(1.0, 0.0));
  const Matrix sigma = psi * psi.adjoint();
  const int n = 3;
  const std::uint64_t n_traj = 200000;
  for (const auto& weights :
       std::vector<std::vector<double>>{{0.5, 0.5}, {0.9, 0.1}}) {
    const auto result = sequences::sample_trajectories(
        channel, Strategy::iid(n, weights), psi, n_traj, 4242);
    for (const auto& rec : result.records) {
      if (rec.count < 200) continue;  // skip noisy tails
      double weight_factor = 1.0;
      std::vector<int> pattern, outcomes;
      for (char c : rec.choices) {
        const int idx = c == '+' ? 0 : 1;
        pattern.push_back(idx);
        weight_factor *= weights[idx];
      }
      for (char c : rec.outcomes) outcomes.push_back(c - '0');
      const double conditional = sequences::outcome_probability(
          channel, Strategy::fixed(pattern), sigma, outcomes);
      const double joint_freq = static_cast<double>(rec.count) / n_traj;
      const double reweighted = joint_freq / weight_factor;
      const double joint_exact = weight_factor * conditional;
      const double sd =
          std::sqrt(joint_exact * (1.0 - joint_exact) / n_traj) / weight_factor;
      CHECK(std::abs(reweighted - conditional) <= 5.0 * sd + 1e-12);
    }
  }
}

TEST_CASE("dense sampling path on a small mixed state") {
  auto gen = testutil::rng(347);
  const auto channel = testutil::random_two_pvm_channel(4, gen);
  const auto sigma = random_density_matrix(4, gen);
  const std::vector<Pvm> pvms = {channel.pvm(0), channel.pvm(1)};
  const auto strat = Strategy::alternating(3);
  const auto result =
      sequences::sample_trajectories(pvms, strat, sigma, 5000, 55);
  std::uint64_t total = 0;
  for (const auto& rec : result.records) total += rec.count;
  CHECK(total == 5000);
  // empirical vs exact for the all-zero string
  const std::vector<int> zeros = {0, 0, 0};
  const double exact = sequences::outcome_probability(pvms, strat, sigma, zeros);
  std::uint64_t zero_count = 0;
  for (const auto& rec : result.records) {
    if (rec.outcomes == "000") zero_count += rec.count;
  }
  const double freq = static_cast<double>(zero_count) / 5000.0;
  CHECK(std::abs(freq - exact) <= 4.0 * std::sqrt(exact * (1 - exact) / 5000.0));
}
