#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "seqmeas/metrics.hpp"
#include "seqmeas/random_states.hpp"
#include "seqmeas/site_spin.hpp"
#include "seqmeas/superoperator.hpp"
#include "test_util.hpp"

using namespace seqmeas;

namespace {

std::vector<double> random_angles(int n, std::mt19937_64& gen) {
  std::vector<double> angles(n);
  for (double& a : angles) {
    a = 2.0 * M_PI * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
  }
  return angles;
}

}  // namespace

TEST_CASE("spin blocks are exactly idempotent at the bit level") {
  auto gen = testutil::rng(101);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const double theta =
        2.0 * M_PI * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
    const SpinBlock b = SpinBlock::projector_for_angle(theta);
    REQUIRE(b.exact);
    CHECK(b.exactly_idempotent());
    CHECK(b.complement().exactly_idempotent());
    // completeness is exact: diagonal entries are (a, d) and (d, a)
    CHECK(b.p00 + b.complement().p00 == 1.0);
    CHECK(b.p11 + b.complement().p11 == 1.0);
    CHECK(b.p01 + b.complement().p01 == 0.0);
    // entries stay within a few ulps of the ideal projector
    CHECK(std::abs(b.p00 - std::cos(theta) * std::cos(theta)) < 1e-12);
    CHECK(std::abs(b.p01 - std::cos(theta) * std::sin(theta)) < 1e-12);
    ++checked;
  }
  CHECK(checked == 2000);
}

TEST_CASE("spin block edge angles") {
  const SpinBlock zero = SpinBlock::projector_for_angle(0.0);
  CHECK(zero.p00 == 1.0);
  CHECK(zero.p01 == 0.0);
  CHECK(zero.p11 == 0.0);
  const SpinBlock quarter = SpinBlock::projector_for_angle(0.25 * M_PI);
  CHECK(quarter.exactly_idempotent());
  CHECK(std::abs(quarter.p01 - 0.5) < 1e-15);
}

TEST_CASE("site pvm projectors square to themselves exactly (dense check)") {
  auto gen = testutil::rng(103);
  const auto angles = random_angles(16, gen);
  for (double sign : {+1.0, -1.0}) {
    const auto pvm = SiteSpinPvm::from_angles(angles, sign);
    CHECK(pvm.inexact_blocks() == 0);
    for (int outcome : {0, 1}) {
      const Matrix f = pvm.projector_matrix(outcome);
      // a block-diagonal matrix squares blockwise; zeros contribute exactly
      CHECK(((f * f) - f).cwiseAbs().maxCoeff() == 0.0);
    }
    const Matrix sum = pvm.projector_matrix(0) + pvm.projector_matrix(1);
    CHECK((sum - Matrix::Identity(pvm.dim(), pvm.dim())).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("pvm conversion satisfies qcore validation") {
  auto gen = testutil::rng(107);
  const auto pvm = SiteSpinPvm::from_angles(random_angles(8, gen), +1.0);
  const Pvm dense = pvm.to_pvm();
  CHECK(dense.diagnostics().idempotency_defect == 0.0);
  CHECK(dense.diagnostics().completeness_defect == 0.0);
}

TEST_CASE("sandwich equals dense projector conjugation") {
  auto gen = testutil::rng(109);
  const auto angles = random_angles(6, gen);
  const auto pvm = SiteSpinPvm::from_angles(angles, -1.0);
  const auto sigma = random_density_matrix(pvm.dim(), gen);
  for (int outcome : {0, 1}) {
    const Matrix f = pvm.projector_matrix(outcome);
    const Matrix dense = f * sigma.matrix() * f;
    const Matrix fast = pvm.sandwich(outcome, sigma.matrix());
    CHECK((dense - fast).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(pvm.outcome_probability(outcome, sigma.matrix()) ==
          doctest::Approx((f * sigma.matrix()).trace().real()).epsilon(1e-12));
  }
}

TEST_CASE("channel reference matches the dense mixture of pvms") {
  auto gen = testutil::rng(113);
  const SiteSpinChannel channel(random_angles(5, gen));
  const auto sigma = random_density_matrix(channel.dim(), gen);
  const Matrix via_reference = channel.apply_reference(sigma.matrix());
  const Matrix via_dense = channel.to_channel().apply_matrix(sigma.matrix());
  CHECK((via_reference - via_dense).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("closed-form evolution agrees with the projector route") {
  auto gen = testutil::rng(127);
  const SiteSpinChannel channel(random_angles(8, gen));
  const auto sigma = random_density_matrix(channel.dim(), gen);
  Matrix direct = sigma.matrix();
  for (int n = 1; n <= 24; ++n) {
    direct = channel.apply_reference(direct);
    const Matrix kernel = channel.evolve(sigma.matrix(), n);
    CHECK((kernel - direct).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("evolution eigenvalues against the dense superoperator") {
  // the per-block channel eigenvalues are the spectrum of the dense
  // superoperator, assembled over all site pairs
  auto gen = testutil::rng(131);
  const SiteSpinChannel channel(random_angles(3, gen));
  const auto superop = Superoperator::from_channel(channel.to_channel());
  Eigen::SelfAdjointEigenSolver<Matrix> es(superop.matrix(),
                                           Eigen::EigenvaluesOnly);
  std::vector<double> expected;
  for (int x = 0; x < channel.sites(); ++x) {
    for (int y = 0; y < channel.sites(); ++y) {
      for (double lam : channel.block_eigenvalues(x, y)) {
        expected.push_back(lam);
      }
    }
  }
  std::sort(expected.begin(), expected.end());
  REQUIRE(static_cast<Index>(expected.size()) == es.eigenvalues().size());
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    CHECK(es.eigenvalues()(i) == doctest::Approx(expected[i]).epsilon(1e-9));
  }
}

TEST_CASE("evolve(0) is the identity and evolve(1) equals apply") {
  auto gen = testutil::rng(137);
  const SiteSpinChannel channel(random_angles(4, gen));
  const auto sigma = random_density_matrix(channel.dim(), gen);
  CHECK((channel.evolve(sigma.matrix(), 0) - sigma.matrix())
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((channel.evolve(sigma.matrix(), 1) - channel.apply(sigma.matrix()))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("position populations are conserved") {
  auto gen = testutil::rng(139);
  const SiteSpinChannel channel(random_angles(6, gen));
  const auto sigma = random_density_matrix(channel.dim(), gen);
  const Matrix out = channel.evolve(sigma.matrix(), 17);
  for (int j = 0; j < channel.sites(); ++j) {
    const double before =
        (sigma.matrix()(2 * j, 2 * j) + sigma.matrix()(2 * j + 1, 2 * j + 1))
            .real();
    const double after = (out(2 * j, 2 * j) + out(2 * j + 1, 2 * j + 1)).real();
    CHECK(after == doctest::Approx(before).epsilon(1e-13));
  }
}

TEST_CASE("zero angle channel fixes spin-diagonal states") {
  const SiteSpinChannel channel(std::vector<double>{0.0, 0.0, 0.0});
  auto gen = testutil::rng(149);
  // random state dephased in the spin basis at every site pair
  Matrix sigma = random_density_matrix(channel.dim(), gen).matrix();
  for (Index r = 0; r < sigma.rows(); ++r) {
    for (Index c = 0; c < sigma.cols(); ++c) {
      if ((r % 2) != (c % 2)) sigma(r, c) = 0.0;
    }
  }
  const Matrix out = channel.apply(sigma);
  CHECK((out - sigma).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("purity is nonincreasing under the channel") {
  auto gen = testutil::rng(151);
  const SiteSpinChannel channel(random_angles(5, gen));
  Matrix sigma = random_density_matrix(channel.dim(), gen).matrix();
  double prev = purity(sigma);
  for (int n = 0; n < 30; ++n) {
    sigma = channel.apply(sigma);
    const double p = purity(sigma);
    CHECK(p <= prev + 1e-12);
    prev = p;
  }
}
