#pragma once

#include <array>
#include <span>
#include <vector>

#include "seqmeas/pvm.hpp"
#include "seqmeas/types.hpp"

namespace seqmeas {

/// Real symmetric 2x2 projector [[p00, p01], [p01, p11]] onto
/// cos(theta)|0> + sign*sin(theta)|1>, with entries nudged by a few ulps so
/// that squaring the stored matrix in plain double arithmetic reproduces it
/// bit for bit (and likewise for its complement). `exact` records whether
/// the nudge search succeeded; it does for every angle used by the models.
struct SpinBlock {
  double p00 = 1.0;
  double p01 = 0.0;
  double p11 = 0.0;
  bool exact = true;

  static SpinBlock projector_for_angle(double theta);

  SpinBlock complement() const { return {p11, -p01, p00, exact}; }

  std::array<double, 3> square() const {
    return {p00 * p00 + p01 * p01, p00 * p01 + p01 * p11,
            p01 * p01 + p11 * p11};
  }
  bool exactly_idempotent() const {
    const auto sq = square();
    return sq[0] == p00 && sq[1] == p01 && sq[2] == p11;
  }
};

/// Dichotomic PVM that is block-diagonal over a register of sites, each site
/// carrying a two-level system: F = (+)_j |phi(theta_j)><phi(theta_j)|.
/// Outcome 0 is F, outcome 1 its complement. State indexing is
/// 2*site + spin throughout.
class SiteSpinPvm {
 public:
  static SiteSpinPvm from_angles(std::span<const double> angles, double sign);

  int sites() const { return static_cast<int>(blocks_.size()); }
  Index dim() const { return 2 * static_cast<Index>(blocks_.size()); }
  const SpinBlock& block(int site) const { return blocks_[site]; }
  double angle(int site) const { return angles_[site]; }
  int inexact_blocks() const;

  /// In-place projection of a pure state (length 2*sites).
  void project_vector(int outcome, Vector& psi) const;
  /// P sigma P on a full density matrix.
  Matrix sandwich(int outcome, const Matrix& sigma) const;
  /// tr(P sigma).
  double outcome_probability(int outcome, const Matrix& sigma) const;

  Matrix projector_matrix(int outcome) const;
  Pvm to_pvm() const;

 private:
  std::vector<SpinBlock> blocks_;
  std::vector<double> angles_;
  double sign_ = 1.0;
};

/// The random measurement channel built from the two site-diagonal
/// measurements at angle +theta_j and -theta_j, mixed with probability 1/2
/// each:
///   Omega(sigma) = (1/2) sum_{j=+,-} [F^j sigma F^j + (1-F^j) sigma (1-F^j)].
///
/// Because every operator is diagonal in the site index, the channel acts
/// independently on each 2x2 spin block (x, y). In the operator basis
/// {I+, Z-, X+, iY-} of a block the action is diagonal with eigenvalues
///   cos^2(t_x - t_y), cos^2(t_x + t_y), sin^2(t_x + t_y), sin^2(t_x - t_y),
/// which is what `evolve` exponentiates in closed form. `apply_reference`
/// instead multiplies out the projector sandwiches; the two routes are
/// required to agree and tests hold them to 1e-10.
class SiteSpinChannel {
 public:
  explicit SiteSpinChannel(std::vector<double> angles);

  int sites() const { return static_cast<int>(angles_.size()); }
  Index dim() const { return 2 * static_cast<Index>(angles_.size()); }
  const SiteSpinPvm& plus() const { return plus_; }
  const SiteSpinPvm& minus() const { return minus_; }
  const std::vector<double>& angles() const { return angles_; }

  /// One channel step via explicit projector sandwiches (serial reference).
  Matrix apply_reference(const Matrix& sigma) const;

  /// N channel steps via the per-block closed form. OpenMP-parallel over
  /// site pairs; `evolve_serial` is the plain-loop reference.
  Matrix evolve(const Matrix& sigma, long steps) const;
  Matrix evolve_serial(const Matrix& sigma, long steps) const;

  /// One closed-form step (equals evolve(sigma, 1)).
  Matrix apply(const Matrix& sigma) const { return evolve(sigma, 1); }

  /// Channel eigenvalues on block (x, y), ordered as documented above.
  std::array<double, 4> block_eigenvalues(int x, int y) const;

  /// Dense mixture-of-PVMs form for small registers (cross-validation).
  MeasurementChannel to_channel() const;

 private:
  void evolve_block(const Matrix& in, Matrix& out, long steps, int x,
                    int y) const;

  std::vector<double> angles_;
  SiteSpinPvm plus_;
  SiteSpinPvm minus_;
};

}  // namespace seqmeas
