#include "seqmeas/finitedim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqmeas::finitedim {

namespace {

void require_projector(const Matrix& p, const char* name) {
  const double herm = (p - p.adjoint()).cwiseAbs().maxCoeff();
  const double idem = (p * p - p).cwiseAbs().maxCoeff();
  if (herm > 1e-9 || idem > 1e-9) {
    throw std::invalid_argument(std::string("jordan_blocks: ") + name +
                                " is not a Hermitian projector");
  }
}

// First-nonzero-component-real-positive phase convention.
void fix_phase(Eigen::Ref<Vector> v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-10) {
      const Complex phase = v(i) / std::abs(v(i));
      v /= phase;
      return;
    }
  }
}

// Columns spanning the eigenspace of a projector with eigenvalue ~lambda.
Matrix eigenspace(const Matrix& p, double lambda) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(p);
  std::vector<Index> keep;
  for (Index i = 0; i < solver.eigenvalues().size(); ++i) {
    if (std::abs(solver.eigenvalues()(i) - lambda) < 0.5) keep.push_back(i);
  }
  Matrix basis(p.rows(), static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    basis.col(static_cast<Index>(i)) = solver.eigenvectors().col(keep[i]);
  }
  return basis;
}

}  // namespace

Matrix JordanDecomposition::reconstruct_first() const {
  const Index d = basis.rows();
  Matrix p = Matrix::Zero(d, d);
  for (const JordanBlock& b : blocks) {
    switch (b.kind) {
      case BlockKind::BothRange:
      case BlockKind::FirstOnly:
        p.noalias() += basis.col(b.col0) * basis.col(b.col0).adjoint();
        break;
      case BlockKind::Pair:
        p.noalias() += basis.col(b.col0) * basis.col(b.col0).adjoint();
        break;
      default:
        break;
    }
  }
  return p;
}

Matrix JordanDecomposition::reconstruct_second() const {
  const Index d = basis.rows();
  Matrix q = Matrix::Zero(d, d);
  for (const JordanBlock& b : blocks) {
    switch (b.kind) {
      case BlockKind::BothRange:
      case BlockKind::SecondOnly:
        q.noalias() += basis.col(b.col0) * basis.col(b.col0).adjoint();
        break;
      case BlockKind::Pair: {
        const double c = std::cos(b.angle);
        const double s = std::sin(b.angle);
        const Vector u = basis.col(b.col0);
        const Vector w = basis.col(b.col1);
        // Q restricted to span{u, w} = [[c^2, cs], [cs, s^2]]
        q.noalias() += (c * c) * (u * u.adjoint());
        q.noalias() += (c * s) * (u * w.adjoint() + w * u.adjoint());
        q.noalias() += (s * s) * (w * w.adjoint());
        break;
      }
      default:
        break;
    }
  }
  return q;
}

std::size_t JordanDecomposition::pair_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.kind == BlockKind::Pair ? 1 : 0;
  return n;
}

JordanDecomposition jordan_blocks(const Matrix& p, const Matrix& q,
                                  double angle_tol) {
  if (p.rows() != p.cols() || q.rows() != q.cols() || p.rows() != q.rows()) {
    throw std::invalid_argument("jordan_blocks: dimension mismatch");
  }
  if (p.rows() > 512) {
    throw std::invalid_argument("jordan_blocks: dense path supports d <= 512");
  }
  require_projector(p, "P");
  require_projector(q, "Q");
  const Index d = p.rows();

  JordanDecomposition jd;
  jd.basis = Matrix::Zero(d, d);

  struct PairCandidate {
    double mu;  // eigenvalue of compressed Q = cos^2(angle)
    Vector u;
    Vector w;
  };
  std::vector<PairCandidate> pairs;
  std::vector<Vector> both_range, first_only, second_only, neither;

  const Matrix range_p = eigenspace(p, 1.0);
  const Matrix kernel_p = eigenspace(p, 0.0);

  // Diagonalize Q compressed to range(P): eigenvalues are cos^2 of the
  // principal angles. Near-1 and near-0 eigenvalues are commuting
  // directions (intersections); interior ones pair with a kernel partner.
  if (range_p.cols() > 0) {
    Matrix m = range_p.adjoint() * q * range_p;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(
        DensityOperator::resymmetrize(m));
    for (Index i = 0; i < solver.eigenvalues().size(); ++i) {
      const double mu = solver.eigenvalues()(i);
      Vector u = range_p * solver.eigenvectors().col(i);
      fix_phase(u);
      if (mu >= 1.0 - angle_tol) {
        both_range.push_back(std::move(u));
      } else if (mu <= angle_tol) {
        first_only.push_back(std::move(u));
      } else {
        Vector w = (q * u) - p * (q * u);  // (I - P) Q u, lies in ker(P)
        const double norm = w.norm();
        if (norm < std::sqrt(angle_tol) * 1e-2) {
          // numerically a commuting direction after all
          (mu > 0.5 ? both_range : first_only).push_back(std::move(u));
          continue;
        }
        w /= norm;
        pairs.push_back(PairCandidate{mu, std::move(u), std::move(w)});
      }
    }
  }

  // Remaining kernel-of-P directions: orthogonal complement of the pair
  // partners inside ker(P), split by Q into the two 1x1 intersection kinds.
  if (kernel_p.cols() > 0) {
    Matrix partners(d, static_cast<Index>(pairs.size()));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      partners.col(static_cast<Index>(i)) = pairs[i].w;
    }
    // Project kernel basis onto the complement of the partners and
    // re-orthonormalize.
    Matrix rest = kernel_p;
    if (pairs.size() > 0) {
      rest -= partners * (partners.adjoint() * kernel_p);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(rest);
    Matrix qfull = qr.householderQ() * Matrix::Identity(d, rest.cols());
    // Columns whose projection survived span the true complement; count is
    // kernel_dim - pair_count.
    const Index keep = kernel_p.cols() - static_cast<Index>(pairs.size());
    std::vector<Vector> complement;
    for (Index i = 0; i < qfull.cols() && static_cast<Index>(complement.size()) < keep; ++i) {
      Vector v = qfull.col(i);
      // Reject directions that fell into the partner span (QR of a
      // rank-deficient matrix can emit arbitrary completions).
      double overlap = 0.0;
      for (const auto& pr : pairs) {
        overlap = std::max(overlap, std::abs(pr.w.dot(v)));
      }
      const double in_kernel = (p * v).norm();
      if (overlap < 1e-6 && in_kernel < 1e-6) {
        fix_phase(v);
        complement.push_back(std::move(v));
      }
    }
    if (static_cast<Index>(complement.size()) != keep) {
      throw std::runtime_error("jordan_blocks: kernel complement extraction failed");
    }
    if (!complement.empty()) {
      Matrix kc(d, static_cast<Index>(complement.size()));
      for (std::size_t i = 0; i < complement.size(); ++i) {
        kc.col(static_cast<Index>(i)) = complement[i];
      }
      Matrix mq = kc.adjoint() * q * kc;
      Eigen::SelfAdjointEigenSolver<Matrix> solver(
          DensityOperator::resymmetrize(mq));
      for (Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const double mu = solver.eigenvalues()(i);
        Vector v = kc * solver.eigenvectors().col(i);
        fix_phase(v);
        (mu > 0.5 ? second_only : neither).push_back(std::move(v));
      }
    }
  }

  std::sort(pairs.begin(), pairs.end(),
            [](const PairCandidate& a, const PairCandidate& b) {
              return std::acos(std::sqrt(a.mu)) > std::acos(std::sqrt(b.mu));
            });

  Index col = 0;
  for (const auto& pr : pairs) {
    JordanBlock b;
    b.kind = BlockKind::Pair;
    b.angle = std::acos(std::min(1.0, std::sqrt(std::max(pr.mu, 0.0))));
    b.col0 = static_cast<int>(col);
    b.col1 = static_cast<int>(col + 1);
    jd.basis.col(col++) = pr.u;
    jd.basis.col(col++) = pr.w;
    jd.blocks.push_back(b);
  }
  auto add_singles = [&](const std::vector<Vector>& vs, BlockKind kind,
                         double angle) {
    for (const Vector& v : vs) {
      JordanBlock b;
      b.kind = kind;
      b.angle = angle;
      b.col0 = static_cast<int>(col);
      jd.basis.col(col++) = v;
      jd.blocks.push_back(b);
    }
  };
  add_singles(both_range, BlockKind::BothRange, 0.0);
  add_singles(first_only, BlockKind::FirstOnly, 0.5 * M_PI);
  add_singles(second_only, BlockKind::SecondOnly, 0.5 * M_PI);
  add_singles(neither, BlockKind::Neither, 0.0);
  if (col != d) {
    throw std::runtime_error("jordan_blocks: basis is not complete");
  }
  return jd;
}

InvariantState invariant_state(const JordanDecomposition& jd,
                               std::size_t pair_index) {
  std::size_t seen = 0;
  for (const JordanBlock& b : jd.blocks) {
    if (b.kind != BlockKind::Pair) continue;
    if (seen++ != pair_index) continue;
    const Vector u = jd.basis.col(b.col0);
    const Vector w = jd.basis.col(b.col1);
    Matrix m = 0.5 * (u * u.adjoint() + w * w.adjoint());
    return InvariantState{DensityOperator(DensityOperator::resymmetrize(m)),
                          true};
  }
  // Commuting projectors: fall back to a 1x1 intersection direction and
  // flag it; such states are fixed but carry no entropy.
  for (const JordanBlock& b : jd.blocks) {
    if (b.kind == BlockKind::Pair) continue;
    const Vector u = jd.basis.col(b.col0);
    return InvariantState{DensityOperator::pure(u), false};
  }
  throw std::invalid_argument("invariant_state: empty decomposition");
}

SaturationResult saturation_demo(const Matrix& p, const Matrix& q,
                                 const DensityOperator& sigma, int steps,
                                 double weight_p, double distance_threshold) {
  MeasurementChannel channel({Pvm::dichotomic(p), Pvm::dichotomic(q)},
                             {weight_p, 1.0 - weight_p});
  Superoperator superop = Superoperator::from_channel(channel);
  const auto fixed = superop.fixed_point_projector();
  const Matrix limit_m = DensityOperator::resymmetrize(
      unvectorize(fixed.projector * vectorize(sigma.matrix()), sigma.dim()));
  DensityOperator limit(limit_m);

  SaturationResult result{MetricTrace{}, limit, -1};
  result.trace.names = {"step", "distance_to_limit", "purity", "entropy_bits"};
  Matrix current = sigma.matrix();
  for (int t = 0; t <= steps; ++t) {
    const double dist = trace_distance(current, limit_m);
    result.trace.rows.push_back({static_cast<double>(t), dist,
                                 purity(current),
                                 von_neumann_entropy_bits(current)});
    if (t < steps) current = channel.apply_matrix(current);
  }

  // N0 through the spectral path: the distance to the invariant limit is
  // monotone under the channel, so exponential search plus bisection is
  // valid even when the spectral gap makes N0 much larger than `steps`.
  const Vector v0 = vectorize(sigma.matrix());
  auto distance_at = [&](long n) {
    const Matrix state = DensityOperator::resymmetrize(
        unvectorize(superop.apply_power(v0, n), sigma.dim()));
    return trace_distance(state, limit_m);
  };
  if (distance_at(0) <= distance_threshold) {
    result.steps_to_limit = 0;
  } else {
    constexpr long cap = 1L << 40;
    long hi = 1;
    while (hi < cap && distance_at(hi) > distance_threshold) hi *= 2;
    if (hi < cap) {
      long lo = hi / 2;
      while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        (distance_at(mid) <= distance_threshold ? hi : lo) = mid;
      }
      result.steps_to_limit = hi;
    }
  }
  return result;
}

}  // namespace seqmeas::finitedim
