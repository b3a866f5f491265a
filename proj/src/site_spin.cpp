#include "seqmeas/site_spin.hpp"

#include <cmath>
#include <stdexcept>

namespace seqmeas {

namespace {

// Searches near `a` (the dominant diagonal entry, >= 1/2) for entries
// satisfying, in plain double evaluation with d = 1 - a:
//   a*a + b*b == a,   b*b + d*d == d,   a*b + b*d == b.
// Candidate off-diagonal squares v are scanned inside the rounding windows
// of both diagonal conditions.
bool try_exact_entries(double a, double& b_out, double& d_out) {
  if (!(a >= 0.5 && a <= 1.0)) return false;
  const double d = 1.0 - a;
  if (a + d != 1.0 || 1.0 - d != a) return false;
  const double u = a * a;
  const double w = d * d;
  const double centers[2] = {a - u, d - w};
  for (double center : centers) {
    double v = center;
    for (int i = 0; i < 10; ++i) v = std::nextafter(v, 0.0);
    for (int i = 0; i < 21; ++i, v = std::nextafter(v, 2.0)) {
      if (!(v >= 0.0)) continue;
      if (u + v != a || v + w != d) continue;
      double b = std::sqrt(v);
      for (int db = 0; db < 6; ++db) {
        for (int dir = 0; dir < 2; ++dir) {
          double bb = b;
          for (int j = 0; j < db; ++j) {
            bb = std::nextafter(bb, dir == 0 ? 2.0 : -1.0);
          }
          if (bb >= 0.0 && bb * bb == v && a * bb + bb * d == bb) {
            b_out = bb;
            d_out = d;
            return true;
          }
        }
      }
    }
  }
  return false;
}

}  // namespace

SpinBlock SpinBlock::projector_for_angle(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double cc = c * c;
  const double ss = s * s;
  const bool cos_dominant = cc >= ss;
  const double sign_b = (c * s >= 0.0) ? 1.0 : -1.0;

  double a = cos_dominant ? cc : ss;
  double b = 0.0;
  double d = 0.0;
  bool found = false;
  double hi = a;
  double lo = a;
  for (int step = 0; step < 800 && !found; ++step) {
    double cand = a;
    if (step > 0) {
      if (step % 2 == 1) {
        hi = std::nextafter(hi, 2.0);
        cand = hi;
      } else {
        lo = std::nextafter(lo, 0.0);
        cand = lo;
      }
    }
    if (try_exact_entries(cand, b, d)) {
      a = cand;
      found = true;
    }
  }

  SpinBlock block;
  if (found) {
    block.exact = true;
  } else {
    // Fall back to the straightforwardly rounded entries; callers see the
    // defect through SiteSpinPvm::inexact_blocks. Never hit for the model
    // angle families, kept for arbitrary user input.
    a = cos_dominant ? cc : ss;
    d = 1.0 - a;
    b = std::abs(c * s);
    block.exact = false;
  }
  if (cos_dominant) {
    block.p00 = a;
    block.p11 = d;
  } else {
    block.p00 = d;
    block.p11 = a;
  }
  block.p01 = sign_b * b;
  return block;
}

SiteSpinPvm SiteSpinPvm::from_angles(std::span<const double> angles,
                                     double sign) {
  if (angles.empty()) {
    throw std::invalid_argument("SiteSpinPvm: empty angle list");
  }
  if (sign != 1.0 && sign != -1.0) {
    throw std::invalid_argument("SiteSpinPvm: sign must be +1 or -1");
  }
  SiteSpinPvm pvm;
  pvm.sign_ = sign;
  pvm.angles_.assign(angles.begin(), angles.end());
  pvm.blocks_.reserve(angles.size());
  for (double theta : angles) {
    SpinBlock b = SpinBlock::projector_for_angle(theta);
    if (sign < 0.0) b.p01 = -b.p01;
    pvm.blocks_.push_back(b);
  }
  return pvm;
}

int SiteSpinPvm::inexact_blocks() const {
  int n = 0;
  for (const SpinBlock& b : blocks_) n += b.exact ? 0 : 1;
  return n;
}

void SiteSpinPvm::project_vector(int outcome, Vector& psi) const {
  if (psi.size() != dim()) {
    throw std::invalid_argument("SiteSpinPvm: vector dimension mismatch");
  }
  for (int j = 0; j < sites(); ++j) {
    const SpinBlock b = outcome == 0 ? blocks_[j] : blocks_[j].complement();
    const Complex x0 = psi(2 * j);
    const Complex x1 = psi(2 * j + 1);
    psi(2 * j) = b.p00 * x0 + b.p01 * x1;
    psi(2 * j + 1) = b.p01 * x0 + b.p11 * x1;
  }
}

Matrix SiteSpinPvm::sandwich(int outcome, const Matrix& sigma) const {
  if (sigma.rows() != dim() || sigma.cols() != dim()) {
    throw std::invalid_argument("SiteSpinPvm: state dimension mismatch");
  }
  const int n = sites();
  Matrix out(sigma.rows(), sigma.cols());
  for (int x = 0; x < n; ++x) {
    const SpinBlock bx = outcome == 0 ? blocks_[x] : blocks_[x].complement();
    for (int y = 0; y < n; ++y) {
      const SpinBlock by = outcome == 0 ? blocks_[y] : blocks_[y].complement();
      const Complex s00 = sigma(2 * x, 2 * y);
      const Complex s01 = sigma(2 * x, 2 * y + 1);
      const Complex s10 = sigma(2 * x + 1, 2 * y);
      const Complex s11 = sigma(2 * x + 1, 2 * y + 1);
      // bx * S * by with bx, by symmetric real
      const Complex t00 = bx.p00 * s00 + bx.p01 * s10;
      const Complex t01 = bx.p00 * s01 + bx.p01 * s11;
      const Complex t10 = bx.p01 * s00 + bx.p11 * s10;
      const Complex t11 = bx.p01 * s01 + bx.p11 * s11;
      out(2 * x, 2 * y) = t00 * by.p00 + t01 * by.p01;
      out(2 * x, 2 * y + 1) = t00 * by.p01 + t01 * by.p11;
      out(2 * x + 1, 2 * y) = t10 * by.p00 + t11 * by.p01;
      out(2 * x + 1, 2 * y + 1) = t10 * by.p01 + t11 * by.p11;
    }
  }
  return out;
}

double SiteSpinPvm::outcome_probability(int outcome, const Matrix& sigma) const {
  if (sigma.rows() != dim() || sigma.cols() != dim()) {
    throw std::invalid_argument("SiteSpinPvm: state dimension mismatch");
  }
  double p = 0.0;
  for (int j = 0; j < sites(); ++j) {
    const SpinBlock b = outcome == 0 ? blocks_[j] : blocks_[j].complement();
    p += b.p00 * sigma(2 * j, 2 * j).real() +
         b.p11 * sigma(2 * j + 1, 2 * j + 1).real() +
         2.0 * b.p01 * sigma(2 * j, 2 * j + 1).real();
  }
  return p;
}

Matrix SiteSpinPvm::projector_matrix(int outcome) const {
  Matrix m = Matrix::Zero(dim(), dim());
  for (int j = 0; j < sites(); ++j) {
    const SpinBlock b = outcome == 0 ? blocks_[j] : blocks_[j].complement();
    m(2 * j, 2 * j) = b.p00;
    m(2 * j, 2 * j + 1) = b.p01;
    m(2 * j + 1, 2 * j) = b.p01;
    m(2 * j + 1, 2 * j + 1) = b.p11;
  }
  return m;
}

Pvm SiteSpinPvm::to_pvm() const {
  std::vector<Matrix> ps;
  ps.push_back(projector_matrix(0));
  ps.push_back(projector_matrix(1));
  return Pvm(std::move(ps), {"0", "1"});
}

SiteSpinChannel::SiteSpinChannel(std::vector<double> angles)
    : angles_(std::move(angles)),
      plus_(SiteSpinPvm::from_angles(angles_, +1.0)),
      minus_(SiteSpinPvm::from_angles(angles_, -1.0)) {}

Matrix SiteSpinChannel::apply_reference(const Matrix& sigma) const {
  Matrix out = plus_.sandwich(0, sigma) + plus_.sandwich(1, sigma);
  out += minus_.sandwich(0, sigma) + minus_.sandwich(1, sigma);
  return DensityOperator::resymmetrize(0.5 * out);
}

std::array<double, 4> SiteSpinChannel::block_eigenvalues(int x, int y) const {
  const double diff = angles_[x] - angles_[y];
  const double sum = angles_[x] + angles_[y];
  const double cd = std::cos(diff);
  const double sd = std::sin(diff);
  const double cs = std::cos(sum);
  const double ss = std::sin(sum);
  return {cd * cd, cs * cs, ss * ss, sd * sd};
}

void SiteSpinChannel::evolve_block(const Matrix& in, Matrix& out, long steps,
                                   int x, int y) const {
  const auto lam = block_eigenvalues(x, y);
  const double n = static_cast<double>(steps);
  const double l1 = std::pow(lam[0], n);  // (B00+B11)/2 component
  const double l3 = std::pow(lam[1], n);  // (B00-B11)/2 component
  const double l4 = std::pow(lam[2], n);  // (B01+B10)/2 component
  const double l2 = std::pow(lam[3], n);  // (B01-B10)/2 component
  const Complex b00 = in(2 * x, 2 * y);
  const Complex b01 = in(2 * x, 2 * y + 1);
  const Complex b10 = in(2 * x + 1, 2 * y);
  const Complex b11 = in(2 * x + 1, 2 * y + 1);
  const Complex ap = 0.5 * (b00 + b11);
  const Complex am = 0.5 * (b00 - b11);
  const Complex bp = 0.5 * (b01 + b10);
  const Complex bm = 0.5 * (b01 - b10);
  out(2 * x, 2 * y) = l1 * ap + l3 * am;
  out(2 * x + 1, 2 * y + 1) = l1 * ap - l3 * am;
  out(2 * x, 2 * y + 1) = l4 * bp + l2 * bm;
  out(2 * x + 1, 2 * y) = l4 * bp - l2 * bm;
}

Matrix SiteSpinChannel::evolve(const Matrix& sigma, long steps) const {
  if (sigma.rows() != dim() || sigma.cols() != dim()) {
    throw std::invalid_argument("SiteSpinChannel: state dimension mismatch");
  }
  if (steps < 0) throw std::invalid_argument("SiteSpinChannel: steps < 0");
  if (steps == 0) return sigma;
  const int n = sites();
  Matrix out(sigma.rows(), sigma.cols());
#pragma omp parallel for schedule(static)
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) evolve_block(sigma, out, steps, x, y);
  }
  return out;
}

Matrix SiteSpinChannel::evolve_serial(const Matrix& sigma, long steps) const {
  if (sigma.rows() != dim() || sigma.cols() != dim()) {
    throw std::invalid_argument("SiteSpinChannel: state dimension mismatch");
  }
  if (steps < 0) throw std::invalid_argument("SiteSpinChannel: steps < 0");
  if (steps == 0) return sigma;
  const int n = sites();
  Matrix out(sigma.rows(), sigma.cols());
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) evolve_block(sigma, out, steps, x, y);
  }
  return out;
}

MeasurementChannel SiteSpinChannel::to_channel() const {
  std::vector<Pvm> pvms;
  pvms.push_back(plus_.to_pvm());
  pvms.push_back(minus_.to_pvm());
  return MeasurementChannel(std::move(pvms), {0.5, 0.5});
}

}  // namespace seqmeas
