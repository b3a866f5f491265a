#include "seqmeas/ladder.hpp"

#include <cmath>
#include <stdexcept>

#include "seqmeas/metrics.hpp"

namespace seqmeas::ladder {

void LadderConfig::validate() const {
  if (sites < 2) throw std::invalid_argument("LadderConfig: need at least 2 sites");
  if (wavenumber <= 0.0) throw std::invalid_argument("LadderConfig: k must be positive");
}

namespace {

std::vector<double> site_angles(const LadderConfig& cfg) {
  std::vector<double> angles(cfg.sites);
  for (int n = 1; n <= cfg.sites; ++n) {
    angles[n - 1] = cfg.wavenumber * n;
  }
  return angles;
}

}  // namespace

std::pair<SiteSpinPvm, SiteSpinPvm> build_g_projectors(int sites, double k) {
  LadderConfig cfg{sites, k};
  cfg.validate();
  const auto angles = site_angles(cfg);
  return {SiteSpinPvm::from_angles(angles, +1.0),
          SiteSpinPvm::from_angles(angles, -1.0)};
}

SiteSpinChannel ladder_channel(const LadderConfig& cfg) {
  cfg.validate();
  return SiteSpinChannel(site_angles(cfg));
}

Matrix analytic_limit(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() % 2 != 0) {
    throw std::invalid_argument("analytic_limit: expected a site (x) spin state");
  }
  const Index sites = sigma.rows() / 2;
  Matrix limit = Matrix::Zero(sigma.rows(), sigma.cols());
  for (Index n = 0; n < sites; ++n) {
    const Complex pop = sigma(2 * n, 2 * n) + sigma(2 * n + 1, 2 * n + 1);
    limit(2 * n, 2 * n) = 0.5 * pop;
    limit(2 * n + 1, 2 * n + 1) = 0.5 * pop;
  }
  return limit;
}

ResonanceReport resonance_check(const LadderConfig& cfg, double tol) {
  cfg.validate();
  SiteSpinChannel channel = ladder_channel(cfg);
  ResonanceReport report;
  for (int x = 0; x < cfg.sites; ++x) {
    for (int y = 0; y < cfg.sites; ++y) {
      const auto lam = channel.block_eigenvalues(x, y);
      for (int i = 0; i < 4; ++i) {
        // The diagonal spin-trace eigenvalue cos^2(0) = 1 is the conserved
        // population component, not a resonance.
        if (x == y && i == 0) continue;
        if (lam[i] >= 1.0 - tol) {
          report.resonant = true;
        } else {
          report.slowest_factor = std::max(report.slowest_factor, lam[i]);
        }
      }
    }
  }
  return report;
}

double ladder_energy(const Matrix& sigma) {
  const Index sites = sigma.rows() / 2;
  double e = 0.0;
  for (Index n = 0; n < sites; ++n) {
    const double level = static_cast<double>((n + 1) * (n + 1));
    e += level * (sigma(2 * n, 2 * n) + sigma(2 * n + 1, 2 * n + 1)).real();
  }
  return e;
}

std::vector<ConvergencePoint> convergence_curve(const LadderConfig& cfg,
                                                const Matrix& sigma0,
                                                std::span<const long> steps) {
  cfg.validate();
  SiteSpinChannel channel = ladder_channel(cfg);
  const Matrix limit = analytic_limit(sigma0);
  std::vector<ConvergencePoint> curve;
  curve.reserve(steps.size());
  for (long n : steps) {
    const Matrix state = channel.evolve(sigma0, n);
    ConvergencePoint pt;
    pt.step = n;
    pt.trace_distance_to_limit = trace_distance(state, limit);
    pt.energy = ladder_energy(state);
    pt.purity = purity(state);
    pt.entropy_bits = von_neumann_entropy_bits(state);
    curve.push_back(pt);
  }
  return curve;
}

ConvergenceSearch find_convergence(const LadderConfig& cfg,
                                   const Matrix& sigma0, double threshold,
                                   long max_steps) {
  std::vector<long> schedule;
  for (long n = 0; n <= max_steps;) {
    schedule.push_back(n);
    n = n == 0 ? 1 : 2 * n;
  }
  ConvergenceSearch search;
  search.curve = convergence_curve(cfg, sigma0, schedule);
  for (std::size_t i = 1; i < search.curve.size(); ++i) {
    if (search.curve[i].trace_distance_to_limit >
        search.curve[i - 1].trace_distance_to_limit + 1e-12) {
      search.monotone = false;
    }
  }
  // Locate the crossing on the doubling schedule, then bisect.
  long lo = 0, hi = -1;
  for (const auto& pt : search.curve) {
    if (pt.trace_distance_to_limit <= threshold) {
      hi = pt.step;
      break;
    }
    lo = pt.step;
  }
  if (hi < 0) return search;
  SiteSpinChannel channel = ladder_channel(cfg);
  const Matrix limit = analytic_limit(sigma0);
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    const double dist = trace_distance(channel.evolve(sigma0, mid), limit);
    (dist <= threshold ? hi : lo) = mid;
  }
  search.steps_to_threshold = hi;
  return search;
}

}  // namespace seqmeas::ladder
