#include "seqmeas/box.hpp"

#include <cmath>
#include <stdexcept>

#include "seqmeas/quadrature.hpp"

namespace seqmeas::box {

void BoxConfig::validate() const {
  if (length <= 0.0 || mass <= 0.0 || wavenumber <= 0.0) {
    throw std::invalid_argument("BoxConfig: L, m, k must be positive");
  }
  if (modes < 2 || grid_points < 2) {
    throw std::invalid_argument("BoxConfig: D and G must be at least 2");
  }
}

bool BoxConfig::tomography_legal() const {
  return wavenumber <= M_PI / (4.0 * length) * (1.0 + 1e-12);
}

double BoxConfig::energy_level(int n) const {
  if (n < 1) throw std::invalid_argument("energy_level: n starts at 1");
  const double nn = static_cast<double>(n);
  return M_PI * M_PI * nn * nn / (2.0 * mass * length * length);
}

std::vector<double> energy_levels(const BoxConfig& cfg, int count) {
  std::vector<double> levels(count);
  for (int n = 1; n <= count; ++n) levels[n - 1] = cfg.energy_level(n);
  return levels;
}

BoxRepresentation::BoxRepresentation(BoxConfig cfg, Basis basis)
    : cfg_(cfg), basis_(basis) {
  cfg_.validate();
}

int BoxRepresentation::spatial_dim() const {
  return basis_ == Basis::Grid ? cfg_.grid_points : cfg_.modes;
}

std::vector<double> BoxRepresentation::grid_points() const {
  std::vector<double> xs(cfg_.grid_points);
  for (int j = 0; j < cfg_.grid_points; ++j) {
    xs[j] = (j + 0.5) * cfg_.length / cfg_.grid_points;
  }
  return xs;
}

RealVector BoxRepresentation::mode_samples(int n) const {
  const int g = cfg_.grid_points;
  RealVector v(g);
  const double norm = std::sqrt(2.0 / g);
  for (int j = 0; j < g; ++j) {
    v(j) = norm * std::sin(M_PI * n * (j + 0.5) / g);
  }
  return v;
}

RealMatrix BoxRepresentation::sine_modes(int count) const {
  RealMatrix u(cfg_.grid_points, count);
  for (int n = 1; n <= count; ++n) u.col(n - 1) = mode_samples(n);
  return u;
}

Vector BoxRepresentation::mode_spin_state(int n,
                                          const Eigen::Vector2cd& spin) const {
  StateTerm term;
  term.mode = n;
  term.spin = spin;
  term.amplitude = 1.0;
  return superposition_state(std::span<const StateTerm>(&term, 1));
}

Vector BoxRepresentation::superposition_state(
    std::span<const StateTerm> terms) const {
  const int nspace = spatial_dim();
  Vector psi = Vector::Zero(dim());
  for (const StateTerm& term : terms) {
    if (term.mode < 1) throw std::invalid_argument("state term: mode starts at 1");
    Eigen::Vector2cd spin = term.spin;
    const double sn = spin.norm();
    if (sn <= 0.0) throw std::invalid_argument("state term: zero spin vector");
    spin /= sn;
    if (basis_ == Basis::Grid) {
      const RealVector samples = mode_samples(term.mode);
      for (int j = 0; j < nspace; ++j) {
        psi(2 * j) += term.amplitude * samples(j) * spin(0);
        psi(2 * j + 1) += term.amplitude * samples(j) * spin(1);
      }
    } else {
      if (term.mode > nspace) {
        throw std::invalid_argument("state term: mode beyond truncation");
      }
      const int j = term.mode - 1;
      psi(2 * j) += term.amplitude * spin(0);
      psi(2 * j + 1) += term.amplitude * spin(1);
    }
  }
  const double n = psi.norm();
  if (n <= 0.0) throw std::invalid_argument("superposition_state: zero state");
  return psi / n;
}

namespace {

// int_0^L cos(g x) dx, stable small-argument branch.
double integral_cos(double g, double l) {
  const double gl = g * l;
  if (std::abs(gl) < 1e-8) return l * (1.0 - gl * gl / 6.0);
  return std::sin(gl) / g;
}

// int_0^L sin(g x) dx.
double integral_sin(double g, double l) {
  const double gl = g * l;
  if (std::abs(gl) < 1e-8) return 0.5 * g * l * l * (1.0 - gl * gl / 12.0);
  return (1.0 - std::cos(gl)) / g;
}

}  // namespace

TrigMatrices trig_matrices_closed_form(const BoxConfig& cfg) {
  cfg.validate();
  const int d = cfg.modes;
  const double l = cfg.length;
  const double kk = 2.0 * cfg.wavenumber;
  TrigMatrices out{RealMatrix(d, d), RealMatrix(d, d)};
  for (int n = 1; n <= d; ++n) {
    for (int m = 1; m <= n; ++m) {
      const double a = (n - m) * M_PI / l;
      const double b = (n + m) * M_PI / l;
      // (2/L) sin(n pi x/L) sin(m pi x/L) = (1/L)[cos(a x) - cos(b x)]
      const double c =
          (0.5 * (integral_cos(a - kk, l) + integral_cos(a + kk, l)) -
           0.5 * (integral_cos(b - kk, l) + integral_cos(b + kk, l))) /
          l;
      const double s =
          (0.5 * (integral_sin(kk + a, l) + integral_sin(kk - a, l)) -
           0.5 * (integral_sin(kk + b, l) + integral_sin(kk - b, l))) /
          l;
      out.c(n - 1, m - 1) = c;
      out.c(m - 1, n - 1) = c;
      out.s(n - 1, m - 1) = s;
      out.s(m - 1, n - 1) = s;
    }
  }
  return out;
}

TrigMatrices trig_matrices_quadrature(const BoxConfig& cfg, int panels) {
  cfg.validate();
  const int d = cfg.modes;
  const double l = cfg.length;
  const double kk = 2.0 * cfg.wavenumber;
  TrigMatrices out{RealMatrix(d, d), RealMatrix(d, d)};
  for (int n = 1; n <= d; ++n) {
    for (int m = 1; m <= n; ++m) {
      auto mode_product = [&](double x) {
        return (2.0 / l) * std::sin(n * M_PI * x / l) *
               std::sin(m * M_PI * x / l);
      };
      const double c = simpson(
          [&](double x) { return mode_product(x) * std::cos(kk * x); }, 0.0, l,
          panels);
      const double s = simpson(
          [&](double x) { return mode_product(x) * std::sin(kk * x); }, 0.0, l,
          panels);
      out.c(n - 1, m - 1) = c;
      out.c(m - 1, n - 1) = c;
      out.s(n - 1, m - 1) = s;
      out.s(m - 1, n - 1) = s;
    }
  }
  return out;
}

std::pair<SiteSpinPvm, SiteSpinPvm> build_f_projectors_grid(
    const BoxRepresentation& rep) {
  if (rep.basis() != Basis::Grid) {
    throw std::invalid_argument("build_f_projectors_grid: grid basis required");
  }
  std::vector<double> angles;
  for (double x : rep.grid_points()) {
    angles.push_back(rep.config().wavenumber * x);
  }
  return {SiteSpinPvm::from_angles(angles, +1.0),
          SiteSpinPvm::from_angles(angles, -1.0)};
}

EnergyProjectors build_f_projectors_energy(const BoxRepresentation& rep,
                                           bool verify) {
  if (rep.basis() != Basis::EnergyModes) {
    throw std::invalid_argument(
        "build_f_projectors_energy: energy basis required");
  }
  const TrigMatrices trig = trig_matrices_closed_form(rep.config());
  if (verify) {
    const TrigMatrices oracle = trig_matrices_quadrature(rep.config());
    const double dc = (trig.c - oracle.c).cwiseAbs().maxCoeff();
    const double ds = (trig.s - oracle.s).cwiseAbs().maxCoeff();
    if (std::max(dc, ds) > 1e-8) {
      throw std::runtime_error(
          "energy projectors: closed form and quadrature disagree by " +
          std::to_string(std::max(dc, ds)));
    }
  }
  const int d = rep.config().modes;
  const Index dim = 2 * d;
  Matrix plus = Matrix::Zero(dim, dim);
  Matrix minus = Matrix::Zero(dim, dim);
  for (int n = 0; n < d; ++n) {
    for (int m = 0; m < d; ++m) {
      const double c = trig.c(n, m);
      const double s = trig.s(n, m);
      const double id = (n == m) ? 1.0 : 0.0;
      // (1/2)(I(x)I + C(x)Z +- S(x)X), spin index fastest
      plus(2 * n, 2 * m) = 0.5 * (id + c);
      plus(2 * n + 1, 2 * m + 1) = 0.5 * (id - c);
      plus(2 * n, 2 * m + 1) = 0.5 * s;
      plus(2 * n + 1, 2 * m) = 0.5 * s;
      minus(2 * n, 2 * m) = 0.5 * (id + c);
      minus(2 * n + 1, 2 * m + 1) = 0.5 * (id - c);
      minus(2 * n, 2 * m + 1) = -0.5 * s;
      minus(2 * n + 1, 2 * m) = -0.5 * s;
    }
  }
  // Truncation makes these only approximately idempotent; measure the defect
  // and declare it as the construction tolerance.
  auto build = [&](const Matrix& f) {
    const Matrix comp = Matrix::Identity(dim, dim) - f;
    const double defect =
        std::max((f * f - f).cwiseAbs().maxCoeff(),
                 (comp * comp - comp).cwiseAbs().maxCoeff());
    return Pvm::dichotomic(f, std::max(2.0 * defect, tol::projector));
  };
  Pvm pvm_plus = build(plus);
  Pvm pvm_minus = build(minus);
  PvmDiagnostics diag_plus = pvm_plus.diagnostics();
  PvmDiagnostics diag_minus = pvm_minus.diagnostics();
  return EnergyProjectors{std::move(pvm_plus), std::move(pvm_minus), diag_plus,
                          diag_minus};
}

SiteSpinChannel heat_vision_channel(const BoxRepresentation& rep) {
  if (rep.basis() != Basis::Grid) {
    throw std::invalid_argument("heat_vision_channel: grid basis required");
  }
  std::vector<double> angles;
  for (double x : rep.grid_points()) {
    angles.push_back(rep.config().wavenumber * x);
  }
  return SiteSpinChannel(std::move(angles));
}

Matrix kernel_evolve(const BoxRepresentation& rep, const Matrix& sigma,
                     long steps) {
  return heat_vision_channel(rep).evolve(sigma, steps);
}

double phi_bound_squared(long steps, const BoxConfig& cfg) {
  if (steps < 0) throw std::invalid_argument("phi_bound: steps < 0");
  const double kl = cfg.wavenumber * cfg.length;
  const double power = 4.0 * static_cast<double>(steps);
  auto integrand = [&](double x) {
    const double c = std::cos(kl * x);
    const double s = std::sin(kl * x);
    const double c2 = c * c;
    const double s2 = s * s;
    const double cp = steps == 0 ? 1.0 : std::pow(c2, 0.5 * power);
    const double sp = steps == 0 ? 1.0 : std::pow(s2, 0.5 * power);
    return (1.0 - x) * (cp + sp);
  };
  // Even integrand: fold [-1,1] onto [0,1].
  return 4.0 * adaptive_simpson(integrand, 0.0, 1.0, 1e-9);
}

double phi_bound(long steps, const BoxConfig& cfg) {
  return std::sqrt(phi_bound_squared(steps, cfg));
}

double predicted_energy(double e0, long steps, const BoxConfig& cfg) {
  return e0 + cfg.wavenumber * cfg.wavenumber / cfg.mass *
                  static_cast<double>(steps);
}

Matrix position_kernel(const Matrix& sigma) {
  const Index g = sigma.rows() / 2;
  Matrix r(g, g);
  for (Index x = 0; x < g; ++x) {
    for (Index y = 0; y < g; ++y) {
      r(x, y) = sigma(2 * x, 2 * y) + sigma(2 * x + 1, 2 * y + 1);
    }
  }
  return r;
}

RealVector position_density(const Matrix& sigma) {
  const Index g = sigma.rows() / 2;
  RealVector rho(g);
  for (Index x = 0; x < g; ++x) {
    rho(x) = (sigma(2 * x, 2 * x) + sigma(2 * x + 1, 2 * x + 1)).real();
  }
  return rho;
}

std::vector<double> mode_populations(const BoxRepresentation& rep,
                                     const Matrix& sigma, int count) {
  std::vector<double> q(count, 0.0);
  if (rep.basis() == Basis::EnergyModes) {
    const int d = std::min<int>(count, rep.spatial_dim());
    for (int n = 0; n < d; ++n) {
      q[n] = (sigma(2 * n, 2 * n) + sigma(2 * n + 1, 2 * n + 1)).real();
    }
    return q;
  }
  const Matrix r = position_kernel(sigma);
  const RealMatrix u = rep.sine_modes(count);
  // q_n = u_n^T R u_n; the sine transform of the kernel's columns and rows.
  const Matrix ru = r * u.cast<Complex>();
  for (int n = 0; n < count; ++n) {
    q[n] = u.col(n).cast<Complex>().dot(ru.col(n)).real();
  }
  return q;
}

double tail_mass_modes(const BoxRepresentation& rep, const Matrix& sigma,
                       int k_cut) {
  const auto q = mode_populations(rep, sigma, k_cut + 1);
  double mass = 0.0;
  for (double qi : q) mass += qi;
  return mass;
}

EnergyMeasurement measured_energy(const BoxRepresentation& rep,
                                  const Matrix& sigma) {
  const int d = rep.config().modes;
  EnergyMeasurement em;
  em.mode_populations = mode_populations(rep, sigma, d);
  for (int n = 1; n <= d; ++n) {
    em.energy += rep.config().energy_level(n) * em.mode_populations[n - 1];
  }
  const int decile_start = d - d / 10;
  for (int n = decile_start; n < d; ++n) {
    em.top_decile_population += em.mode_populations[n];
  }
  em.truncation_flagged = em.top_decile_population > 1e-6;
  return em;
}

bool hamiltonian_is_zero_band(std::span<const double> levels) {
  if (levels.size() < 2) return false;
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] < levels[i - 1]) {
      throw std::invalid_argument("zero_band: levels must be nondecreasing");
    }
  }
  const double scale = std::max(std::abs(levels.front()),
                                std::abs(levels.back()));
  const double tol = 1e-9 * std::max(scale, 1.0);
  std::vector<std::size_t> cluster_sizes;
  std::size_t current = 1;
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] - levels[i - 1] <= tol) {
      ++current;
    } else {
      cluster_sizes.push_back(current);
      current = 1;
    }
  }
  cluster_sizes.push_back(current);
  if (cluster_sizes.size() < 2) return false;  // flat band
  std::size_t max_mult = 0;
  for (std::size_t c : cluster_sizes) max_mult = std::max(max_mult, c);
  // Bounded-degeneracy heuristic: no cluster may hold half the truncation.
  return max_mult <= (levels.size() + 1) / 2;
}

}  // namespace seqmeas::box
