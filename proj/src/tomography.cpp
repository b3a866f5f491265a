#include "seqmeas/tomography.hpp"

#include <cmath>
#include <stdexcept>

namespace seqmeas::tomography {

namespace {

double binomial(int n, int k) {
  // Exact in double for n <= 2*20; moment counts stay far below that.
  double r = 1.0;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return r;
}

// Compensated accumulator. The triangular binomial relation mixes terms of
// size C(2M, M) ~ 4^M with results of size 1, so plain double summation
// loses ~4^M eps; a double-double running sum keeps the round trip exact to
// well below 1e-12 through order 20.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  void add(double x) {
    const double s = hi + x;
    const double bb = s - hi;
    const double err = (hi - (s - bb)) + (x - bb);
    hi = s;
    lo += err;
  }
  void add_product(double a, double b) {
    const double p = a * b;
    const double err = std::fma(a, b, -p);
    add(p);
    lo += err;
  }
  double value() const { return hi + lo; }
};

}  // namespace

MomentSet exact_moments(
    const std::function<double(std::span<const int>)>& alternating_probability,
    int count) {
  if (count < 1) throw std::invalid_argument("exact_moments: count < 1");
  MomentSet m;
  for (int order = 0; order < count; ++order) {
    std::vector<int> zeros(order + 1, 0);
    std::vector<int> ones(order + 1, 1);
    m.values.push_back(alternating_probability(zeros) +
                       alternating_probability(ones));
  }
  return m;
}

MomentSet empirical_moments(const sequences::SampleResult& samples, int count) {
  if (count < 1) throw std::invalid_argument("empirical_moments: count < 1");
  if (samples.total == 0) throw std::invalid_argument("empirical_moments: no samples");
  // the identity only holds for the alternating strategy; reject records
  // that carry a different choice sequence (foreign data has none)
  for (const auto& rec : samples.records) {
    for (std::size_t t = 0; t < rec.choices.size(); ++t) {
      if (rec.choices[t] != (t % 2 == 0 ? '+' : '-')) {
        throw std::invalid_argument(
            "empirical_moments: trajectories are not from the alternating "
            "strategy");
      }
    }
  }
  MomentSet m;
  const double total = static_cast<double>(samples.total);
  for (int order = 0; order < count; ++order) {
    const std::size_t prefix = static_cast<std::size_t>(order) + 1;
    std::uint64_t hits = 0;
    for (const auto& rec : samples.records) {
      if (rec.outcomes.size() < prefix) {
        throw std::invalid_argument("empirical_moments: trajectories shorter than requested order");
      }
      bool all0 = true, all1 = true;
      for (std::size_t t = 0; t < prefix; ++t) {
        all0 = all0 && rec.outcomes[t] == '0';
        all1 = all1 && rec.outcomes[t] == '1';
      }
      if (all0 || all1) hits += rec.count;
    }
    const double p = static_cast<double>(hits) / total;
    m.values.push_back(p);
    m.stderrs.push_back(std::sqrt(std::max(p * (1.0 - p), 0.0) / total));
  }
  return m;
}

HarmonicSet cospower_to_harmonics(const MomentSet& moments,
                                  double stderr_tol) {
  const int n = static_cast<int>(moments.values.size());
  if (n < 1) throw std::invalid_argument("cospower_to_harmonics: empty input");
  const bool with_err = !moments.stderrs.empty();
  HarmonicSet h;
  h.values.resize(n);
  h.values[0] = 1.0;
  std::vector<double> var(n, 0.0);
  for (int order = 1; order < n; ++order) {
    // 4^M m_M = C(2M,M) h_0 + 2 sum_{j=1}^{M} C(2M, M-j) h_j
    const double scale = std::pow(4.0, order);  // power of two, exact
    DoubleDouble rhs;
    rhs.add_product(scale, moments.values[order]);
    if (!moments.low.empty()) rhs.add_product(scale, moments.low[order]);
    rhs.add(-binomial(2 * order, order));
    double v = with_err ? std::pow(scale * moments.stderrs[order], 2) : 0.0;
    for (int j = 1; j < order; ++j) {
      const double coef = 2.0 * binomial(2 * order, order - j);
      rhs.add_product(-coef, h.values[j]);
      v += coef * coef * var[j];
    }
    h.values[order] = rhs.value() / 2.0;
    var[order] = v / 4.0;
  }
  if (with_err) {
    h.stderrs.resize(n, 0.0);
    for (int j = 1; j < n; ++j) {
      h.stderrs[j] = std::sqrt(var[j]);
      if (h.stderrs[j] > stderr_tol) h.ill_conditioned = true;
    }
  }
  return h;
}

MomentSet harmonics_to_moments(const HarmonicSet& harmonics) {
  const int n = static_cast<int>(harmonics.values.size());
  if (n < 1) throw std::invalid_argument("harmonics_to_moments: empty input");
  MomentSet m;
  m.values.resize(n);
  m.low.resize(n);
  for (int order = 0; order < n; ++order) {
    DoubleDouble sum;
    sum.add(binomial(2 * order, order));
    for (int j = 1; j <= order; ++j) {
      sum.add_product(2.0 * binomial(2 * order, order - j),
                      harmonics.values[j]);
    }
    const double scale = std::pow(4.0, order);  // power of two: exact divides
    const double main = sum.hi + sum.lo;
    const double resid = (sum.hi - main) + sum.lo;
    m.values[order] = main / scale;
    m.low[order] = resid / scale;
  }
  return m;
}

std::vector<double> cosine_coefficients(const HarmonicSet& harmonics,
                                        double k) {
  if (k <= 0.0) throw std::invalid_argument("cosine_coefficients: k must be positive");
  std::vector<double> c(harmonics.values.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double scale = (j == 0 ? 4.0 : 8.0) * k / M_PI;
    c[j] = scale * harmonics.values[j];
  }
  return c;
}

DensityReconstruction reconstruct_density(const HarmonicSet& harmonics,
                                          double k, double box_length,
                                          std::span<const double> xs) {
  if (k > M_PI / (4.0 * box_length) * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "reconstruct_density: k is outside the tomography range k <= pi/4L");
  }
  const std::vector<double> c = cosine_coefficients(harmonics, k);
  DensityReconstruction rec;
  rec.raw.resize(xs.size());
  rec.stderrs.assign(xs.size(), 0.0);
  const bool with_err = !harmonics.stderrs.empty();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double val = 0.0;
    double var = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      const double basis = std::cos(4.0 * k * j * xs[i]);
      val += c[j] * basis;
      if (with_err && j >= 1) {
        const double coef = 8.0 * k / M_PI * basis;
        var += coef * coef * harmonics.stderrs[j] * harmonics.stderrs[j];
      }
    }
    rec.raw[i] = val;
    rec.stderrs[i] = std::sqrt(var);
  }
  rec.clipped.resize(xs.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    rec.clipped[i] = std::max(rec.raw[i], 0.0);
    mass += rec.clipped[i];
  }
  if (mass > 0.0 && !xs.empty()) {
    // Renormalize on the sampled grid (assumes uniform spacing over [0, L]).
    const double dx = box_length / static_cast<double>(xs.size());
    const double total = mass * dx;
    if (total > 0.0) {
      for (double& v : rec.clipped) v /= total;
    }
  }
  return rec;
}

DecayFit decay_probe(const MomentSet& moments) {
  const int n = static_cast<int>(moments.values.size());
  if (n < 9) {
    throw std::invalid_argument("decay_probe: at least 8 nonzero-order moments required");
  }
  DecayFit fit;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (int order = 1; order < n; ++order) {
    if (moments.values[order] <= 0.0) continue;
    const double x = std::log(static_cast<double>(order));
    const double y = std::log(moments.values[order]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++m;
  }
  if (m < 2) throw std::invalid_argument("decay_probe: too few positive moments");
  const double denom = m * sxx - sx * sx;
  fit.exponent = (m * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.exponent * sx) / m;
  double ss = 0.0;
  for (int order = 1; order < n; ++order) {
    if (moments.values[order] <= 0.0) continue;
    const double x = std::log(static_cast<double>(order));
    const double y = std::log(moments.values[order]);
    const double r = y - (intercept + fit.exponent * x);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  fit.points = m;
  return fit;
}

}  // namespace seqmeas::tomography
