#include "seqmeas/freegroup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqmeas/rng.hpp"
#include "seqmeas/superoperator.hpp"

namespace seqmeas::freegroup {

std::vector<int> multiply_words(std::span<const int> lhs,
                                std::span<const int> rhs) {
  // stack reduction handles unreduced input and cascades across the seam
  std::vector<int> out;
  out.reserve(lhs.size() + rhs.size());
  auto push = [&out](int sym) {
    if (!out.empty() && out.back() == sym) {
      out.pop_back();
    } else {
      out.push_back(sym);
    }
  };
  for (int sym : lhs) push(sym);
  for (int sym : rhs) push(sym);
  return out;
}

WordSpace WordSpace::enumerate(int generators, int max_length) {
  if (generators < 2) {
    throw std::invalid_argument("WordSpace: need at least 2 generators");
  }
  if (max_length < 0) {
    throw std::invalid_argument("WordSpace: negative max length");
  }
  WordSpace ws;
  ws.generators_ = generators;
  ws.max_length_ = max_length;

  // Count words first: 1 + sum_l s (s-1)^{l-1}.
  std::int64_t count = 1;
  std::int64_t level = 0;
  ws.level_offset_.assign(max_length + 2, 0);
  ws.level_offset_[0] = 0;
  for (int l = 1; l <= max_length; ++l) {
    level = (l == 1) ? generators : level * (generators - 1);
    ws.level_offset_[l] = count;
    count += level;
  }
  ws.level_offset_[max_length + 1] = count;
  if (count > (std::int64_t(1) << 31) - 2) {
    throw std::invalid_argument("WordSpace: truncation too large for 32-bit indexing");
  }

  ws.first_symbol_.assign(count, -1);
  ws.parent_.assign(count, -1);
  ws.neighbor_.assign(static_cast<std::size_t>(generators) * count, -1);

  auto neighbor_at = [&](int g, std::int64_t w) -> std::int32_t& {
    return ws.neighbor_[static_cast<std::size_t>(g) * count +
                        static_cast<std::size_t>(w)];
  };

  // Level-by-level construction. Children of each level appear ordered by
  // leading symbol, preserving lexicographic order within levels.
  std::int64_t next = 1;
  for (int l = 0; l < max_length; ++l) {
    const std::int64_t begin = ws.level_offset_[l];
    const std::int64_t end = ws.level_offset_[l + 1];
    for (int g = 0; g < generators; ++g) {
      for (std::int64_t w = begin; w < end; ++w) {
        if (ws.first_symbol_[w] == g) continue;
        const std::int64_t child = next++;
        ws.first_symbol_[child] = static_cast<std::int8_t>(g);
        ws.parent_[child] = static_cast<std::int32_t>(w);
        neighbor_at(g, child) = static_cast<std::int32_t>(w);
        neighbor_at(g, w) = static_cast<std::int32_t>(child);
      }
    }
  }
  if (next != count) {
    throw std::logic_error("WordSpace: enumeration count mismatch");
  }
  return ws;
}

std::int64_t WordSpace::words_up_to(int len) const {
  if (len < 0) return 0;
  if (len >= max_length_) return word_count();
  return level_offset_[len + 1];
}

int WordSpace::word_length(std::int64_t index) const {
  if (index < 0 || index >= word_count()) {
    throw std::out_of_range("WordSpace: index out of range");
  }
  int len = 0;
  while (parent_[index] >= 0) {
    index = parent_[index];
    ++len;
  }
  return len;
}

std::vector<int> WordSpace::symbols(std::int64_t index) const {
  if (index < 0 || index >= word_count()) {
    throw std::out_of_range("WordSpace: index out of range");
  }
  std::vector<int> syms;
  while (first_symbol_[index] >= 0) {
    syms.push_back(first_symbol_[index]);
    index = parent_[index];
  }
  return syms;
}

std::int64_t WordSpace::index_of(std::span<const int> reduced_word) const {
  std::int64_t idx = 0;
  for (auto it = reduced_word.rbegin(); it != reduced_word.rend(); ++it) {
    if (*it < 0 || *it >= generators_) {
      throw std::invalid_argument("WordSpace: symbol out of range");
    }
    idx = left_multiply(*it, idx);
    if (idx < 0) return -1;
  }
  return idx;
}

void lambda_apply(const WordSpace& ws, int generator,
                  std::span<const double> x, std::span<double> y) {
  const std::int64_t n = ws.word_count();
  if (static_cast<std::int64_t>(x.size()) != n ||
      static_cast<std::int64_t>(y.size()) != n) {
    throw std::invalid_argument("lambda_apply: vector length mismatch");
  }
  // Gather form: lambda(g) is symmetric, so y[w] = x[g w].
  for (std::int64_t w = 0; w < n; ++w) {
    const std::int64_t src = ws.left_multiply(generator, w);
    y[w] = src >= 0 ? x[src] : 0.0;
  }
}

void generator_sum_apply_serial(const WordSpace& ws, std::span<const double> x,
                                std::span<double> y) {
  const std::int64_t n = ws.word_count();
  const int s = ws.generators();
  for (std::int64_t w = 0; w < n; ++w) {
    double acc = 0.0;
    for (int g = 0; g < s; ++g) {
      const std::int64_t src = ws.left_multiply(g, w);
      if (src >= 0) acc += x[src];
    }
    y[w] = acc;
  }
}

void generator_sum_apply(const WordSpace& ws, std::span<const double> x,
                         std::span<double> y) {
  const std::int64_t n = ws.word_count();
  if (static_cast<std::int64_t>(x.size()) != n ||
      static_cast<std::int64_t>(y.size()) != n) {
    throw std::invalid_argument("generator_sum_apply: vector length mismatch");
  }
  const int s = ws.generators();
#pragma omp parallel for schedule(static)
  for (std::int64_t w = 0; w < n; ++w) {
    double acc = 0.0;
    for (int g = 0; g < s; ++g) {
      const std::int64_t src = ws.left_multiply(g, w);
      if (src >= 0) acc += x[src];
    }
    y[w] = acc;
  }
}

namespace {

// Deterministic chunked reductions: fixed chunk size, partials summed in
// chunk order, so results do not depend on the thread count.
constexpr std::int64_t reduce_chunk = 1 << 14;

double chunked_dot(std::span<const double> a, std::span<const double> b) {
  const std::int64_t n = static_cast<std::int64_t>(a.size());
  const std::int64_t chunks = (n + reduce_chunk - 1) / reduce_chunk;
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::int64_t lo = c * reduce_chunk;
    const std::int64_t hi = std::min(n, lo + reduce_chunk);
    double acc = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) acc += a[i] * b[i];
    partial[c] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

NormEstimate generator_sum_norm(const WordSpace& ws, long max_iterations,
                                double rel_residual, std::uint64_t seed) {
  const std::int64_t n = ws.word_count();
  std::vector<double> v(n), av(n), aav(n);
  std::mt19937_64 rng(seed);
  for (std::int64_t i = 0; i < n; ++i) v[i] = uniform_unit(rng) - 0.5;

  NormEstimate est;
  double rho = 0.0;
  for (long it = 1; it <= max_iterations; ++it) {
    const double vnorm = std::sqrt(chunked_dot(v, v));
    if (vnorm <= 0.0) throw std::runtime_error("generator_sum_norm: zero iterate");
    for (std::int64_t i = 0; i < n; ++i) v[i] /= vnorm;
    generator_sum_apply(ws, v, av);
    generator_sum_apply(ws, av, aav);
    rho = chunked_dot(v, aav);  // = ||A v||^2, Rayleigh quotient of A^2
    double diff = 0.0;
    const double scale = std::max(rho, 1e-300);
    {
      std::vector<double> r(n);
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < n; ++i) r[i] = aav[i] - rho * v[i];
      diff = std::sqrt(chunked_dot(r, r));
    }
    est.iterations = it;
    est.residual = diff / scale;
    est.value = std::sqrt(std::max(rho, 0.0));
    if (est.residual < rel_residual) {
      est.converged = true;
      break;
    }
    v.swap(aav);
  }
  return est;
}

double ball_norm_oracle(int generators, int max_length) {
  const int n = max_length + 1;
  RealMatrix t = RealMatrix::Zero(n, n);
  for (int j = 0; j + 1 < n; ++j) {
    const double b = j == 0 ? std::sqrt(static_cast<double>(generators))
                            : std::sqrt(static_cast<double>(generators - 1));
    t(j, j + 1) = b;
    t(j + 1, j) = b;
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(t, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

double omega_norm_bound(int s) {
  if (s < 2) throw std::invalid_argument("omega_norm_bound: s >= 2 required");
  return 0.5 + 1.0 / std::sqrt(static_cast<double>(s));
}

double omega_norm_estimate(double generator_sum_norm, int s) {
  return 0.5 * (1.0 + generator_sum_norm / static_cast<double>(s));
}

Matrix apply_measurement_channel(const WordSpace& ws, const Matrix& sigma) {
  const std::int64_t n = ws.word_count();
  if (sigma.rows() != n || sigma.cols() != n) {
    throw std::invalid_argument("apply_measurement_channel: dimension mismatch");
  }
  const int s = ws.generators();
  Matrix acc = Matrix::Zero(n, n);
  // lambda sigma lambda as an index pushforward:
  // (lambda sigma lambda)[gw, gw'] = sigma[w, w'], rows/cols out of range drop.
  for (int g = 0; g < s; ++g) {
#pragma omp parallel for schedule(static)
    for (std::int64_t w = 0; w < n; ++w) {
      const std::int64_t row = ws.left_multiply(g, w);
      if (row < 0) continue;
      for (std::int64_t w2 = 0; w2 < n; ++w2) {
        const std::int64_t col = ws.left_multiply(g, w2);
        if (col >= 0) acc(row, col) += sigma(w, w2);
      }
    }
  }
  Matrix out = 0.5 * sigma + (0.5 / static_cast<double>(s)) * acc;
  return DensityOperator::resymmetrize(out);
}

int support_length(const WordSpace& ws, const Matrix& sigma, double tol) {
  int longest = 0;
  for (std::int64_t w = 0; w < ws.word_count(); ++w) {
    if (sigma.row(w).cwiseAbs().maxCoeff() > tol ||
        sigma.col(w).cwiseAbs().maxCoeff() > tol) {
      longest = std::max(longest, ws.word_length(w));
    }
  }
  return longest;
}

PurityDecay purity_decay_check(const WordSpace& ws, const Matrix& sigma,
                               int steps) {
  if (steps < 0) throw std::invalid_argument("purity_decay_check: steps < 0");
  const int support = support_length(ws, sigma);
  if (support > ws.max_length() - steps - 1) {
    throw std::invalid_argument(
        "purity_decay_check: support length " + std::to_string(support) +
        " too close to the boundary for " + std::to_string(steps) +
        " exact steps (need <= max_length - steps - 1)");
  }
  const double envelope_base = omega_norm_bound(ws.generators());
  PurityDecay decay;
  Matrix state = sigma;
  for (int t = 0; t <= steps; ++t) {
    decay.purity.push_back(state.squaredNorm());
    decay.envelope.push_back(std::pow(envelope_base, 2.0 * t));
    if (t < steps) state = apply_measurement_channel(ws, state);
  }
  return decay;
}

UnitalContrast unital_fixed_point_check(const MeasurementChannel& channel) {
  Superoperator superop = Superoperator::from_channel(channel);
  UnitalContrast result;
  result.norm = superop.operator_norm();
  const Vector id_vec =
      vectorize(Matrix::Identity(channel.dim(), channel.dim()));
  result.identity_residual =
      (superop.apply(id_vec) - id_vec).norm() / id_vec.norm();
  return result;
}

}  // namespace seqmeas::freegroup
