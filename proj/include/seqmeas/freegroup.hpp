#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seqmeas/pvm.hpp"
#include "seqmeas/types.hpp"

namespace seqmeas::freegroup {

/// Fully reduced product of two reduced words over order-2 generators
/// (adjacent equal symbols cancel).
std::vector<int> multiply_words(std::span<const int> lhs,
                                std::span<const int> rhs);

/// Reduced words of Z_2 * ... * Z_2 (s factors) up to a maximum length,
/// enumerated by length then lexicographically, with per-generator index
/// maps so the left regular action costs O(1) per basis word.
class WordSpace {
 public:
  static WordSpace enumerate(int generators, int max_length);

  int generators() const { return generators_; }
  int max_length() const { return max_length_; }
  std::int64_t word_count() const {
    return static_cast<std::int64_t>(first_symbol_.size());
  }
  /// Number of words with length <= len.
  std::int64_t words_up_to(int len) const;
  int word_length(std::int64_t index) const;
  std::vector<int> symbols(std::int64_t index) const;
  std::int64_t index_of(std::span<const int> reduced_word) const;

  /// Index of g_i * w, or -1 when the product leaves the truncation.
  std::int64_t left_multiply(int generator, std::int64_t index) const {
    return neighbor_[static_cast<std::size_t>(generator) *
                         first_symbol_.size() +
                     static_cast<std::size_t>(index)];
  }

 private:
  int generators_ = 0;
  int max_length_ = 0;
  std::vector<std::int64_t> level_offset_;  // level_offset_[l] = first index of length l
  std::vector<std::int32_t> neighbor_;      // generators x word_count, -1 = dropped
  std::vector<std::int32_t> parent_;        // strip first symbol
  std::vector<std::int8_t> first_symbol_;   // -1 for the empty word
};

/// y = lambda(g_i) x with boundary truncation (basis permutation; words
/// pushed past max length are dropped). Exact involution on the interior.
void lambda_apply(const WordSpace& ws, int generator,
                  std::span<const double> x, std::span<double> y);

/// y = sum_i lambda(g_i) x, gather form. OpenMP-parallel over words;
/// `generator_sum_apply_serial` is the reference loop.
void generator_sum_apply(const WordSpace& ws, std::span<const double> x,
                         std::span<double> y);
void generator_sum_apply_serial(const WordSpace& ws, std::span<const double> x,
                                std::span<double> y);

struct NormEstimate {
  double value = 0.0;      // ||A v|| / ||v|| at the final iterate
  double residual = 0.0;   // relative Rayleigh residual of A^2
  long iterations = 0;
  bool converged = false;
};

/// Power iteration on A^2 (A = sum_i lambda(g_i) has symmetric spectrum) with
/// a fixed seed. The reported value ||A v||/||v|| is a certified lower bound
/// on the untruncated operator norm; on the truncated space it converges to
/// the top eigenvalue of the ball-of-radius-max_length adjacency.
NormEstimate generator_sum_norm(const WordSpace& ws, long max_iterations = 10000,
                                double rel_residual = 1e-8,
                                std::uint64_t seed = 1);

/// Exact oracle for the same quantity: the ball adjacency is radially
/// reducible to a (max_length+1)-point Jacobi matrix with off-diagonals
/// sqrt(s), sqrt(s-1), ..., sqrt(s-1).
double ball_norm_oracle(int generators, int max_length);

/// A-priori bound ||Omega_bar|| <= 1/2 + 1/sqrt(s) (Fell absorption plus
/// Cauchy-Schwarz on the generator sum); strictly below 1 for s >= 5.
double omega_norm_bound(int s);
/// (1/2)(1 + estimate/s) via Fell absorption.
double omega_norm_estimate(double generator_sum_norm, int s);

/// One step of the measurement channel built from the projectors
/// (lambda(g_i)+1)/2 at weight 1/s each; algebraically equal to
/// (1/2)(sigma + (1/s) sum_i lambda sigma lambda) and implemented that way.
Matrix apply_measurement_channel(const WordSpace& ws, const Matrix& sigma);

struct PurityDecay {
  std::vector<double> purity;    // steps 0..N
  std::vector<double> envelope;  // (1/2 + 1/sqrt(s))^{2N}
};

/// Requires sigma supported on words of length <= max_length - steps - 1 so
/// that truncation stays exact over the run.
PurityDecay purity_decay_check(const WordSpace& ws, const Matrix& sigma,
                               int steps);

int support_length(const WordSpace& ws, const Matrix& sigma,
                   double tol = 1e-14);

struct UnitalContrast {
  double norm = 0.0;               // superoperator norm
  double identity_residual = 0.0;  // ||Omega_bar vec(I) - vec(I)|| / ||vec(I)||
};

/// For any finite-dimensional PVM channel the vectorized identity is fixed
/// and the superoperator norm is 1 — the reason the free-group norm gap is
/// a truncated-infinite-dimensional effect.
UnitalContrast unital_fixed_point_check(const MeasurementChannel& channel);

}  // namespace seqmeas::freegroup
