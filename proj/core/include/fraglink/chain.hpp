#pragma once

// Markov-chain numerics on dense matrices: transition and Google matrices,
// PageRank, hitting and return times, fundamental matrices.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fraglink/graph.hpp"

namespace fraglink {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Column-stochastic square matrix: column j is the distribution of the
/// next state given the current state j.
class StochasticMatrix {
 public:
  /// Validates non-negativity and unit column sums (within 1e-12).
  explicit StochasticMatrix(Matrix m);

  const Matrix& matrix() const noexcept { return m_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  Matrix m_;
};

/// Damping constant c in (0,1) and a strictly positive distribution z.
class Personalization {
 public:
  Personalization(Vector z, double damping);

  static Personalization uniform(std::size_t n, double damping = 0.15);

  const Vector& z() const noexcept { return z_; }
  double damping() const noexcept { return damping_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(z_.size()); }

 private:
  Vector z_;
  double damping_;
};

/// Non-negative vector summing to one (within 1e-10).
class PageRankVector {
 public:
  explicit PageRankVector(Vector values);

  const Vector& values() const noexcept { return v_; }
  double operator[](std::size_t i) const { return v_(static_cast<Eigen::Index>(i)); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(v_.size()); }

 private:
  Vector v_;
};

inline constexpr double kDefaultDamping = 0.15;

/// Multiplicity-weighted uniform walk over all edge records of `g`. Apply the
/// configuration and the dangling rule first.
StochasticMatrix transition_matrix(const DiGraph& g);

/// (1-c) P + c z 1^T.
StochasticMatrix google_matrix(const StochasticMatrix& p, const Personalization& pers);

struct PowerOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 1'000'000;
  /// Iterate (I+G)/2 instead of G. Same fixed point; needed for periodic
  /// undamped chains where the plain iteration oscillates.
  bool lazy = false;
};

struct PowerResult {
  PageRankVector pagerank;
  std::size_t iterations;
  double residual;  // ||G x - x||_1
};

PowerResult pagerank_power(const StochasticMatrix& g, const PowerOptions& options = {});

/// pi = c (I - (1-c) P)^{-1} z, computed by an LU solve.
PageRankVector pagerank_direct(const StochasticMatrix& p, const Personalization& pers);

/// Stationary distribution of an irreducible chain, no damping. Throws
/// UnreachableError when the chain is reducible.
PageRankVector stationary_distribution(const DiGraph& g);

/// Expected number of steps to first reach `v` from each node; entry v is the
/// expected first return time. Every node must reach `v`.
Vector hitting_times(const DiGraph& g, NodeId v);

/// Expected first return time to `v`, +infinity when `v` is transient.
double expected_return_time(const DiGraph& g, NodeId v);

/// (I - R0)^{-1} for a non-negative square R0 with spectral radius below one.
Matrix fundamental_matrix(const Matrix& r0);

}  // namespace fraglink
