#include "fraglink/chain.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "fraglink/errors.hpp"
#include "linalg.hpp"

namespace fraglink {

namespace {

std::string describe(const std::vector<NodeId>& nodes) {
  std::ostringstream out;
  out << '{';
  for (std::size_t k = 0; k < nodes.size(); ++k) out << (k ? ", " : "") << nodes[k];
  out << '}';
  return out.str();
}

void require_all_reach(const DiGraph& g, NodeId v) {
  const auto component = closed_component_missing(g, v);
  if (!component.empty()) {
    throw UnreachableError(component, "node " + std::to_string(v) +
                                          " cannot be reached from the closed component " +
                                          describe(component));
  }
}

// Row-oriented transition probabilities: row i is the distribution of the
// successor of i.
Matrix row_transitions(const DiGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Matrix m = Matrix::Zero(n, n);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const std::size_t deg = g.out_degree(i);
    if (deg == 0) {
      throw ValidationError("node " + std::to_string(i) +
                            " is dangling; apply a dangling rule before building the chain");
    }
    for (std::size_t k : g.out_edges(i)) {
      const Edge& e = g.edges()[k];
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.target)) +=
          static_cast<double>(e.multiplicity) / static_cast<double>(deg);
    }
  }
  return m;
}

}  // namespace

StochasticMatrix::StochasticMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw ValidationError("stochastic matrix must be square and non-empty");
  }
  if ((m_.array() < 0.0).any()) throw ValidationError("stochastic matrix has negative entries");
  for (Eigen::Index j = 0; j < m_.cols(); ++j) {
    if (std::abs(m_.col(j).sum() - 1.0) > 1e-12) {
      throw ValidationError("column " + std::to_string(j) + " does not sum to one");
    }
  }
}

Personalization::Personalization(Vector z, double damping) : z_(std::move(z)), damping_(damping) {
  if (!(damping_ > 0.0 && damping_ < 1.0)) throw ValidationError("damping must lie in (0, 1)");
  if (z_.size() == 0) throw ValidationError("personalization vector is empty");
  if (!(z_.array() > 0.0).all()) {
    throw ValidationError("personalization vector must be strictly positive");
  }
  if (std::abs(z_.sum() - 1.0) > 1e-12) {
    throw ValidationError("personalization vector must sum to one");
  }
}

Personalization Personalization::uniform(std::size_t n, double damping) {
  const auto size = static_cast<Eigen::Index>(n);
  return Personalization(Vector::Constant(size, 1.0 / static_cast<double>(n)), damping);
}

PageRankVector::PageRankVector(Vector values) : v_(std::move(values)) {
  if ((v_.array() < -1e-14).any()) throw NumericError("PageRank vector has negative entries");
  v_ = v_.cwiseMax(0.0);
  if (std::abs(v_.sum() - 1.0) > 1e-10) throw NumericError("PageRank vector does not sum to one");
}

StochasticMatrix transition_matrix(const DiGraph& g) {
  return StochasticMatrix(row_transitions(g).transpose());
}

StochasticMatrix google_matrix(const StochasticMatrix& p, const Personalization& pers) {
  if (pers.size() != p.size()) throw ValidationError("personalization size does not match graph");
  const double c = pers.damping();
  Matrix g = (1.0 - c) * p.matrix();
  g.colwise() += c * pers.z();
  return StochasticMatrix(std::move(g));
}

PowerResult pagerank_power(const StochasticMatrix& g, const PowerOptions& options) {
  if (!(options.tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  const auto n = static_cast<Eigen::Index>(g.size());
  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it <= options.max_iterations; ++it) {
    const Vector gx = g.matrix() * x;
    residual = (gx - x).lpNorm<1>();
    if (residual <= options.tolerance) return {PageRankVector(x / x.sum()), it, residual};
    x = options.lazy ? Vector(0.5 * (x + gx)) : gx;
  }
  throw NonConvergenceError(std::vector<double>(x.data(), x.data() + x.size()),
                            options.max_iterations,
                            "power method did not reach tolerance (residual " +
                                std::to_string(residual) + ")");
}

PageRankVector pagerank_direct(const StochasticMatrix& p, const Personalization& pers) {
  if (pers.size() != p.size()) throw ValidationError("personalization size does not match graph");
  const double c = pers.damping();
  const auto n = static_cast<Eigen::Index>(p.size());
  const Matrix a = Matrix::Identity(n, n) - (1.0 - c) * p.matrix();
  const Vector pi = detail::solve_checked(a, Vector(c * pers.z()), "PageRank solve");
  return PageRankVector(pi / pi.sum());
}

PageRankVector stationary_distribution(const DiGraph& g) {
  // Irreducible iff every node reaches node 0 and is reachable from it.
  require_all_reach(g, 0);
  const auto from0 = nodes_reachable_from(g, 0);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (!from0[i]) {
      throw UnreachableError({i}, "chain is reducible: node " + std::to_string(i) +
                                      " is not reachable from node 0");
    }
  }
  const Matrix m = row_transitions(g);
  const auto n = m.rows();
  // pi^T (I - M) = 0 with the last equation swapped for sum(pi) = 1.
  Matrix a = Matrix::Identity(n, n) - m.transpose();
  a.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  const Vector pi = detail::solve_checked(a, rhs, "stationary distribution");
  return PageRankVector(pi);
}

Vector hitting_times(const DiGraph& g, NodeId v) {
  if (v >= g.node_count()) throw RangeError("node " + std::to_string(v) + " out of range");
  require_all_reach(g, v);
  Matrix m = row_transitions(g);
  const auto n = m.rows();
  // Arrivals at v stop the walk: drop column v, then H = 1 + M' H.
  m.col(static_cast<Eigen::Index>(v)).setZero();
  const Matrix a = Matrix::Identity(n, n) - m;
  return detail::solve_checked(a, Vector::Ones(n), "hitting-time solve");
}

double expected_return_time(const DiGraph& g, NodeId v) {
  if (v >= g.node_count()) throw RangeError("node " + std::to_string(v) + " out of range");
  const auto closure = nodes_reachable_from(g, v);
  const auto sub = induced_subgraph(g, closure);
  const NodeId local_v = sub.renumbered[v];
  const auto reach = nodes_reaching(sub.graph, local_v);
  for (bool r : reach) {
    if (!r) return std::numeric_limits<double>::infinity();
  }
  return hitting_times(sub.graph, local_v)(static_cast<Eigen::Index>(local_v));
}

Matrix fundamental_matrix(const Matrix& r0) {
  if (r0.rows() != r0.cols()) throw ValidationError("fundamental matrix needs a square block");
  if ((r0.array() < 0.0).any()) throw ValidationError("transient block has negative entries");
  const auto r = r0.rows();
  if (r == 0) return Matrix(0, 0);
  const Matrix a = Matrix::Identity(r, r) - r0;
  Eigen::PartialPivLU<Matrix> lu(a);
  if (!(lu.rcond() > detail::kMinReciprocalCondition)) {
    throw ImproperStructureError("I - R0 is singular: some transient state is never absorbed");
  }
  Matrix f = lu.solve(Matrix::Identity(r, r));
  // For non-negative R0 the inverse is entrywise non-negative iff rho(R0) < 1.
  if ((f.array() < -1e-9 * std::max(1.0, f.cwiseAbs().maxCoeff())).any()) {
    throw ImproperStructureError("spectral radius of the transient block is not below one");
  }
  return f;
}

}  // namespace fraglink
