#pragma once

// 3SAT gadget for Max-PageRank under exclusive link constraints, and a
// numeric check that satisfiable formulas give a return time of at most 77
// at the gadget's target while unsatisfiable ones give at least 99.

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fraglink/chain.hpp"
#include "fraglink/graph.hpp"
#include "fraglink/oracle.hpp"

namespace fraglink {

struct Literal {
  std::size_t variable = 0;  // 0-based
  bool positive = true;

  friend bool operator==(const Literal&, const Literal&) = default;
};

using Clause3 = std::array<Literal, 3>;

struct Cnf3 {
  std::size_t variable_count = 0;
  std::vector<Clause3> clauses;

  friend bool operator==(const Cnf3&, const Cnf3&) = default;
};

/// Throws ValidationError on out-of-range variables.
void validate(const Cnf3& f);

/// DIMACS: "c" comment lines, a "p cnf <vars> <clauses>" header, then clauses
/// of exactly three non-zero signed literals, each terminated by 0.
Cnf3 parse_dimacs(std::string_view text);
Cnf3 parse_dimacs_file(const std::filesystem::path& path);
std::string emit_dimacs(const Cnf3& f);

bool satisfies(const Cnf3& f, const std::vector<bool>& assignment);
/// Truth-table search; at most 20 variables.
std::optional<std::vector<bool>> satisfying_assignment(const Cnf3& f);

struct GadgetInstance {
  /// Nodes: source s = 0, clause nodes 1..m, target t = m + 1.
  DiGraph graph;
  ConstraintSet constraints;
  Personalization personalization;
  NodeId source = 0;
  NodeId target = 0;
  /// PageRank threshold 1/77.
  double threshold = 0.0;
  /// Literal carried by each fragile link (id 3j + l is literal l of clause j).
  std::vector<Literal> literal_of;
  std::size_t variable_count = 0;
};

GadgetInstance gadget_from_3sat(const Cnf3& f);

enum class Verdict { AtMost77, AtLeast99, Indeterminate };

std::string_view to_string(Verdict verdict);

struct SeparationReport {
  /// Best feasible configuration when the return time is at most 77.
  std::optional<Configuration> satisfiable_witness;
  /// Assignment read off the witness (literals of active links set true).
  std::optional<std::vector<bool>> assignment;
  double best_return_time = 0.0;
  double best_pagerank = 0.0;
  Verdict verdict = Verdict::Indeterminate;
  std::size_t feasible_configurations = 0;
};

/// Minimum expected return time to t over all feasible configurations of
/// the damped gadget chain. `options.cap` bounds the 3m fragile links.
SeparationReport verify_separation(const GadgetInstance& inst, const BruteForceOptions& options = {});

}  // namespace fraglink
