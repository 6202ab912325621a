#pragma once

// Exhaustive enumeration over fragile-link configurations and seeded
// random-walk simulation; the ground truth the optimizers are tested against.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fraglink/chain.hpp"
#include "fraglink/graph.hpp"
#include "fraglink/pri.hpp"

namespace fraglink {

/// Unordered pairs of fragile links that may not be active together.
class ConstraintSet {
 public:
  ConstraintSet() = default;
  /// Pairs are normalized to (smaller, larger), sorted and deduplicated.
  ConstraintSet(std::size_t fragile_count, std::vector<std::pair<FragileId, FragileId>> pairs);

  std::size_t fragile_count() const noexcept { return fragile_count_; }
  const std::vector<std::pair<FragileId, FragileId>>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }

  bool forbids(FragileId a, FragileId b) const;
  bool allows(const Configuration& cfg) const;

  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;

 private:
  std::size_t fragile_count_ = 0;
  std::vector<std::pair<FragileId, FragileId>> pairs_;
};

/// One pair of fragile ids per line; '#' starts a comment.
ConstraintSet load_constraints(std::string_view text, std::size_t fragile_count);
ConstraintSet load_constraints_file(const std::filesystem::path& path, std::size_t fragile_count);
std::string emit_constraints(const ConstraintSet& c);

/// PageRank of v under `cfg`: pi = c (I - (1-c) P)^{-1} z when damped,
/// otherwise the inverse expected return time (0 when v is transient).
/// Throws ValidationError when the configuration leaves a dangling node and
/// the rule is None.
double configuration_pagerank(const DiGraph& g, NodeId v, const Configuration& cfg,
                              const std::optional<Personalization>& pers, DanglingRule rule);

struct BruteForceOptions {
  /// Refuse more than 2^cap configurations.
  std::size_t cap = 20;
  std::size_t jobs = 1;
  Objective objective = Objective::Maximize;
  bool keep_table = true;
};

struct TableEntry {
  std::uint64_t mask = 0;
  double pagerank = 0.0;
};

struct BruteForceResult {
  double best_pagerank = 0.0;
  Configuration best;
  /// False when no admissible configuration exists, or (maximizing) when v
  /// is transient in all of them.
  bool reachable = false;
  std::size_t fragile_count = 0;
  std::size_t evaluated = 0;
  /// Configurations skipped because they leave a node dangling.
  std::size_t skipped = 0;
  /// Admissible configurations in enumeration order.
  std::vector<TableEntry> table;
};

/// Enumerates by increasing popcount, then lexicographically on the active
/// ids; ties keep the first configuration met. The result does not depend on
/// `jobs`.
BruteForceResult brute_force(const DiGraph& g, NodeId v, const std::optional<Personalization>& pers,
                             DanglingRule rule, const BruteForceOptions& options = {});

BruteForceResult brute_force_constrained(const DiGraph& g, NodeId v, const ConstraintSet& c,
                                         const std::optional<Personalization>& pers,
                                         DanglingRule rule, const BruteForceOptions& options = {});

/// "config_bits,pagerank" header, then one row per table entry.
std::string table_to_csv(const BruteForceResult& result);

struct WalkEstimate {
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  /// Fraction of steps that end in v.
  double frequency = 0.0;
  /// Standard error of `frequency` from 100 batch means.
  double standard_error = 0.0;
  std::size_t returns = 0;
  /// Mean gap between visits to v, NaN without a return.
  double mean_return_time = 0.0;
};

inline constexpr std::string_view kWalkGenerator = "mt19937_64";

/// Walk started at v over every edge record of `g` (apply the configuration
/// first). Uniform variates are the top 53 bits of each mt19937_64 output
/// scaled by 2^-53, so results are identical across platforms.
WalkEstimate simulate_walk(const DiGraph& g, NodeId v, const std::optional<Personalization>& pers,
                           std::size_t steps, std::uint64_t seed,
                           DanglingRule rule = DanglingRule::None);

}  // namespace fraglink
