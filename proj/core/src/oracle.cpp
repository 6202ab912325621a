#include "fraglink/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "fraglink/errors.hpp"

namespace fraglink {

ConstraintSet::ConstraintSet(std::size_t fragile_count,
                             std::vector<std::pair<FragileId, FragileId>> pairs)
    : fragile_count_(fragile_count) {
  for (auto& [a, b] : pairs) {
    if (a >= fragile_count || b >= fragile_count) {
      throw RangeError("constraint pair (" + std::to_string(a) + ", " + std::to_string(b) +
                       ") names an unknown fragile link; there are " +
                       std::to_string(fragile_count));
    }
    if (a == b) throw ValidationError("constraint pair repeats fragile link " + std::to_string(a));
    if (a > b) std::swap(a, b);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  pairs_ = std::move(pairs);
}

bool ConstraintSet::forbids(FragileId a, FragileId b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(pairs_.begin(), pairs_.end(), std::make_pair(a, b));
}

bool ConstraintSet::allows(const Configuration& cfg) const {
  for (const auto& [a, b] : pairs_) {
    if (cfg.active(a) && cfg.active(b)) return false;
  }
  return true;
}

ConstraintSet load_constraints(std::string_view text, std::size_t fragile_count) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::pair<FragileId, FragileId>> pairs;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::vector<std::string> tokens;
    for (std::string w; words >> w;) tokens.push_back(w);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) throw ParseError(line_no, "expected two fragile link ids");
    std::pair<FragileId, FragileId> p;
    try {
      std::size_t used_a = 0;
      std::size_t used_b = 0;
      p.first = std::stoull(tokens[0], &used_a);
      p.second = std::stoull(tokens[1], &used_b);
      if (used_a != tokens[0].size() || used_b != tokens[1].size() || tokens[0][0] == '-' ||
          tokens[1][0] == '-') {
        throw std::invalid_argument("id");
      }
    } catch (const std::logic_error&) {
      throw ParseError(line_no, "fragile link ids must be non-negative integers");
    }
    pairs.push_back(p);
  }
  return ConstraintSet(fragile_count, std::move(pairs));
}

ConstraintSet load_constraints_file(const std::filesystem::path& path, std::size_t fragile_count) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open constraints file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_constraints(buf.str(), fragile_count);
}

std::string emit_constraints(const ConstraintSet& c) {
  std::ostringstream out;
  for (const auto& [a, b] : c.pairs()) out << a << ' ' << b << '\n';
  return out.str();
}

double configuration_pagerank(const DiGraph& g, NodeId v, const Configuration& cfg,
                              const std::optional<Personalization>& pers, DanglingRule rule) {
  if (v >= g.node_count()) throw RangeError("node " + std::to_string(v) + " out of range");
  const DiGraph walk = handle_dangling(apply_configuration(handle_dangling(g, rule), cfg), rule);
  if (pers) return pagerank_direct(transition_matrix(walk), *pers)[v];
  const double phi = expected_return_time(walk, v);
  return std::isinf(phi) ? 0.0 : 1.0 / phi;
}

namespace {

/// Popcount first, then lexicographic on ascending id lists.
bool mask_less(std::uint64_t a, std::uint64_t b) {
  const int pa = std::popcount(a);
  const int pb = std::popcount(b);
  if (pa != pb) return pa < pb;
  const std::uint64_t diff = a ^ b;
  return diff != 0 && (a & (diff & (~diff + 1))) != 0;
}

std::vector<std::uint64_t> admissible_masks(std::size_t d, const ConstraintSet* c) {
  std::vector<std::uint64_t> conflict(d, 0);
  if (c != nullptr) {
    for (const auto& [a, b] : c->pairs()) {
      conflict[a] |= std::uint64_t{1} << b;
      conflict[b] |= std::uint64_t{1} << a;
    }
  }
  std::vector<std::uint64_t> out;
  std::function<void(std::size_t, std::uint64_t)> walk = [&](std::size_t f, std::uint64_t mask) {
    if (f == d) {
      out.push_back(mask);
      return;
    }
    walk(f + 1, mask);
    if ((conflict[f] & mask) == 0) walk(f + 1, mask | (std::uint64_t{1} << f));
  };
  walk(0, 0);
  std::sort(out.begin(), out.end(), mask_less);
  return out;
}

BruteForceResult enumerate(const DiGraph& g, NodeId v, const ConstraintSet* c,
                           const std::optional<Personalization>& pers, DanglingRule rule,
                           const BruteForceOptions& options) {
  if (v >= g.node_count()) throw RangeError("node " + std::to_string(v) + " out of range");
  const std::size_t d = g.fragile_count();
  const std::size_t cap = std::min<std::size_t>(options.cap, 63);
  if (d > cap) {
    throw CapExceededError("brute force over d = " + std::to_string(d) +
                           " fragile links needs 2^" + std::to_string(d) +
                           " evaluations; the cap is 2^" + std::to_string(cap));
  }
  if (pers && pers->size() != g.node_count()) {
    throw ValidationError("personalization size does not match the graph");
  }
  const DiGraph base = handle_dangling(g, rule);
  const std::vector<std::uint64_t> masks = admissible_masks(d, c);

  std::vector<double> value(masks.size(), 0.0);
  std::vector<char> valid(masks.size(), 0);
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(masks.size(), 1));
  std::vector<std::exception_ptr> failure(jobs);
  auto work = [&](std::size_t shard) {
    try {
      for (std::size_t k = shard; k < masks.size(); k += jobs) {
        try {
          value[k] = configuration_pagerank(base, v, Configuration::from_mask(d, masks[k]), pers, rule);
          valid[k] = 1;
        } catch (const ValidationError&) {
          valid[k] = 0;  // dangling node without a rule
        }
      }
    } catch (...) {
      failure[shard] = std::current_exception();
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t s = 0; s < jobs; ++s) pool.emplace_back(work, s);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failure) {
    if (f) std::rethrow_exception(f);
  }

  BruteForceResult result;
  result.fragile_count = d;
  result.best = Configuration(d);
  bool found = false;
  const bool maximize = options.objective == Objective::Maximize;
  for (std::size_t k = 0; k < masks.size(); ++k) {
    if (!valid[k]) {
      ++result.skipped;
      continue;
    }
    ++result.evaluated;
    if (options.keep_table) result.table.push_back({masks[k], value[k]});
    if (value[k] > 0.0) result.reachable = true;
    const double slack = 1e-12 * std::max(1.0, std::abs(result.best_pagerank));
    const bool better = maximize ? value[k] > result.best_pagerank + slack
                                 : value[k] < result.best_pagerank - slack;
    if (!found || better) {
      found = true;
      result.best_pagerank = value[k];
      result.best = Configuration::from_mask(d, masks[k]);
    }
  }
  if (!found) result.reachable = false;
  return result;
}

}  // namespace

BruteForceResult brute_force(const DiGraph& g, NodeId v, const std::optional<Personalization>& pers,
                             DanglingRule rule, const BruteForceOptions& options) {
  return enumerate(g, v, nullptr, pers, rule, options);
}

BruteForceResult brute_force_constrained(const DiGraph& g, NodeId v, const ConstraintSet& c,
                                         const std::optional<Personalization>& pers,
                                         DanglingRule rule, const BruteForceOptions& options) {
  if (c.fragile_count() != g.fragile_count() && !c.empty()) {
    throw ValidationError("constraint set was built for " + std::to_string(c.fragile_count()) +
                          " fragile links, graph has " + std::to_string(g.fragile_count()));
  }
  return enumerate(g, v, &c, pers, rule, options);
}

std::string table_to_csv(const BruteForceResult& result) {
  std::ostringstream out;
  out << "config_bits,pagerank\n";
  char buf[32];
  for (const TableEntry& e : result.table) {
    std::snprintf(buf, sizeof buf, "%.17g", e.pagerank);
    out << Configuration::from_mask(result.fragile_count, e.mask).bits() << ',' << buf << '\n';
  }
  return out.str();
}

WalkEstimate simulate_walk(const DiGraph& g0, NodeId v, const std::optional<Personalization>& pers,
                           std::size_t steps, std::uint64_t seed, DanglingRule rule) {
  if (steps == 0) throw ValidationError("steps must be at least 1");
  if (v >= g0.node_count()) throw RangeError("node " + std::to_string(v) + " out of range");
  const DiGraph g = handle_dangling(g0, rule);
  const std::size_t n = g.node_count();
  if (pers && pers->size() != n) throw ValidationError("personalization size does not match the graph");

  // Cumulative multiplicities per node for inverse-CDF sampling.
  std::vector<std::vector<double>> cumulative(n);
  std::vector<std::vector<NodeId>> succ(n);
  for (NodeId i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t k : g.out_edges(i)) {
      total += static_cast<double>(g.edges()[k].multiplicity);
      cumulative[i].push_back(total);
      succ[i].push_back(g.edges()[k].target);
    }
  }
  std::vector<double> teleport;
  if (pers) {
    double total = 0.0;
    for (NodeId i = 0; i < n; ++i) {
      total += pers->z()(static_cast<Eigen::Index>(i));
      teleport.push_back(total);
    }
  }

  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto pick = [&](const std::vector<double>& cdf) {
    const double u = uniform() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                            static_cast<std::ptrdiff_t>(cdf.size()) - 1));
  };

  constexpr std::size_t kBatches = 100;
  std::vector<std::size_t> batch_hits(kBatches, 0);
  std::vector<std::size_t> batch_len(kBatches, 0);
  WalkEstimate est;
  est.seed = seed;
  est.steps = steps;
  std::size_t hits = 0;
  std::size_t last_visit = 0;
  double gap_sum = 0.0;
  NodeId at = v;
  for (std::size_t t = 1; t <= steps; ++t) {
    if (pers && uniform() < pers->damping()) {
      at = pick(teleport);
    } else {
      at = succ[at][pick(cumulative[at])];
    }
    const std::size_t batch = std::min(kBatches - 1, (t - 1) * kBatches / steps);
    ++batch_len[batch];
    if (at == v) {
      ++hits;
      ++batch_hits[batch];
      gap_sum += static_cast<double>(t - last_visit);
      last_visit = t;
      ++est.returns;
    }
  }
  est.frequency = static_cast<double>(hits) / static_cast<double>(steps);
  est.mean_return_time = est.returns > 0 ? gap_sum / static_cast<double>(est.returns)
                                         : std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  std::size_t used = 0;
  std::vector<double> freq;
  for (std::size_t b = 0; b < kBatches; ++b) {
    if (batch_len[b] == 0) continue;
    freq.push_back(static_cast<double>(batch_hits[b]) / static_cast<double>(batch_len[b]));
    mean += freq.back();
    ++used;
  }
  if (used > 1) {
    mean /= static_cast<double>(used);
    double var = 0.0;
    for (double f : freq) var += (f - mean) * (f - mean);
    var /= static_cast<double>(used - 1);
    est.standard_error = std::sqrt(var / static_cast<double>(used));
  }
  return est;
}

}  // namespace fraglink
