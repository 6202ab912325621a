#include "fraglink/hardness.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "fraglink/errors.hpp"

namespace fraglink {

void validate(const Cnf3& f) {
  for (std::size_t j = 0; j < f.clauses.size(); ++j) {
    for (const Literal& lit : f.clauses[j]) {
      if (lit.variable >= f.variable_count) {
        throw ValidationError("clause " + std::to_string(j + 1) + " uses variable " +
                              std::to_string(lit.variable + 1) + " but only " +
                              std::to_string(f.variable_count) + " are declared");
      }
    }
  }
}

Cnf3 parse_dimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t declared_clauses = 0;
  Cnf3 f;
  std::vector<Literal> pending;
  std::size_t pending_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream words(line);
    std::string first;
    if (!(words >> first)) continue;
    if (first == "c") continue;
    if (first == "%") break;
    if (first == "p") {
      std::string format;
      long long vars = -1;
      long long clauses = -1;
      if (have_header || !(words >> format >> vars >> clauses) || format != "cnf" || vars < 0 ||
          clauses < 0) {
        throw ParseError(line_no, "malformed 'p cnf <vars> <clauses>' header");
      }
      have_header = true;
      f.variable_count = static_cast<std::size_t>(vars);
      declared_clauses = static_cast<std::size_t>(clauses);
      continue;
    }
    if (!have_header) throw ParseError(line_no, "clause before the 'p cnf' header");
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      long long lit = 0;
      std::size_t used = 0;
      try {
        lit = std::stoll(tok, &used);
      } catch (const std::logic_error&) {
        used = 0;
      }
      if (used != tok.size() || tok.empty()) throw ParseError(line_no, "expected an integer literal, got '" + tok + "'");
      if (pending.empty()) pending_line = line_no;
      if (lit == 0) {
        if (pending.size() != 3) {
          throw ValidationError("clause ending on line " + std::to_string(line_no) + " has " +
                                std::to_string(pending.size()) + " literals; exactly 3 required");
        }
        f.clauses.push_back({pending[0], pending[1], pending[2]});
        pending.clear();
        continue;
      }
      const auto var = static_cast<std::size_t>(std::llabs(lit));
      if (var > f.variable_count) {
        throw ParseError(line_no, "literal " + tok + " exceeds the declared variable count");
      }
      pending.push_back({var - 1, lit > 0});
    }
  }
  if (!have_header) throw ParseError(line_no, "missing 'p cnf' header");
  if (!pending.empty()) throw ParseError(pending_line, "clause is not terminated by 0");
  if (f.clauses.size() != declared_clauses) {
    throw ValidationError("header declares " + std::to_string(declared_clauses) + " clauses, found " +
                          std::to_string(f.clauses.size()));
  }
  validate(f);
  return f;
}

Cnf3 parse_dimacs_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open CNF file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dimacs(buf.str());
}

std::string emit_dimacs(const Cnf3& f) {
  std::ostringstream out;
  out << "p cnf " << f.variable_count << ' ' << f.clauses.size() << '\n';
  for (const Clause3& c : f.clauses) {
    for (const Literal& lit : c) {
      out << (lit.positive ? "" : "-") << lit.variable + 1 << ' ';
    }
    out << "0\n";
  }
  return out.str();
}

bool satisfies(const Cnf3& f, const std::vector<bool>& assignment) {
  if (assignment.size() != f.variable_count) throw DomainError("assignment size does not match the formula");
  for (const Clause3& c : f.clauses) {
    bool sat = false;
    for (const Literal& lit : c) sat = sat || assignment[lit.variable] == lit.positive;
    if (!sat) return false;
  }
  return true;
}

std::optional<std::vector<bool>> satisfying_assignment(const Cnf3& f) {
  validate(f);
  if (f.variable_count > 20) {
    throw CapExceededError("truth-table search is limited to 20 variables, formula has " +
                           std::to_string(f.variable_count));
  }
  std::vector<bool> a(f.variable_count);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << f.variable_count); ++mask) {
    for (std::size_t k = 0; k < f.variable_count; ++k) a[k] = ((mask >> k) & 1U) != 0;
    if (satisfies(f, a)) return a;
  }
  return std::nullopt;
}

GadgetInstance gadget_from_3sat(const Cnf3& f) {
  validate(f);
  const std::size_t m = f.clauses.size();
  if (m == 0) throw ValidationError("the gadget needs at least one clause");
  const NodeId s = 0;
  const NodeId t = m + 1;
  std::vector<Edge> edges;
  edges.push_back({t, s, 1, EdgeKind::Fixed});
  for (std::size_t j = 1; j <= m; ++j) {
    edges.push_back({s, j, 1, EdgeKind::Fixed});
    edges.push_back({j, j, 1, EdgeKind::Fixed});
  }
  std::vector<Literal> literal_of;
  for (std::size_t j = 0; j < m; ++j) {
    for (const Literal& lit : f.clauses[j]) {
      edges.push_back({j + 1, t, 1, EdgeKind::Fragile});
      literal_of.push_back(lit);
    }
  }
  DiGraph graph(m + 2, std::move(edges), ParallelFragile::KeepDistinct);

  std::vector<std::pair<FragileId, FragileId>> pairs;
  const std::size_t d = literal_of.size();
  for (FragileId a = 0; a < d; ++a) {
    for (FragileId b = a + 1; b < d; ++b) {
      const bool same_clause = a / 3 == b / 3;
      const bool complementary = literal_of[a].variable == literal_of[b].variable &&
                                 literal_of[a].positive != literal_of[b].positive;
      if (same_clause || complementary) pairs.emplace_back(a, b);
    }
  }
  const double c = 1.0 / (100.0 * static_cast<double>(m));
  return GadgetInstance{std::move(graph),
                        ConstraintSet(d, std::move(pairs)),
                        Personalization::uniform(m + 2, c),
                        s,
                        t,
                        1.0 / 77.0,
                        std::move(literal_of),
                        f.variable_count};
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::AtMost77: return "<=77";
    case Verdict::AtLeast99: return ">=99";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

SeparationReport verify_separation(const GadgetInstance& inst, const BruteForceOptions& options) {
  BruteForceOptions opts = options;
  opts.objective = Objective::Maximize;
  opts.keep_table = false;
  const BruteForceResult best = brute_force_constrained(inst.graph, inst.target, inst.constraints,
                                                        inst.personalization, DanglingRule::None, opts);
  SeparationReport report;
  report.feasible_configurations = best.evaluated;
  report.best_pagerank = best.best_pagerank;
  report.best_return_time = 1.0 / best.best_pagerank;
  if (report.best_return_time <= 77.0) {
    report.verdict = Verdict::AtMost77;
    report.satisfiable_witness = best.best;
    // Clause j is covered when one of its three links is active.
    std::size_t variables = inst.variable_count;
    for (const Literal& lit : inst.literal_of) variables = std::max(variables, lit.variable + 1);
    std::vector<bool> a(variables, false);
    bool covers_all = true;
    for (std::size_t j = 0; 3 * j < inst.literal_of.size(); ++j) {
      bool covered = false;
      for (std::size_t l = 0; l < 3; ++l) {
        if (best.best.active(3 * j + l)) {
          covered = true;
          a[inst.literal_of[3 * j + l].variable] = inst.literal_of[3 * j + l].positive;
        }
      }
      covers_all = covers_all && covered;
    }
    if (covers_all) report.assignment = std::move(a);
  } else if (report.best_return_time >= 99.0) {
    report.verdict = Verdict::AtLeast99;
  }
  return report;
}

}  // namespace fraglink
