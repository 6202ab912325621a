#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fraglink/chain.hpp"
#include "fraglink/errors.hpp"
#include "fraglink/graph.hpp"
#include "fraglink/hardness.hpp"
#include "fraglink/lp.hpp"
#include "fraglink/oracle.hpp"
#include "fraglink/pri.hpp"
#include "fraglink/reduction.hpp"
#include "fraglink/ssp.hpp"

#ifndef FRAGLINK_VERSION
#define FRAGLINK_VERSION "0.0.0"
#endif

namespace fraglink::cli {

namespace {

using json = nlohmann::ordered_json;

struct Options {
  std::string graph;
  std::optional<std::size_t> node;
  std::optional<double> damping;
  std::string personalization = "uniform";
  std::string dangling = "error";
  bool distinct_fragile = false;
  std::string configuration;
  std::string trace;
  std::string constraints;
  std::size_t jobs = 1;
  std::size_t cap = 20;
  bool force_ssp = false;
  bool minimize = false;
  std::string table;
  std::string variant = "undamped";
  std::string formulation = "refined";
  std::string output;
  std::string emit_ssp;
  std::string method = "direct";
  std::size_t steps = 1'000'000;
  std::uint64_t seed = 1;
  std::string cnf;
  std::string emit_graph;
  std::string emit_constraints;
  bool verify = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

/// FNV-1a, 64 bit, over the concatenated inputs.
class Digest {
 public:
  void add(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::string hex() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json numbers(const std::vector<double>& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(number(x));
  return a;
}

json ids(const Configuration& cfg) {
  json a = json::array();
  for (FragileId f : cfg.active_ids()) a.push_back(f);
  return a;
}

class Session {
 public:
  Session(std::string command, const Options& o) : command_(std::move(command)), o_(o) {}

  const DiGraph& graph() {
    if (!graph_) {
      if (o_.graph.empty()) throw UsageError("--graph is required");
      const std::string text = read_file(o_.graph);
      digest_.add(text);
      graph_ = load_graph(text, o_.distinct_fragile ? ParallelFragile::KeepDistinct : ParallelFragile::Merge);
      params_["graph"] = o_.graph;
      params_["distinct_fragile"] = o_.distinct_fragile;
    }
    return *graph_;
  }

  NodeId node() {
    if (!o_.node) throw UsageError("--node is required");
    params_["node"] = *o_.node;
    if (*o_.node >= graph().node_count()) {
      throw RangeError("--node " + std::to_string(*o_.node) + " out of range [0, " +
                       std::to_string(graph().node_count()) + ")");
    }
    return *o_.node;
  }

  DanglingRule rule() {
    const DanglingRule r = parse_dangling_rule(o_.dangling);
    params_["dangling"] = std::string(to_string(r));
    return r;
  }

  /// Personalization when damping applies; `fallback` supplies c when the
  /// flag is absent (nullopt keeps the undamped path).
  std::optional<Personalization> personalization(std::optional<double> fallback) {
    const std::optional<double> c = o_.damping ? o_.damping : fallback;
    params_["damping"] = c ? json(*c) : json(nullptr);
    if (!c) return std::nullopt;
    params_["personalization"] = o_.personalization;
    const std::size_t n = graph().node_count();
    if (o_.personalization == "uniform") return Personalization::uniform(n, *c);
    const std::string text = read_file(o_.personalization);
    digest_.add(text);
    std::istringstream in(text);
    std::vector<double> values;
    for (double x; in >> x;) values.push_back(x);
    if (values.size() != n) {
      throw ValidationError("personalization file has " + std::to_string(values.size()) +
                            " entries, graph has " + std::to_string(n) + " nodes");
    }
    Vector z(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) z(static_cast<Eigen::Index>(i)) = values[i];
    if (!(z.array() > 0.0).all()) throw ValidationError("personalization must be strictly positive");
    z /= z.sum();
    return Personalization(z, *c);
  }

  Configuration configuration() {
    const std::size_t d = graph().fragile_count();
    if (o_.configuration.empty()) {
      params_["configuration"] = "all";
      return Configuration::full(d);
    }
    params_["configuration"] = o_.configuration;
    if (o_.configuration.size() != d ||
        o_.configuration.find_first_not_of("01") != std::string::npos) {
      throw ValidationError("--configuration needs " + std::to_string(d) + " characters of 0/1");
    }
    Configuration cfg(d);
    for (std::size_t f = 0; f < d; ++f) cfg.set(f, o_.configuration[f] == '1');
    return cfg;
  }

  json& params() { return params_; }
  Digest& digest() { return digest_; }

  json report(json result, double seconds) const {
    json r;
    r["command"] = command_;
    r["tool_version"] = FRAGLINK_VERSION;
    r["input_digest"] = digest_.hex();
    r["parameters"] = params_;
    r["result"] = std::move(result);
    r["timing"] = {{"wall_seconds", seconds}};
    return r;
  }

  class UsageError : public Error {
   public:
    explicit UsageError(const std::string& what) : Error(ErrorCategory::Usage, what) {}
  };

 private:
  std::string command_;
  const Options& o_;
  std::optional<DiGraph> graph_;
  json params_ = json::object();
  Digest digest_;
};

using UsageError = Session::UsageError;

json optimization_json(const OptimizationResult& r) {
  return {{"pagerank", number(r.pagerank)},
          {"return_time", number(r.return_time)},
          {"configuration", ids(r.configuration)},
          {"configuration_bits", r.configuration.bits()},
          {"iterations", r.iterations},
          {"method", r.method}};
}

void write_trace(const std::string& path, const PriTrace& trace) {
  std::ostringstream out;
  for (const PriStep& step : trace.steps) {
    json line = {{"iteration", step.iteration},
                 {"return_time", number(step.return_time)},
                 {"configuration", ids(step.configuration)},
                 {"hitting_times", numbers(step.hitting_times)}};
    out << line.dump() << '\n';
  }
  write_file(path, out.str());
}

json cmd_pagerank(Session& s, const Options& o) {
  const DiGraph& g = s.graph();
  const DanglingRule rule = s.rule();
  const Configuration cfg = s.configuration();
  const auto pers = s.personalization(std::nullopt);
  const DiGraph walk = handle_dangling(apply_configuration(handle_dangling(g, rule), cfg), rule);
  s.params()["method"] = o.method;
  json result;
  PageRankVector pi = [&] {
    if (!pers) {
      result["method"] = "stationary";
      return stationary_distribution(walk);
    }
    const StochasticMatrix p = transition_matrix(walk);
    if (o.method == "power") {
      PowerResult power = pagerank_power(google_matrix(p, *pers));
      result["method"] = "power";
      result["iterations"] = power.iterations;
      result["residual"] = power.residual;
      return power.pagerank;
    }
    if (o.method != "direct") throw UsageError("--method must be direct or power");
    result["method"] = "direct";
    return pagerank_direct(p, *pers);
  }();
  json vec = json::array();
  for (std::size_t i = 0; i < pi.size(); ++i) vec.push_back(pi[i]);
  result["pagerank"] = std::move(vec);
  if (o.node) result["node_pagerank"] = pi[s.node()];
  return result;
}

json cmd_optimize(Session& s, const Options& o, Objective objective) {
  const DiGraph& g = s.graph();
  const NodeId v = s.node();
  const DanglingRule rule = s.rule();
  const auto pers = s.personalization(std::nullopt);
  s.params()["force_ssp"] = o.force_ssp;
  OptimizationResult r;
  if (pers || o.force_ssp) {
    r = optimize_pagerank_ssp(g, v, rule, pers, objective);
  } else if (objective == Objective::Maximize) {
    r = pagerank_iteration(g, v, rule);
  } else {
    r = min_pagerank_iteration(g, v, rule);
  }
  if (!o.trace.empty()) write_trace(o.trace, r.trace);
  return optimization_json(r);
}

json cmd_brute_force(Session& s, const Options& o) {
  const DiGraph& g = s.graph();
  const NodeId v = s.node();
  const DanglingRule rule = s.rule();
  const auto pers = s.personalization(std::nullopt);
  BruteForceOptions bf;
  bf.cap = o.cap;
  bf.jobs = o.jobs;
  bf.objective = o.minimize ? Objective::Minimize : Objective::Maximize;
  bf.keep_table = !o.table.empty();
  s.params()["objective"] = o.minimize ? "minimize" : "maximize";
  s.params()["cap"] = o.cap;
  BruteForceResult r;
  if (!o.constraints.empty()) {
    const std::string text = read_file(o.constraints);
    s.digest().add(text);
    s.params()["constraints"] = o.constraints;
    r = brute_force_constrained(g, v, load_constraints(text, g.fragile_count()), pers, rule, bf);
  } else {
    r = brute_force(g, v, pers, rule, bf);
  }
  if (!o.table.empty()) write_file(o.table, table_to_csv(r));
  return {{"pagerank", number(r.best_pagerank)},
          {"return_time", number(r.best_pagerank > 0.0 ? 1.0 / r.best_pagerank : INFINITY)},
          {"configuration", ids(r.best)},
          {"configuration_bits", r.best.bits()},
          {"reachable", r.reachable},
          {"evaluated", r.evaluated},
          {"skipped", r.skipped}};
}

json cmd_reduce(Session& s, const Options& o) {
  const DiGraph& g = s.graph();
  const NodeId v = s.node();
  const DanglingRule rule = s.rule();
  const auto pers = s.personalization(std::nullopt);
  const ReducedSsp red = reduce_max_pagerank(g, v, pers, rule);
  if (!o.emit_ssp.empty()) write_file(o.emit_ssp, ssp_to_json(red.model) + "\n");
  const DiGraph handled = handle_dangling(g, rule);
  const Policy start = red.restrict_policy(
      policy_for_configuration(red.original, handled, initial_configuration(handled, v, rule)));
  const SolveResult solved = policy_iteration(red.model, start);
  const double rt = red.return_time(solved.values);
  const Configuration cfg =
      configuration_for_policy(red.original, handled, red.lift_policy(solved.policy));
  return {{"states_original", red.original.state_count()},
          {"states_reduced", red.model.state_count()},
          {"eliminated", red.eliminated.size()},
          {"pagerank", number(1.0 / rt)},
          {"return_time", number(rt)},
          {"configuration", ids(cfg)},
          {"configuration_bits", cfg.bits()},
          {"iterations", solved.iterations}};
}

json cmd_emit_lp(Session& s, const Options& o) {
  const DiGraph& g = s.graph();
  const NodeId v = s.node();
  const DanglingRule rule = s.rule();
  s.params()["variant"] = o.variant;
  std::optional<Personalization> pers;
  LpModel lp;
  std::optional<SspModel> model;
  if (o.variant == "undamped") {
    lp = build_max_pagerank_lp(g, v, rule);
    model = build_refined_ssp(g, v, rule);
  } else if (o.variant == "damped") {
    pers = s.personalization(kDefaultDamping);
    lp = build_damped_lp(g, v, *pers, rule);
    model = build_refined_ssp(g, v, rule, pers);
  } else if (o.variant == "generic") {
    pers = s.personalization(std::nullopt);
    model = build_refined_ssp(g, v, rule, pers);
    lp = build_generic_ssp_lp(*model);
  } else {
    throw UsageError("--variant must be generic, undamped or damped");
  }
  const std::string text = emit_lp(lp);
  json result = {{"variables", lp.variables().size()}, {"constraints", lp.constraints().size()}};
  if (o.output.empty()) {
    result["lp"] = text;
  } else {
    write_file(o.output, text);
    result["output"] = o.output;
  }
  if (o.verify) {
    const OptimizationResult best = optimize_pagerank_ssp(g, v, rule, pers, Objective::Maximize);
    const DiGraph handled = handle_dangling(g, rule);
    const ValueFunction j =
        evaluate_policy(*model, policy_for_configuration(*model, handled, best.configuration));
    const LpCheckReport check = check_point(lp, lp_point(lp, j));
    result["verify"] = {{"feasible", check.feasible},
                        {"tight_per_state", check.tight_per_state},
                        {"max_violation", check.max_violation},
                        {"objective", objective_value(lp, lp_point(lp, j))},
                        {"start_value", number(j[model->origin().start])}};
  }
  return result;
}

json cmd_emit_ssp(Session& s, const Options& o) {
  const DiGraph& g = s.graph();
  const NodeId v = s.node();
  const DanglingRule rule = s.rule();
  s.params()["formulation"] = o.formulation;
  std::optional<SspModel> m;
  if (o.formulation == "simple") {
    m = build_simple_ssp(g, v, rule);
  } else if (o.formulation == "refined") {
    m = build_refined_ssp(g, v, rule, s.personalization(std::nullopt));
  } else {
    throw UsageError("--formulation must be simple or refined");
  }
  json result = {{"states", m->state_count()}, {"max_actions", m->max_actions()}};
  const std::string text = ssp_to_json(*m);
  if (o.output.empty()) {
    result["ssp"] = json::parse(text);
  } else {
    write_file(o.output, text + "\n");
    result["output"] = o.output;
  }
  return result;
}

json cmd_simulate(Session& s, const Options& o) {
  const DiGraph& g = s.graph();
  const NodeId v = s.node();
  const DanglingRule rule = s.rule();
  const Configuration cfg = s.configuration();
  const auto pers = s.personalization(std::nullopt);
  s.params()["steps"] = o.steps;
  s.params()["seed"] = o.seed;
  s.params()["generator"] = std::string(kWalkGenerator);
  const DiGraph walk = apply_configuration(handle_dangling(g, rule), cfg);
  const WalkEstimate est = simulate_walk(walk, v, pers, o.steps, o.seed, rule);
  const double analytic = configuration_pagerank(g, v, cfg, pers, rule);
  return {{"frequency", est.frequency},
          {"standard_error", est.standard_error},
          {"returns", est.returns},
          {"mean_return_time", number(est.mean_return_time)},
          {"analytic_pagerank", number(analytic)},
          {"seed", est.seed},
          {"steps", est.steps}};
}

json cmd_gadget(Session& s, const Options& o) {
  if (o.cnf.empty()) throw UsageError("--cnf is required");
  const std::string text = read_file(o.cnf);
  s.digest().add(text);
  s.params()["cnf"] = o.cnf;
  s.params()["cap"] = o.cap;
  const Cnf3 f = parse_dimacs(text);
  const GadgetInstance inst = gadget_from_3sat(f);
  if (!o.emit_graph.empty()) write_file(o.emit_graph, emit_graph(inst.graph));
  if (!o.emit_constraints.empty()) write_file(o.emit_constraints, emit_constraints(inst.constraints));
  json result = {{"nodes", inst.graph.node_count()},
                 {"fragile_links", inst.graph.fragile_count()},
                 {"constraints", inst.constraints.size()},
                 {"target", inst.target},
                 {"damping", inst.personalization.damping()},
                 {"threshold", inst.threshold}};
  if (o.verify) {
    BruteForceOptions bf;
    bf.cap = o.cap;
    bf.jobs = o.jobs;
    const SeparationReport rep = verify_separation(inst, bf);
    result["verdict"] = std::string(to_string(rep.verdict));
    result["best_return_time"] = number(rep.best_return_time);
    result["best_pagerank"] = number(rep.best_pagerank);
    result["feasible_configurations"] = rep.feasible_configurations;
    result["witness"] = rep.satisfiable_witness ? ids(*rep.satisfiable_witness) : json(nullptr);
    if (f.variable_count <= 20) result["satisfiable"] = satisfying_assignment(f).has_value();
  }
  return result;
}

void add_graph_options(CLI::App* sub, Options& o) {
  sub->add_option("--graph", o.graph, "Edge-list file")->check(CLI::ExistingFile);
  sub->add_option("--dangling", o.dangling, "self-loop | uniform | error");
  sub->add_flag("--distinct-fragile", o.distinct_fragile, "Keep parallel fragile records apart");
}

void add_node_option(CLI::App* sub, Options& o) {
  sub->add_option("--node", o.node, "Node whose PageRank is computed or optimized");
}

void add_damping_options(CLI::App* sub, Options& o) {
  sub->add_option("--damping", o.damping, "Damping constant c in (0,1); absent means undamped");
  sub->add_option("--personalization", o.personalization, "'uniform' or a file of n weights");
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Usage: return 1;
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Numeric: return 3;
  }
  return 3;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Maximum and minimum PageRank over fragile-link configurations", "fraglink"};
  app.set_version_flag("--version", FRAGLINK_VERSION);
  app.require_subcommand(1, 1);

  auto* pagerank = app.add_subcommand("pagerank", "PageRank vector of one configuration");
  add_graph_options(pagerank, o);
  add_node_option(pagerank, o);
  add_damping_options(pagerank, o);
  pagerank->add_option("--configuration", o.configuration, "0/1 per fragile id (default: all on)");
  pagerank->add_option("--method", o.method, "direct | power (damped only)");

  auto* maximize = app.add_subcommand("maximize", "Maximum PageRank of --node");
  auto* minimize = app.add_subcommand("minimize", "Minimum PageRank of --node");
  for (auto* sub : {maximize, minimize}) {
    add_graph_options(sub, o);
    add_node_option(sub, o);
    add_damping_options(sub, o);
    sub->add_option("--trace", o.trace, "Write one JSON line per iteration");
    sub->add_flag("--force-ssp", o.force_ssp, "Use policy iteration on the refined SSP model");
  }

  auto* brute = app.add_subcommand("brute-force", "Exhaustive search over configurations");
  add_graph_options(brute, o);
  add_node_option(brute, o);
  add_damping_options(brute, o);
  brute->add_option("--constraints", o.constraints, "Pairs of fragile ids that exclude each other");
  brute->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  brute->add_option("--cap", o.cap, "Refuse more than 2^cap configurations");
  brute->add_option("--table", o.table, "Write config_bits,pagerank CSV");
  brute->add_flag("--minimize", o.minimize, "Search for the minimum instead");

  auto* reduce_cmd = app.add_subcommand("reduce", "Reduce the refined model and solve it");
  add_graph_options(reduce_cmd, o);
  add_node_option(reduce_cmd, o);
  add_damping_options(reduce_cmd, o);
  reduce_cmd->add_option("--emit-ssp", o.emit_ssp, "Write the reduced model as JSON");

  auto* lp_cmd = app.add_subcommand("emit-lp", "Write the LP whose optimum is the best return time");
  add_graph_options(lp_cmd, o);
  add_node_option(lp_cmd, o);
  add_damping_options(lp_cmd, o);
  lp_cmd->add_option("--variant", o.variant, "generic | undamped | damped");
  lp_cmd->add_option("--output", o.output, "LP file (default: embedded in the report)");
  lp_cmd->add_flag("--verify", o.verify, "Check the optimal values against the LP");

  auto* ssp_cmd = app.add_subcommand("emit-ssp", "Write the SSP model as JSON");
  add_graph_options(ssp_cmd, o);
  add_node_option(ssp_cmd, o);
  add_damping_options(ssp_cmd, o);
  ssp_cmd->add_option("--formulation", o.formulation, "simple | refined");
  ssp_cmd->add_option("--output", o.output, "JSON file (default: embedded in the report)");

  auto* sim = app.add_subcommand("simulate", "Seeded random-walk estimate of PageRank");
  add_graph_options(sim, o);
  add_node_option(sim, o);
  add_damping_options(sim, o);
  sim->add_option("--configuration", o.configuration, "0/1 per fragile id (default: all on)");
  sim->add_option("--steps", o.steps, "Walk length")->check(CLI::PositiveNumber);
  sim->add_option("--seed", o.seed, "mt19937_64 seed");

  auto* gadget = app.add_subcommand("gadget", "Build the 3SAT gadget and check its separation");
  gadget->add_option("--cnf", o.cnf, "DIMACS file with 3 literals per clause")->check(CLI::ExistingFile);
  gadget->add_option("--emit-graph", o.emit_graph, "Write the gadget graph");
  gadget->add_option("--emit-constraints", o.emit_constraints, "Write the exclusion pairs");
  gadget->add_flag("--verify", o.verify, "Search the feasible configurations");
  gadget->add_option("--cap", o.cap, "Refuse more than 2^cap configurations");
  gadget->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << FRAGLINK_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "fraglink: " << e.what() << '\n';
    return 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  Session session(command, o);
  const auto start = std::chrono::steady_clock::now();
  try {
    json result;
    if (command == "pagerank") {
      result = cmd_pagerank(session, o);
    } else if (command == "maximize") {
      result = cmd_optimize(session, o, Objective::Maximize);
    } else if (command == "minimize") {
      result = cmd_optimize(session, o, Objective::Minimize);
    } else if (command == "brute-force") {
      result = cmd_brute_force(session, o);
    } else if (command == "reduce") {
      result = cmd_reduce(session, o);
    } else if (command == "emit-lp") {
      result = cmd_emit_lp(session, o);
    } else if (command == "emit-ssp") {
      result = cmd_emit_ssp(session, o);
    } else if (command == "simulate") {
      result = cmd_simulate(session, o);
    } else {
      result = cmd_gadget(session, o);
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << session.report(std::move(result), seconds).dump(2) << '\n';
    return 0;
  } catch (const Error& e) {
    err << "fraglink " << command << ": " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    err << "fraglink " << command << ": " << e.what() << '\n';
    return 3;
  }
}

}  // namespace fraglink::cli
