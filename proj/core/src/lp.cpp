#include "fraglink/lp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "fraglink/errors.hpp"

namespace fraglink {

namespace {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

LpTerms normalize(LpTerms terms) {
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  LpTerms merged;
  for (const auto& [var, coef] : terms) {
    if (!merged.empty() && merged.back().first == var) {
      merged.back().second += coef;
    } else {
      merged.emplace_back(var, coef);
    }
  }
  std::erase_if(merged, [](const auto& t) { return t.second == 0.0; });
  return merged;
}

std::string variable_name(const SspModel& m, StateId s) {
  const StateLabel& l = m.label(s);
  const std::string name = l.name.empty() ? std::to_string(s) : l.name;
  if (l.kind == StateKind::FragileLink || l.kind == StateKind::Damping) return "x" + name;
  return "x_" + name;
}

/// Constraints of every non-pinned, non-target state; the target is
/// substituted by zero.
LpModel ssp_lp(const SspModel& m, const std::vector<bool>& pinned, std::string title) {
  LpModel lp;
  lp.set_title(std::move(title));
  const StateId target = m.target();
  std::vector<std::size_t> var(m.state_count(), npos);
  for (StateId s = 0; s < target; ++s) {
    var[s] = lp.add_variable(variable_name(m, s),
                             pinned[s] ? std::optional<double>(0.0) : std::nullopt, s);
  }
  LpTerms objective;
  for (StateId s = 0; s < target; ++s) {
    if (pinned[s]) continue;
    objective.emplace_back(var[s], 1.0);
    for (std::size_t u = 0; u < m.actions(s).size(); ++u) {
      LpTerms terms{{var[s], 1.0}};
      double rhs = 0.0;
      for (const Transition& t : m.action(s, u).transitions) {
        rhs += t.probability * t.cost;
        if (t.to != target) terms.emplace_back(var[t.to], -t.probability);
      }
      lp.add_constraint("c_" + lp.variables()[var[s]].name + "_" + std::to_string(u), var[s],
                        std::move(terms), rhs);
    }
  }
  lp.set_objective(std::move(objective));
  return lp;
}

void append_terms(std::ostringstream& out, const LpModel& lp, const LpTerms& terms) {
  if (terms.empty()) {
    out << " 0";
    return;
  }
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto& [var, coef] = terms[k];
    if (k > 0 && k % 6 == 0) out << "\n  ";
    if (k == 0) {
      out << (coef < 0.0 ? " - " : " ");
    } else {
      out << (coef < 0.0 ? " - " : " + ");
    }
    const double mag = std::abs(coef);
    if (mag != 1.0) out << format_number(mag) << ' ';
    out << lp.variables()[var].name;
  }
}

struct Token {
  std::string text;
  std::size_t line;
};

double parse_number(const Token& t) {
  double x = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (t.text == "inf" || t.text == "+inf" || t.text == "infinity") return HUGE_VAL;
  if (t.text == "-inf" || t.text == "-infinity") return -HUGE_VAL;
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last) throw ParseError(t.line, "expected a number, got '" + t.text + "'");
  return x;
}

bool looks_numeric(const std::string& s) {
  return !s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.');
}

using NamedTerms = std::vector<std::pair<Token, double>>;

/// Parses tokens [begin, end) as a linear expression.
NamedTerms parse_expression(const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
  NamedTerms terms;
  double sign = 1.0;
  double coef = 1.0;
  bool has_coef = false;
  for (std::size_t k = begin; k < end; ++k) {
    const Token& t = tokens[k];
    if (t.text == "+") {
      sign = 1.0;
    } else if (t.text == "-") {
      sign = -1.0;
    } else if (looks_numeric(t.text)) {
      if (has_coef) throw ParseError(t.line, "two numbers in a row");
      coef = parse_number(t);
      has_coef = true;
    } else {
      terms.emplace_back(t, sign * coef);
      sign = 1.0;
      coef = 1.0;
      has_coef = false;
    }
  }
  if (has_coef && coef != 0.0) {
    throw ParseError(end > begin ? tokens[end - 1].line : 0, "constant term in expression");
  }
  return terms;
}

}  // namespace

std::size_t LpModel::add_variable(std::string name, std::optional<double> fixed, StateId state) {
  if (name.empty()) throw ValidationError("LP variable needs a name");
  if (by_name_.contains(name)) throw ValidationError("duplicate LP variable '" + name + "'");
  const std::size_t index = variables_.size();
  by_name_.emplace(name, index);
  variables_.push_back({std::move(name), fixed, state});
  return index;
}

void LpModel::add_constraint(std::string name, std::size_t owner, LpTerms terms, double rhs) {
  for (const auto& [var, coef] : terms) {
    if (var >= variables_.size()) throw ValidationError("constraint references an undeclared variable");
    if (!std::isfinite(coef)) throw ValidationError("non-finite constraint coefficient");
  }
  if (owner != npos && owner >= variables_.size()) throw ValidationError("unknown constraint owner");
  constraints_.push_back({std::move(name), owner, normalize(std::move(terms)), rhs});
}

void LpModel::set_objective(LpTerms terms) {
  for (const auto& [var, coef] : terms) {
    if (var >= variables_.size()) throw ValidationError("objective references an undeclared variable");
  }
  objective_ = normalize(std::move(terms));
}

std::optional<std::size_t> LpModel::index_of(std::string_view name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

bool operator==(const LpModel& a, const LpModel& b) {
  if (a.variables_.size() != b.variables_.size()) return false;
  for (std::size_t k = 0; k < a.variables_.size(); ++k) {
    if (a.variables_[k].name != b.variables_[k].name ||
        a.variables_[k].fixed != b.variables_[k].fixed) {
      return false;
    }
  }
  return a.constraints_ == b.constraints_ && a.objective_ == b.objective_;
}

LpModel build_generic_ssp_lp(const SspModel& m) {
  return ssp_lp(m, std::vector<bool>(m.state_count(), false), "generic SSP LP");
}

LpModel build_max_pagerank_lp(const DiGraph& g, NodeId v, DanglingRule rule) {
  const SspModel m = build_refined_ssp(g, v, rule);
  return ssp_lp(m, std::vector<bool>(m.state_count(), false),
                "max PageRank LP, undamped, node " + std::to_string(v));
}

LpModel build_damped_lp(const DiGraph& g, NodeId v, const Personalization& pers, DanglingRule rule) {
  const SspModel m = build_refined_ssp(g, v, rule, pers);
  std::vector<bool> pinned(m.state_count(), false);
  for (StateId s = 0; s < m.state_count(); ++s) {
    const StateLabel& l = m.label(s);
    // The damping state of the split-off target copy of v.
    if (l.kind == StateKind::Damping && l.node == v) pinned[s] = true;
  }
  char damping[32];
  std::snprintf(damping, sizeof damping, "%g", pers.damping());
  return ssp_lp(m, pinned,
                std::string("max PageRank LP, damping ") + damping + ", node " + std::to_string(v));
}

std::string emit_lp(const LpModel& lp) {
  std::ostringstream out;
  if (!lp.title().empty()) out << "\\ " << lp.title() << '\n';
  out << "Maximize\n obj:";
  append_terms(out, lp, lp.objective());
  out << "\nSubject To\n";
  for (const LpConstraint& c : lp.constraints()) {
    out << ' ' << c.name << ':';
    append_terms(out, lp, c.terms);
    out << " <= " << format_number(c.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const LpVariable& var : lp.variables()) {
    if (var.fixed) {
      out << ' ' << var.name << " = " << format_number(*var.fixed) << '\n';
    } else {
      out << ' ' << var.name << " free\n";
    }
  }
  out << "End\n";
  return out.str();
}

LpModel parse_lp(std::string_view text) {
  enum class Section { None, Objective, Constraints, Bounds, Done };
  Section section = Section::None;
  std::vector<Token> objective_tokens;
  std::vector<Token> constraint_tokens;
  std::vector<Token> bound_tokens;
  std::string title;

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto slash = line.find('\\'); slash != std::string::npos) {
      if (line_no == 1 && slash == 0) title = line.size() > 2 ? line.substr(2) : "";
      line.erase(slash);
    }
    std::istringstream words(line);
    std::string first;
    if (!(words >> first)) continue;
    std::string rest;
    std::getline(words, rest);
    const std::string head = rest.find_first_not_of(' ') == std::string::npos
                                 ? first
                                 : first + " " + rest.substr(rest.find_first_not_of(' '));
    if (first == "Maximize" || first == "maximize") {
      section = Section::Objective;
      continue;
    }
    if (head == "Subject To" || head == "subject to") {
      section = Section::Constraints;
      continue;
    }
    if (first == "Bounds" || first == "bounds") {
      section = Section::Bounds;
      continue;
    }
    if (first == "End" || first == "end") {
      section = Section::Done;
      continue;
    }
    std::istringstream tokens(line);
    std::string word;
    std::vector<Token>* sink = nullptr;
    switch (section) {
      case Section::Objective: sink = &objective_tokens; break;
      case Section::Constraints: sink = &constraint_tokens; break;
      case Section::Bounds: sink = &bound_tokens; break;
      default: throw ParseError(line_no, "content outside of a section");
    }
    while (tokens >> word) sink->push_back({word, line_no});
  }
  if (section != Section::Done) throw ParseError(line_no, "missing End");

  LpModel lp;
  lp.set_title(title);
  for (std::size_t k = 0; k < bound_tokens.size();) {
    const Token& name = bound_tokens[k];
    if (k + 1 >= bound_tokens.size()) throw ParseError(name.line, "incomplete bound");
    if (bound_tokens[k + 1].text == "free") {
      lp.add_variable(name.text);
      k += 2;
    } else if (bound_tokens[k + 1].text == "=" && k + 2 < bound_tokens.size()) {
      lp.add_variable(name.text, parse_number(bound_tokens[k + 2]));
      k += 3;
    } else {
      throw ParseError(name.line, "unsupported bound for '" + name.text + "'");
    }
  }

  auto resolve = [&](const NamedTerms& named) {
    LpTerms terms;
    for (const auto& [tok, coef] : named) {
      const auto index = lp.index_of(tok.text);
      if (!index) throw ParseError(tok.line, "undeclared variable '" + tok.text + "'");
      terms.emplace_back(*index, coef);
    }
    return terms;
  };

  if (objective_tokens.empty() || objective_tokens.front().text != "obj:") {
    throw ParseError(line_no, "objective must be labelled 'obj:'");
  }
  lp.set_objective(resolve(parse_expression(objective_tokens, 1, objective_tokens.size())));

  for (std::size_t k = 0; k < constraint_tokens.size();) {
    const Token& label = constraint_tokens[k];
    if (label.text.size() < 2 || label.text.back() != ':') {
      throw ParseError(label.line, "expected a constraint name, got '" + label.text + "'");
    }
    const std::string name = label.text.substr(0, label.text.size() - 1);
    std::size_t rel = k + 1;
    while (rel < constraint_tokens.size() && constraint_tokens[rel].text != "<=") ++rel;
    if (rel + 1 >= constraint_tokens.size()) throw ParseError(label.line, "constraint without '<= rhs'");
    const LpTerms terms = resolve(parse_expression(constraint_tokens, k + 1, rel));
    const double rhs = parse_number(constraint_tokens[rel + 1]);
    std::size_t owner = npos;
    if (name.starts_with("c_")) {
      const auto cut = name.rfind('_');
      if (cut > 2) owner = lp.index_of(name.substr(2, cut - 2)).value_or(npos);
    }
    lp.add_constraint(name, owner, terms, rhs);
    k = rel + 2;
  }
  return lp;
}

LpPoint lp_point(const LpModel& lp, const ValueFunction& j) {
  LpPoint point;
  for (const LpVariable& var : lp.variables()) {
    if (var.state == npos) continue;
    if (var.state >= j.size()) throw DomainError("value function too short for LP variables");
    point[var.name] = j[var.state];
  }
  return point;
}

namespace {

std::vector<double> values_for(const LpModel& lp, const LpPoint& point) {
  std::vector<double> x(lp.variables().size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const LpVariable& var = lp.variables()[k];
    const auto it = point.find(var.name);
    if (it != point.end()) {
      x[k] = it->second;
    } else if (var.fixed) {
      x[k] = *var.fixed;
    } else {
      throw DomainError("point has no value for LP variable '" + var.name + "'");
    }
  }
  return x;
}

double evaluate(const LpTerms& terms, const std::vector<double>& x) {
  double sum = 0.0;
  for (const auto& [var, coef] : terms) sum += coef * x[var];
  return sum;
}

}  // namespace

double objective_value(const LpModel& lp, const LpPoint& point) {
  return evaluate(lp.objective(), values_for(lp, point));
}

LpCheckReport check_point(const LpModel& lp, const LpPoint& point, double eps, double tight_eps) {
  const std::vector<double> x = values_for(lp, point);
  LpCheckReport report;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const LpVariable& var = lp.variables()[k];
    if (var.fixed && std::abs(x[k] - *var.fixed) > eps) {
      report.feasible = false;
      report.violated.push_back("bound:" + var.name);
      report.max_violation = std::max(report.max_violation, std::abs(x[k] - *var.fixed));
    }
  }
  std::vector<int> owned(x.size(), 0);
  std::vector<bool> tight(x.size(), false);
  for (const LpConstraint& c : lp.constraints()) {
    const double excess = evaluate(c.terms, x) - c.rhs;
    if (excess > eps) {
      report.feasible = false;
      report.violated.push_back(c.name);
    }
    report.max_violation = std::max(report.max_violation, excess);
    if (c.owner != npos) {
      ++owned[c.owner];
      if (std::abs(excess) <= tight_eps) tight[c.owner] = true;
    }
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (owned[k] > 0 && !tight[k]) {
      report.tight_per_state = false;
      report.slack_variables.push_back(lp.variables()[k].name);
    }
  }
  return report;
}

}  // namespace fraglink
