#pragma once

#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "treelearn/term.hpp"

namespace treelearn {

// Rewrite rule l -> r. Variables of r must occur in l and l may not be a
// bare variable, so rewriting ground terms yields ground terms.
struct Rule {
  Term lhs;
  Term rhs;

  Rule(Term l, Term r) : lhs(std::move(l)), rhs(std::move(r)) {
    if (lhs.is_variable()) throw std::invalid_argument("rule lhs is a bare variable");
    auto lv = lhs.variables();
    for (const auto& v : rhs.variables())
      if (std::find(lv.begin(), lv.end(), v) == lv.end())
        throw std::invalid_argument("rule rhs variable '" + v + "' not in lhs");
  }

  std::string str() const { return lhs.str() + " -> " + rhs.str(); }
  bool operator==(const Rule& o) const { return lhs == o.lhs && rhs == o.rhs; }
};

struct Trs {
  Signature signature;
  std::vector<Rule> rules;

  bool empty() const { return rules.empty(); }
};

namespace detail {

// Matches `pattern` against `t`, extending `sigma`. Non-linear patterns
// require consistent bindings.
inline bool match(const Term& pattern, const Term& t, Substitution& sigma) {
  if (pattern.is_variable()) {
    if (const Term* bound = sigma.find(pattern.label())) return *bound == t;
    sigma.bind(pattern.label(), t);
    return true;
  }
  if (t.is_variable() || pattern.label() != t.label()) return false;
  for (std::size_t i = 0; i < pattern.children().size(); ++i)
    if (!match(pattern.children()[i], t.children()[i], sigma)) return false;
  return true;
}

inline void rewrite_at_all_positions(const Trs& trs, const Term& t,
                                     const std::function<Term(const Term&)>& wrap,
                                     std::vector<Term>& out) {
  for (const auto& rule : trs.rules) {
    Substitution sigma;
    if (match(rule.lhs, t, sigma)) out.push_back(wrap(substitute(rule.rhs, sigma)));
  }
  for (std::size_t i = 0; i < t.children().size(); ++i) {
    auto wrap_child = [&, i](const Term& replaced) {
      std::vector<Term> kids = t.children();
      kids[i] = replaced;
      return wrap(Term::node(t.label(), std::move(kids)));
    };
    rewrite_at_all_positions(trs, t.children()[i], wrap_child, out);
  }
}

}  // namespace detail

// All single-step successors of a ground term, deduplicated.
inline std::vector<Term> rewrite_once(const Trs& trs, const Term& t) {
  std::vector<Term> raw;
  detail::rewrite_at_all_positions(trs, t, [](const Term& x) { return x; }, raw);
  std::vector<Term> out;
  std::unordered_set<Term, TermHash> seen;
  for (const auto& s : raw)
    if (seen.insert(s).second) out.push_back(s);
  return out;
}

struct StepBudgetExceeded : std::runtime_error {
  explicit StepBudgetExceeded(std::size_t budget)
      : std::runtime_error("rewrite step budget of " + std::to_string(budget) +
                           " exceeded; the TRS is likely non-terminating") {}
};

namespace detail {

// One leftmost-innermost step; nullopt if t is irreducible.
inline std::optional<Term> reduce_innermost(const Trs& trs, const Term& t) {
  for (std::size_t i = 0; i < t.children().size(); ++i) {
    if (auto reduced = reduce_innermost(trs, t.children()[i])) {
      std::vector<Term> kids = t.children();
      kids[i] = *reduced;
      return Term::node(t.label(), std::move(kids));
    }
  }
  for (const auto& rule : trs.rules) {
    Substitution sigma;
    if (match(rule.lhs, t, sigma)) return substitute(rule.rhs, sigma);
  }
  return std::nullopt;
}

}  // namespace detail

inline std::size_t default_step_budget(const Term& t) { return 10 * t.size() * t.size() + 100; }

// Normal form by leftmost-innermost reduction. The caller asserts the TRS is
// convergent; divergence surfaces as StepBudgetExceeded.
inline Term normal_form(const Trs& trs, const Term& t, std::size_t step_budget) {
  Term cur = t;
  for (std::size_t step = 0; step < step_budget; ++step) {
    auto next = detail::reduce_innermost(trs, cur);
    if (!next) return cur;
    cur = std::move(*next);
  }
  if (!detail::reduce_innermost(trs, cur)) return cur;
  throw StepBudgetExceeded(step_budget);
}

inline Term normal_form(const Trs& trs, const Term& t) {
  return normal_form(trs, t, default_step_budget(t));
}

enum class RuleFamily {
  Associativity,        // f(X,f(Y,Z)) -> f(f(X,Y),Z), f binary
  Commutativity,        // f(X,Y) -> f(Y,X), f binary
  DistributivityLeft,   // f(X,g(Y,Z)) -> g(f(X,Y),f(X,Z)), f,g binary
  DistributivityRight,  // f(g(X,Y),Z) -> g(f(X,Z),f(Y,Z)), f,g binary
  DistributivityUnary,  // g(f(X,Y)) -> f(g(X),g(Y)), g unary, f binary
  UnaryCommutation,     // g(f(X)) -> f(g(X)), f,g unary
  Idempotence,          // f(f(X)) -> f(X), f unary
};

inline Trs builtin_rules(RuleFamily family, const std::vector<std::string>& symbols,
                         const Signature& sig) {
  auto require = [&](std::size_t i, std::size_t arity) {
    if (i >= symbols.size())
      throw std::invalid_argument("rule family needs more symbols");
    if (sig.arity(symbols[i]) != arity)
      throw std::invalid_argument("symbol '" + symbols[i] + "' must have arity " +
                                  std::to_string(arity));
    return symbols[i];
  };
  Term X = Term::variable("X"), Y = Term::variable("Y"), Z = Term::variable("Z");
  auto n = [](const std::string& s, std::vector<Term> kids) {
    return Term::node(s, std::move(kids));
  };
  std::vector<Rule> rules;
  switch (family) {
    case RuleFamily::Associativity: {
      auto f = require(0, 2);
      rules.emplace_back(n(f, {X, n(f, {Y, Z})}), n(f, {n(f, {X, Y}), Z}));
      break;
    }
    case RuleFamily::Commutativity: {
      auto f = require(0, 2);
      rules.emplace_back(n(f, {X, Y}), n(f, {Y, X}));
      break;
    }
    case RuleFamily::DistributivityLeft: {
      auto f = require(0, 2);
      auto g = require(1, 2);
      rules.emplace_back(n(f, {X, n(g, {Y, Z})}), n(g, {n(f, {X, Y}), n(f, {X, Z})}));
      break;
    }
    case RuleFamily::DistributivityRight: {
      auto f = require(0, 2);
      auto g = require(1, 2);
      rules.emplace_back(n(f, {n(g, {X, Y}), Z}), n(g, {n(f, {X, Z}), n(f, {Y, Z})}));
      break;
    }
    case RuleFamily::DistributivityUnary: {
      auto g = require(0, 1);
      auto f = require(1, 2);
      rules.emplace_back(n(g, {n(f, {X, Y})}), n(f, {n(g, {X}), n(g, {Y})}));
      break;
    }
    case RuleFamily::UnaryCommutation: {
      auto g = require(0, 1);
      auto f = require(1, 1);
      rules.emplace_back(n(g, {n(f, {X})}), n(f, {n(g, {X})}));
      break;
    }
    case RuleFamily::Idempotence: {
      auto f = require(0, 1);
      rules.emplace_back(n(f, {n(f, {X})}), n(f, {X}));
      break;
    }
  }
  return Trs{sig, std::move(rules)};
}

// File format: `signature: f/2 a/0` header, then one `<term> -> <term>` per
// line; `#` starts a comment.
inline Trs parse_trs(std::istream& in) {
  std::string line;
  std::optional<Signature> sig;
  std::vector<Rule> rules;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    auto end = line.find_last_not_of(" \t\r");
    std::string body = line.substr(begin, end - begin + 1);
    if (body.rfind("signature:", 0) == 0) {
      sig = parse_signature(body.substr(10));
      continue;
    }
    if (!sig)
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": rule before signature header");
    auto arrow = body.find("->");
    if (arrow == std::string::npos)
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected '->'");
    Term lhs = parse_term(body.substr(0, arrow), *sig);
    Term rhs = parse_term(body.substr(arrow + 2), *sig);
    rules.emplace_back(std::move(lhs), std::move(rhs));
  }
  if (!sig) throw std::runtime_error("TRS file has no signature header");
  return Trs{*sig, std::move(rules)};
}

inline Trs load_trs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open TRS file: " + path);
  return parse_trs(in);
}

inline std::string trs_to_string(const Trs& trs) {
  std::ostringstream os;
  os << "signature: " << signature_to_string(trs.signature) << '\n';
  for (const auto& r : trs.rules) os << r.str() << '\n';
  return os.str();
}

}  // namespace treelearn
