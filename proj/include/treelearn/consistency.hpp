#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "treelearn/dfta.hpp"
#include "treelearn/trs.hpp"

namespace treelearn {

// Reflexive, transitive relation on states of a minimal DFTA: (p,q) present
// when every context accepting a p-tree also accepts the matching q-tree.
class AcceptanceOrder {
public:
  AcceptanceOrder(std::size_t n, std::vector<char> pairs)
      : n_(n), pairs_(std::move(pairs)) {}

  bool leq(State p, State q) const { return pairs_[static_cast<std::size_t>(p) * n_ + q] != 0; }
  std::size_t num_states() const { return n_; }

private:
  std::size_t n_;
  std::vector<char> pairs_;  // row-major over ordered pairs
};

// Greatest fixed point: start from Q x Q, delete (p,q) with p accepting and
// q not, then delete pairs some height-1 context maps outside the relation.
inline AcceptanceOrder acceptance_order(const Dfta& a) {
  std::size_t n = a.num_states();
  const auto& syms = a.signature().symbols();
  std::vector<char> rel(n * n, 1);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      if (a.accepting(static_cast<State>(p)) && !a.accepting(static_cast<State>(q)))
        rel[p * n + q] = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = 0; q < n; ++q) {
        if (!rel[p * n + q]) continue;
        bool drop = false;
        for (std::size_t s = 0; s < syms.size() && !drop; ++s) {
          std::size_t k = syms[s].arity;
          if (k == 0) continue;
          std::size_t sib_rows = Dfta::table_size(n, k - 1);
          std::vector<State> ap(k), aq(k);
          for (std::size_t pos = 0; pos < k && !drop; ++pos) {
            for (std::size_t sidx = 0; sidx < sib_rows; ++sidx) {
              std::size_t rest = sidx;
              for (std::size_t i = 0; i < k; ++i) {
                if (i == pos) {
                  ap[i] = static_cast<State>(p);
                  aq[i] = static_cast<State>(q);
                } else {
                  ap[i] = aq[i] = static_cast<State>(rest % n);
                  rest /= n;
                }
              }
              if (!rel[static_cast<std::size_t>(a.delta(s, ap)) * n + a.delta(s, aq)]) {
                drop = true;
                break;
              }
            }
          }
        }
        if (drop) {
          rel[p * n + q] = 0;
          changed = true;
        }
      }
    }
  }
  return AcceptanceOrder(n, std::move(rel));
}

struct Violation {
  Rule rule;
  std::vector<std::string> variable_order;  // sorted names of lhs variables
  std::vector<State> witness;               // assignment in variable_order
  State lhs_state;
  State rhs_state;
};

struct ConsistencyVerdict {
  std::optional<Violation> violation;  // nullopt = consistent
  bool consistent() const { return !violation.has_value(); }
};

namespace detail {

// Enumerates assignments lexicographically over Q^k and reports the first
// one where `bad(lhs_state, rhs_state)` holds.
template <typename BadPred>
std::optional<Violation> first_violation(const Dfta& a, const Rule& rule, BadPred bad,
                                         std::size_t max_entries) {
  std::vector<std::string> vars = rule.lhs.variables();
  std::sort(vars.begin(), vars.end());
  std::size_t n = a.num_states();
  std::size_t k = vars.size();
  std::size_t entries = Dfta::table_size(n, k);
  if (entries > max_entries)
    throw BudgetExceeded("rule '" + rule.str() + "' needs " + std::to_string(entries) +
                         " assignments, over the enumeration budget");
  std::unordered_map<std::string, State> asg;
  std::vector<State> vec(k);
  for (std::size_t idx = 0; idx < entries; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = k; i-- > 0;) {
      vec[i] = static_cast<State>(rest % n);
      rest /= n;
    }
    for (std::size_t i = 0; i < k; ++i) asg[vars[i]] = vec[i];
    State ql = evaluate_term(a, rule.lhs, asg);
    State qr = evaluate_term(a, rule.rhs, asg);
    if (bad(ql, qr)) return Violation{rule, vars, vec, ql, qr};
  }
  return std::nullopt;
}

}  // namespace detail

constexpr std::size_t kDefaultEnumerationBudget = 100000000;

// Full consistency: the transformations of lhs and rhs coincide for every
// rule. Witness order is deterministic: first rule in TRS order, then
// lexicographically smallest assignment.
inline ConsistencyVerdict check_full(const Dfta& a, const Trs& trs,
                                     std::size_t max_entries = kDefaultEnumerationBudget) {
  for (const auto& rule : trs.rules) {
    auto v = detail::first_violation(
        a, rule, [](State l, State r) { return l != r; }, max_entries);
    if (v) return {std::move(v)};
  }
  return {};
}

// Positive consistency: lhs state must be below rhs state in the order.
inline ConsistencyVerdict check_positive(const Dfta& a, const Trs& trs,
                                         const AcceptanceOrder& ord,
                                         std::size_t max_entries = kDefaultEnumerationBudget) {
  for (const auto& rule : trs.rules) {
    auto v = detail::first_violation(
        a, rule, [&](State l, State r) { return !ord.leq(l, r); }, max_entries);
    if (v) return {std::move(v)};
  }
  return {};
}

// Negative consistency via duality: positive consistency on the complement
// (re-minimized, since the order is defined on minimal automata).
inline ConsistencyVerdict check_negative(const Dfta& a, const Trs& trs,
                                         std::size_t max_entries = kDefaultEnumerationBudget) {
  Dfta comp = minimize(complement(a));
  return check_positive(comp, trs, acceptance_order(comp), max_entries);
}

// Builds the violating tree pair (s, t) with s ->_R t in one step and
// exactly one of them in L(a). For violations of the order (positive
// variant), s is accepted and t rejected.
inline std::pair<Term, Term> violation_to_tree_pair(const Dfta& a, const Violation& v,
                                                    bool order_violation = false) {
  auto reps = state_representatives(a);
  Substitution sigma;
  for (std::size_t i = 0; i < v.variable_order.size(); ++i)
    sigma.bind(v.variable_order[i], reps[v.witness[i]]);
  Term lhat = substitute(v.rule.lhs, sigma);
  Term rhat = substitute(v.rule.rhs, sigma);
  Context c = Context::hole();
  if (order_violation) {
    auto sep = separating_context(a, v.lhs_state, v.rhs_state, reps);
    if (!sep) throw std::logic_error("no separating context for order violation");
    c = *sep;
  } else {
    c = distinguishing_context(a, v.lhs_state, v.rhs_state, &reps);
  }
  return {plug(c, lhat), plug(c, rhat)};
}

// Preimage cardinalities of the transformation of a linear term.
struct StateCount {
  std::size_t arity = 0;                // number of variables of the term
  std::vector<std::uint64_t> counts;    // per state
};

inline StateCount state_count(const Dfta& a, const Term& t) {
  if (!t.linear()) throw std::invalid_argument("state_count requires a linear term");
  std::size_t n = a.num_states();
  const auto& syms = a.signature().symbols();
  // Bottom-up: variable -> all-ones; node -> convolution through delta.
  std::function<std::vector<std::uint64_t>(const Term&)> go =
      [&](const Term& u) -> std::vector<std::uint64_t> {
    if (u.is_variable()) return std::vector<std::uint64_t>(n, 1);
    std::vector<std::vector<std::uint64_t>> kid_counts;
    kid_counts.reserve(u.children().size());
    for (const auto& c : u.children()) kid_counts.push_back(go(c));
    std::size_t s = a.signature().index_of(u.label());
    std::size_t k = syms[s].arity;
    std::vector<std::uint64_t> out(n, 0);
    std::size_t rows = Dfta::table_size(n, k);
    for (std::size_t idx = 0; idx < rows; ++idx) {
      std::size_t rest = idx;
      std::uint64_t prod = 1;
      for (std::size_t i = k; i-- > 0;) {
        prod *= kid_counts[i][rest % n];
        rest /= n;
        if (prod == 0) break;
      }
      if (prod) out[a.transitions()[s][idx]] += prod;
    }
    return out;
  };
  StateCount sc;
  sc.arity = t.variables().size();
  sc.counts = go(t);
  return sc;
}

// result(q) = sum of sc over states q' with q <= q' in the order.
inline StateCount cumulative_count(const StateCount& sc, const AcceptanceOrder& ord) {
  std::size_t n = sc.counts.size();
  StateCount out;
  out.arity = sc.arity;
  out.counts.assign(n, 0);
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t qp = 0; qp < n; ++qp)
      if (ord.leq(static_cast<State>(q), static_cast<State>(qp)))
        out.counts[q] += sc.counts[qp];
  return out;
}

enum class HeuristicVerdict {
  MaybeConsistent,
  DefinitelyInconsistent,
  Consistent,  // only from the exact fast path (linear lhs, ground rhs)
};

enum class ConsistencyMode { Full, Positive };

// Counting heuristic: a cheap necessary condition. Never flags a rule the
// exact check deems consistent. With a ground rhs and linear lhs the check
// is exact.
inline HeuristicVerdict heuristic_filter(const Dfta& a, const Rule& rule, ConsistencyMode mode,
                                         const AcceptanceOrder* ord = nullptr) {
  if (!rule.lhs.linear() || !rule.rhs.linear())
    throw std::invalid_argument("heuristic_filter requires linear rule sides");
  StateCount cl = state_count(a, rule.lhs);
  if (mode == ConsistencyMode::Full && rule.rhs.ground()) {
    // Exact: lhs transformation is constant iff its count mass sits entirely
    // on the rhs state.
    State qr = evaluate(a, rule.rhs);
    for (std::size_t q = 0; q < cl.counts.size(); ++q)
      if (q != qr && cl.counts[q] != 0) return HeuristicVerdict::DefinitelyInconsistent;
    return HeuristicVerdict::Consistent;
  }
  StateCount cr = state_count(a, rule.rhs);
  // rhs may use fewer variables; scale its mass so both sides count Q^k
  // assignments of the lhs variables.
  std::size_t n = a.num_states();
  std::uint64_t scale = 1;
  for (std::size_t i = cr.arity; i < cl.arity; ++i) scale *= n;
  if (mode == ConsistencyMode::Full) {
    for (std::size_t q = 0; q < n; ++q)
      if (cl.counts[q] != cr.counts[q] * scale) return HeuristicVerdict::DefinitelyInconsistent;
    return HeuristicVerdict::MaybeConsistent;
  }
  if (!ord) throw std::invalid_argument("positive mode requires the acceptance order");
  StateCount cum = cumulative_count(cr, *ord);
  for (std::size_t q = 0; q < n; ++q)
    if (cl.counts[q] > cum.counts[q] * scale) return HeuristicVerdict::DefinitelyInconsistent;
  return HeuristicVerdict::MaybeConsistent;
}

}  // namespace treelearn
