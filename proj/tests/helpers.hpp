#pragma once

// Shared fixtures and small-instance brute-force oracles for the test suite.

#include <vector>

#include "treelearn/consistency.hpp"
#include "treelearn/dfta.hpp"
#include "treelearn/rng.hpp"
#include "treelearn/term.hpp"
#include "treelearn/trs.hpp"

namespace treelearn::test {

// Two-state boolean evaluator: q0 = false, q1 = true, accepting {q1}.
inline Dfta eval_dfta() {
  Signature sig({{"and", 2}, {"or", 2}, {"not", 1}, {"top", 0}, {"bot", 0}});
  std::vector<std::vector<State>> trans{
      {0, 0, 0, 1},  // and
      {0, 1, 1, 1},  // or
      {1, 0},        // not
      {1},           // top
      {0},           // bot
  };
  return Dfta(sig, 2, {false, true}, std::move(trans));
}

// q0 = even number of a leaves (accepting), q1 = odd.
inline Dfta even_a_dfta() {
  Signature sig({{"f", 2}, {"a", 0}, {"b", 0}});
  std::vector<std::vector<State>> trans{{0, 1, 1, 0}, {1}, {0}};
  return Dfta(sig, 2, {true, false}, std::move(trans));
}

// q0 = no a leaf, q1 = contains an a (accepting).
inline Dfta contains_a_dfta() {
  Signature sig({{"f", 2}, {"a", 0}, {"b", 0}});
  std::vector<std::vector<State>> trans{{0, 1, 1, 1}, {1}, {0}};
  return Dfta(sig, 2, {false, true}, std::move(trans));
}

// All ground trees of size at most max_size, grouped then flattened,
// deterministic order.
inline std::vector<Term> enumerate_trees(const Signature& sig, std::size_t max_size) {
  std::vector<std::vector<Term>> by_size(max_size + 1);
  if (max_size == 0) return {};
  for (const auto& s : sig.symbols())
    if (s.arity == 0) by_size[1].push_back(Term::node(s.name));
  for (std::size_t size = 2; size <= max_size; ++size) {
    for (const auto& s : sig.symbols()) {
      std::size_t k = s.arity;
      if (k == 0 || size < k + 1) continue;
      // Distribute size-1 among k children, each >= 1.
      std::vector<std::size_t> parts(k, 1);
      std::vector<Term> kids(k);
      std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i,
                                                              std::size_t remaining) {
        if (i + 1 == k) {
          parts[i] = remaining;
          std::function<void(std::size_t)> fill = [&](std::size_t j) {
            if (j == k) {
              by_size[size].push_back(Term::node(s.name, kids));
              return;
            }
            for (const auto& t : by_size[parts[j]]) {
              kids[j] = t;
              fill(j + 1);
            }
          };
          fill(0);
          return;
        }
        for (std::size_t take = 1; take + (k - i - 1) <= remaining; ++take) {
          parts[i] = take;
          rec(i + 1, remaining - take);
        }
      };
      rec(0, size - 1);
    }
  }
  std::vector<Term> out;
  for (auto& group : by_size)
    for (auto& t : group) out.push_back(std::move(t));
  return out;
}

// Brute-force full-consistency oracle: true iff some tree up to max_size
// has a single-step successor with differing membership.
inline bool brute_force_inconsistent(const Dfta& a, const Trs& trs, std::size_t max_size) {
  for (const auto& t : enumerate_trees(a.signature(), max_size))
    for (const auto& u : rewrite_once(trs, t))
      if (accepts(a, t) != accepts(a, u)) return true;
  return false;
}

inline bool brute_force_languages_equal(const Dfta& a, const Dfta& b, std::size_t max_size) {
  for (const auto& t : enumerate_trees(a.signature(), max_size))
    if (accepts(a, t) != accepts(b, t)) return false;
  return true;
}

// Uniform random total DFTA over sig with exactly n states.
inline Dfta random_test_dfta(const Signature& sig, std::size_t n, Rng& rng) {
  std::vector<std::vector<State>> trans(sig.symbols().size());
  for (std::size_t s = 0; s < sig.symbols().size(); ++s) {
    trans[s].resize(Dfta::table_size(n, sig.symbols()[s].arity));
    for (auto& q : trans[s]) q = static_cast<State>(uniform_below(rng, n));
  }
  std::vector<bool> acc(n);
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    acc[q] = uniform_below(rng, 2) == 1;
    any = any || acc[q];
  }
  if (!any) acc[uniform_below(rng, n)] = true;
  return Dfta(sig, n, std::move(acc), std::move(trans));
}

// Random term over sig with variables drawn from `vars`, at most max_size
// nodes. Used to build random rewrite rules.
inline Term random_term(const Signature& sig, const std::vector<std::string>& vars,
                        std::size_t max_size, Rng& rng) {
  if (max_size <= 1) {
    if (!vars.empty() && uniform_below(rng, 2) == 0)
      return Term::variable(vars[uniform_below(rng, vars.size())]);
    auto consts = sig.constants();
    return Term::node(consts[uniform_below(rng, consts.size())]);
  }
  std::size_t pick = uniform_below(rng, sig.symbols().size() + (vars.empty() ? 0 : 1));
  if (pick == sig.symbols().size()) return Term::variable(vars[uniform_below(rng, vars.size())]);
  const auto& sym = sig.symbols()[pick];
  if (sym.arity == 0) return Term::node(sym.name);
  std::size_t budget = (max_size - 1) / sym.arity;
  std::vector<Term> kids(sym.arity);
  for (auto& k : kids) k = random_term(sig, vars, budget < 1 ? 1 : budget, rng);
  return Term::node(sym.name, std::move(kids));
}

}  // namespace treelearn::test
