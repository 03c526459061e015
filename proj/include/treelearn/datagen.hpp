#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "treelearn/consistency.hpp"
#include "treelearn/dfta.hpp"
#include "treelearn/rng.hpp"
#include "treelearn/trs.hpp"

namespace treelearn {

// Classical word DFA, total.
struct Dfa {
  std::size_t num_states = 0;
  std::size_t alphabet_size = 0;
  std::size_t initial = 0;
  std::vector<bool> accepting;
  std::vector<std::size_t> transitions;  // [state * alphabet_size + letter]

  std::size_t next(std::size_t state, std::size_t letter) const {
    return transitions[state * alphabet_size + letter];
  }
};

inline Dfa minimize_dfa(const Dfa& d) {
  // Forward reachability from the initial state.
  std::vector<bool> reach(d.num_states, false);
  std::vector<std::size_t> stack{d.initial};
  reach[d.initial] = true;
  while (!stack.empty()) {
    std::size_t q = stack.back();
    stack.pop_back();
    for (std::size_t a = 0; a < d.alphabet_size; ++a) {
      std::size_t t = d.next(q, a);
      if (!reach[t]) {
        reach[t] = true;
        stack.push_back(t);
      }
    }
  }
  std::vector<std::size_t> dense(d.num_states), old_of;
  for (std::size_t q = 0; q < d.num_states; ++q)
    if (reach[q]) {
      dense[q] = old_of.size();
      old_of.push_back(q);
    }
  std::size_t m = old_of.size();

  // Moore refinement.
  std::vector<std::size_t> block(m);
  for (std::size_t q = 0; q < m; ++q) block[q] = d.accepting[old_of[q]] ? 1 : 0;
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::vector<std::size_t>, std::size_t> sig_to_block;
    std::vector<std::size_t> next(m);
    for (std::size_t q = 0; q < m; ++q) {
      std::vector<std::size_t> signature{block[q]};
      for (std::size_t a = 0; a < d.alphabet_size; ++a)
        signature.push_back(block[dense[d.next(old_of[q], a)]]);
      auto [it, ins] = sig_to_block.emplace(std::move(signature), sig_to_block.size());
      next[q] = it->second;
    }
    if (next != block) {
      block = next;
      changed = true;
    }
  }
  std::size_t blocks = *std::max_element(block.begin(), block.end()) + 1;
  Dfa out;
  out.num_states = blocks;
  out.alphabet_size = d.alphabet_size;
  out.initial = block[dense[d.initial]];
  out.accepting.assign(blocks, false);
  out.transitions.assign(blocks * d.alphabet_size, 0);
  for (std::size_t q = 0; q < m; ++q) {
    out.accepting[block[q]] = d.accepting[old_of[q]];
    for (std::size_t a = 0; a < d.alphabet_size; ++a)
      out.transitions[block[q] * d.alphabet_size + a] = block[dense[d.next(old_of[q], a)]];
  }
  return out;
}

inline bool dfa_accepts(const Dfa& d, const std::vector<std::size_t>& word) {
  std::size_t q = d.initial;
  for (std::size_t a : word) q = d.next(q, a);
  return d.accepting[q];
}

struct GenSpec {
  std::size_t alphabet_min = 2, alphabet_max = 4;
  std::size_t states_min = 2, states_max = 6;
  double acceptance_density = 0.5;
  std::uint64_t seed = 0;
  std::size_t count = 100;
  std::size_t triviality_threshold = 2;  // max equivalence queries to call trivial
  std::size_t max_dfta_states = 60;      // cap on materialized yield-DFTA states
};

// Uniform random total DFA, minimized before return.
inline Dfa random_dfa(const GenSpec& spec, Rng& rng) {
  Dfa d;
  d.alphabet_size =
      spec.alphabet_min + uniform_below(rng, spec.alphabet_max - spec.alphabet_min + 1);
  d.num_states = spec.states_min + uniform_below(rng, spec.states_max - spec.states_min + 1);
  d.initial = 0;
  d.accepting.resize(d.num_states);
  for (std::size_t q = 0; q < d.num_states; ++q)
    d.accepting[q] = uniform_real(rng) < spec.acceptance_density;
  d.transitions.resize(d.num_states * d.alphabet_size);
  for (auto& t : d.transitions) t = uniform_below(rng, d.num_states);
  return minimize_dfa(d);
}

inline std::string letter_name(std::size_t i) { return std::string(1, static_cast<char>('a' + i)); }

// Tree language of all trees whose yield lies in L(d): states are the word
// transformations induced by yields, combined by composition. Only
// reachable transformations are materialized; throws BudgetExceeded past
// the cap. The result satisfies associativity by construction.
inline Dfta dfa_to_yield_dfta(const Dfa& d, std::size_t max_states = 10000) {
  std::vector<Signature::Symbol> syms{{"f", 2}};
  for (std::size_t a = 0; a < d.alphabet_size; ++a) syms.push_back({letter_name(a), 0});
  Signature sig(std::move(syms));

  using Transformation = std::vector<std::uint8_t>;
  std::map<Transformation, State> index;
  std::vector<Transformation> elems;
  auto intern = [&](const Transformation& g) {
    auto [it, ins] = index.emplace(g, static_cast<State>(elems.size()));
    if (ins) {
      elems.push_back(g);
      if (elems.size() > max_states)
        throw BudgetExceeded("yield DFTA exceeds " + std::to_string(max_states) + " states");
    }
    return it->second;
  };

  std::vector<State> const_state(d.alphabet_size);
  for (std::size_t a = 0; a < d.alphabet_size; ++a) {
    Transformation g(d.num_states);
    for (std::size_t q = 0; q < d.num_states; ++q)
      g[q] = static_cast<std::uint8_t>(d.next(q, a));
    const_state[a] = intern(g);
  }
  // Close under composition; yield(f(t1,t2)) applies t1's word first.
  for (std::size_t i = 0; i < elems.size(); ++i) {
    for (std::size_t j = 0; j < elems.size(); ++j) {
      Transformation left = elems[i], right = elems[j];
      Transformation comp(d.num_states);
      for (std::size_t q = 0; q < d.num_states; ++q) comp[q] = right[left[q]];
      intern(comp);
      if (i != j) {
        Transformation comp2(d.num_states);
        for (std::size_t q = 0; q < d.num_states; ++q) comp2[q] = left[right[q]];
        intern(comp2);
      }
    }
  }
  std::size_t n = elems.size();
  std::vector<std::vector<State>> trans(sig.symbols().size());
  trans[0].resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Transformation comp(d.num_states);
      for (std::size_t q = 0; q < d.num_states; ++q) comp[q] = elems[j][elems[i][q]];
      trans[0][i * n + j] = index.at(comp);
    }
  for (std::size_t a = 0; a < d.alphabet_size; ++a) trans[1 + a] = {const_state[a]};
  std::vector<bool> acc(n);
  for (std::size_t i = 0; i < n; ++i) acc[i] = d.accepting[elems[i][d.initial]];
  return minimize(Dfta(sig, n, std::move(acc), std::move(trans)));
}

// Random DFTA over {f/2, g/1, constants} forced toward the distributivity
// rule g(f(X,Y)) -> f(g(X),g(Y)); returns nullopt when the final
// consistency filter rejects the result.
inline std::optional<Dfta> random_distributive_dfta(const GenSpec& spec, Rng& rng) {
  std::size_t num_consts =
      spec.alphabet_min + uniform_below(rng, spec.alphabet_max - spec.alphabet_min + 1);
  std::vector<Signature::Symbol> syms{{"f", 2}, {"g", 1}};
  for (std::size_t c = 0; c < num_consts; ++c) syms.push_back({letter_name(c), 0});
  Signature sig(std::move(syms));

  std::size_t n = spec.states_min + uniform_below(rng, spec.states_max - spec.states_min + 1);
  std::vector<std::vector<State>> trans(sig.symbols().size());
  trans[0].resize(n * n);
  trans[1].resize(n);
  for (auto& t : trans[0]) t = static_cast<State>(uniform_below(rng, n));
  for (auto& t : trans[1]) t = static_cast<State>(uniform_below(rng, n));
  for (std::size_t c = 0; c < num_consts; ++c)
    trans[2 + c] = {static_cast<State>(uniform_below(rng, n))};
  std::vector<bool> acc(n);
  for (std::size_t q = 0; q < n; ++q) acc[q] = uniform_real(rng) < spec.acceptance_density;

  // Force delta(q1,q2,f) for state pairs in the image of g, using the
  // smallest preimages; the final filter absorbs any leftover mismatch.
  std::vector<std::optional<State>> g_preimage(n);
  for (std::size_t p = 0; p < n; ++p) {
    State q = trans[1][p];
    if (!g_preimage[q]) g_preimage[q] = static_cast<State>(p);
  }
  for (std::size_t q1 = 0; q1 < n; ++q1) {
    if (!g_preimage[q1]) continue;
    for (std::size_t q2 = 0; q2 < n; ++q2) {
      if (!g_preimage[q2]) continue;
      State p1 = *g_preimage[q1], p2 = *g_preimage[q2];
      State inner = trans[0][static_cast<std::size_t>(p1) * n + p2];
      trans[0][q1 * n + q2] = trans[1][inner];
    }
  }

  Dfta a(sig, n, std::move(acc), std::move(trans));
  Trs rule = builtin_rules(RuleFamily::DistributivityUnary, {"g", "f"}, sig);
  if (!check_full(a, rule).consistent()) return std::nullopt;
  return minimize(a);
}

}  // namespace treelearn
