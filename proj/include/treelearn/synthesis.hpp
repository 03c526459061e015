#pragma once

#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "treelearn/dfta.hpp"
#include "treelearn/trs.hpp"

namespace treelearn {

// Ground TRS that completely characterizes L(a): one rule per transition,
// f(rep(q1)..rep(qk)) -> rep(delta(q,f)), skipping identity rules.
inline Trs ground_characterization(const Dfta& a) {
  auto reps = state_representatives(a);
  const auto& syms = a.signature().symbols();
  std::size_t n = a.num_states();
  std::vector<Rule> rules;
  for (std::size_t s = 0; s < syms.size(); ++s) {
    std::size_t k = syms[s].arity;
    std::size_t rows = Dfta::table_size(n, k);
    std::vector<State> args(k);
    for (std::size_t idx = 0; idx < rows; ++idx) {
      std::size_t rest = idx;
      std::vector<Term> kids(k);
      for (std::size_t i = k; i-- > 0;) {
        args[i] = static_cast<State>(rest % n);
        rest /= n;
      }
      for (std::size_t i = 0; i < k; ++i) kids[i] = reps[args[i]];
      Term lhs = Term::node(syms[s].name, std::move(kids));
      Term rhs = reps[a.transitions()[s][idx]];
      if (lhs == rhs) continue;
      rules.emplace_back(std::move(lhs), std::move(rhs));
    }
  }
  return Trs{a.signature(), std::move(rules)};
}

// Letters of the synchronization DFA derived from a DFTA: one per
// (symbol of arity >= 1, hole position, sibling state vector).
struct SyncLetter {
  std::size_t symbol;
  std::size_t position;
  std::vector<State> siblings;
};

struct SyncDfa {
  std::size_t num_states = 0;
  std::vector<SyncLetter> letters;
  std::vector<State> transitions;  // [state * letters.size() + letter]

  State next(State q, std::size_t letter) const {
    return transitions[static_cast<std::size_t>(q) * letters.size() + letter];
  }
};

inline SyncDfa build_sync_dfa(const Dfta& a, std::size_t letter_budget = 1000000) {
  std::size_t n = a.num_states();
  const auto& syms = a.signature().symbols();
  SyncDfa b;
  b.num_states = n;
  for (std::size_t s = 0; s < syms.size(); ++s) {
    std::size_t k = syms[s].arity;
    if (k == 0) continue;
    std::size_t sib_rows = Dfta::table_size(n, k - 1);
    for (std::size_t pos = 0; pos < k; ++pos) {
      for (std::size_t sidx = 0; sidx < sib_rows; ++sidx) {
        std::size_t rest = sidx;
        std::vector<State> sib(k - 1);
        for (std::size_t i = 0; i < k - 1; ++i) {
          sib[i] = static_cast<State>(rest % n);
          rest /= n;
        }
        b.letters.push_back({s, pos, std::move(sib)});
        if (b.letters.size() > letter_budget)
          throw BudgetExceeded("synchronization alphabet exceeds budget");
      }
    }
  }
  b.transitions.resize(n * b.letters.size());
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t l = 0; l < b.letters.size(); ++l) {
      const auto& letter = b.letters[l];
      std::size_t k = syms[letter.symbol].arity;
      std::vector<State> args(k);
      for (std::size_t i = 0, j = 0; i < k; ++i)
        args[i] = (i == letter.position) ? static_cast<State>(q) : letter.siblings[j++];
      b.transitions[q * b.letters.size() + l] = a.delta(letter.symbol, args);
    }
  }
  return b;
}

namespace detail {

// Shortest merging word for every state pair, by backward BFS from the
// diagonal in the pair automaton. Unmergeable pairs keep an empty optional.
inline std::vector<std::optional<std::vector<std::size_t>>> pair_merging_words(const SyncDfa& b) {
  std::size_t n = b.num_states;
  auto pid = [&](State x, State y) {
    // Unordered pairs.
    if (x > y) std::swap(x, y);
    return static_cast<std::size_t>(x) * n + y;
  };
  struct Back {
    std::size_t letter;
    std::size_t next_pair;
  };
  std::vector<std::optional<Back>> via(n * n);
  std::vector<char> done(n * n, 0);
  std::deque<std::size_t> queue;
  for (std::size_t q = 0; q < n; ++q) {
    done[pid(static_cast<State>(q), static_cast<State>(q))] = 1;
    queue.push_back(pid(static_cast<State>(q), static_cast<State>(q)));
  }
  // Backward edges need predecessors; scan all (pair, letter) forward and
  // process in BFS rounds instead.
  bool changed = true;
  std::vector<std::size_t> dist(n * n, static_cast<std::size_t>(-1));
  for (std::size_t q = 0; q < n; ++q) dist[pid(q, q)] = 0;
  while (changed) {
    changed = false;
    for (State x = 0; x < n; ++x) {
      for (State y = x + 1; y < n; ++y) {
        std::size_t cur = pid(x, y);
        for (std::size_t l = 0; l < b.letters.size(); ++l) {
          std::size_t nxt = pid(b.next(x, l), b.next(y, l));
          if (dist[nxt] == static_cast<std::size_t>(-1)) continue;
          if (dist[nxt] + 1 < dist[cur]) {
            dist[cur] = dist[nxt] + 1;
            via[cur] = Back{l, nxt};
            changed = true;
          }
        }
      }
    }
  }
  std::vector<std::optional<std::vector<std::size_t>>> words(n * n);
  for (State x = 0; x < n; ++x) {
    for (State y = 0; y < n; ++y) {
      std::size_t cur = pid(x, y);
      if (dist[cur] == static_cast<std::size_t>(-1)) continue;
      std::vector<std::size_t> w;
      std::size_t at = cur;
      while (via[at]) {
        w.push_back(via[at]->letter);
        at = via[at]->next_pair;
      }
      words[static_cast<std::size_t>(x) * n + y] = std::move(w);
    }
  }
  return words;
}

}  // namespace detail

// Synchronizing word, if one exists: every pair must merge, then the state
// set is collapsed greedily with shortest pair-merging words. Greedy words
// are O(|Q|^3); minimality is not attempted.
inline std::optional<std::vector<std::size_t>> synchronizing_word(const SyncDfa& b) {
  std::size_t n = b.num_states;
  if (n <= 1) return std::vector<std::size_t>{};
  auto words = detail::pair_merging_words(b);
  for (State x = 0; x < n; ++x)
    for (State y = x + 1; y < n; ++y)
      if (!words[static_cast<std::size_t>(x) * n + y]) return std::nullopt;
  std::vector<State> current(n);
  for (std::size_t q = 0; q < n; ++q) current[q] = static_cast<State>(q);
  std::vector<std::size_t> word;
  auto dedup = [&]() {
    std::sort(current.begin(), current.end());
    current.erase(std::unique(current.begin(), current.end()), current.end());
  };
  dedup();
  while (current.size() > 1) {
    const auto& w = *words[static_cast<std::size_t>(current[0]) * n + current[1]];
    for (std::size_t l : w) {
      for (auto& q : current) q = b.next(q, l);
      word.push_back(l);
    }
    dedup();
  }
  return word;
}

// Converts a letter word back to a context; the first letter is innermost.
inline Context word_to_context(const Dfta& a, const SyncDfa& b,
                               const std::vector<std::size_t>& word,
                               const std::vector<Term>& reps) {
  Context ctx = Context::hole();
  for (std::size_t l : word) {
    const auto& letter = b.letters[l];
    std::size_t k = a.signature().symbols()[letter.symbol].arity;
    std::vector<Term> kids(k);
    for (std::size_t i = 0, j = 0; i < k; ++i)
      kids[i] = (i == letter.position) ? ctx.term() : reps[letter.siblings[j++]];
    ctx = Context(Term::node(a.signature().symbols()[letter.symbol].name, std::move(kids)));
  }
  return ctx;
}

// Existence (and extraction) of a consistent rule c(X) -> c(t0) where c is
// a context and t0 a ground term. Requires a minimal automaton.
inline std::optional<Rule> context_rule_exists(const Dfta& a,
                                               std::size_t letter_budget = 1000000) {
  auto constants = a.signature().constants();
  Term t0 = Term::node(constants.front());
  if (a.num_states() == 1) {
    // Degenerate: any context works; return the smallest height-1 rule if a
    // non-constant symbol exists.
    for (const auto& s : a.signature().symbols()) {
      if (s.arity == 0) continue;
      std::vector<Term> kids(s.arity, t0);
      kids[0] = Term::variable("X");
      Term lhs = Term::node(s.name, kids);
      kids[0] = t0;
      return Rule(lhs, Term::node(s.name, kids));
    }
    return std::nullopt;
  }
  SyncDfa b = build_sync_dfa(a, letter_budget);
  auto word = synchronizing_word(b);
  if (!word) return std::nullopt;
  auto reps = state_representatives(a);
  Context c = word_to_context(a, b, *word, reps);
  return Rule(c.term(), plug(c, t0));
}

}  // namespace treelearn
