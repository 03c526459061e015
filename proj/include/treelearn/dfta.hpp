#pragma once

#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "treelearn/term.hpp"

namespace treelearn {

using State = std::uint32_t;

// Bottom-up deterministic finite tree automaton with a total transition map.
// Transitions are stored densely per symbol, row-major over state vectors,
// so delta(f, q1..qk) is table[f][((q1*n+q2)*n+...)+qk].
class Dfta {
public:
  Dfta() = default;

  Dfta(Signature sig, std::size_t num_states, std::vector<bool> accepting,
       std::vector<std::vector<State>> transitions)
      : signature_(std::move(sig)),
        num_states_(num_states),
        accepting_(std::move(accepting)),
        transitions_(std::move(transitions)) {
    if (accepting_.size() != num_states_)
      throw std::invalid_argument("accepting vector size mismatch");
    if (transitions_.size() != signature_.symbols().size())
      throw std::invalid_argument("one transition table per symbol required");
    for (std::size_t s = 0; s < transitions_.size(); ++s) {
      std::size_t expect = table_size(num_states_, signature_.symbols()[s].arity);
      if (transitions_[s].size() != expect)
        throw std::invalid_argument("transition table for '" + signature_.symbols()[s].name +
                                    "' is not total");
      for (State q : transitions_[s])
        if (q >= num_states_) throw std::invalid_argument("transition target out of range");
    }
  }

  static std::size_t table_size(std::size_t n, std::size_t arity) {
    std::size_t sz = 1;
    for (std::size_t i = 0; i < arity; ++i) sz *= n;
    return sz;
  }

  const Signature& signature() const { return signature_; }
  std::size_t num_states() const { return num_states_; }
  bool accepting(State q) const { return accepting_[q]; }
  const std::vector<bool>& accepting_mask() const { return accepting_; }
  const std::vector<std::vector<State>>& transitions() const { return transitions_; }

  State delta(std::size_t symbol_index, const std::vector<State>& args) const {
    std::size_t idx = 0;
    for (State q : args) idx = idx * num_states_ + q;
    return transitions_[symbol_index][idx];
  }

  State delta(const std::string& symbol, const std::vector<State>& args) const {
    return delta(signature_.index_of(symbol), args);
  }

  bool operator==(const Dfta& o) const {
    return signature_ == o.signature_ && num_states_ == o.num_states_ &&
           accepting_ == o.accepting_ && transitions_ == o.transitions_;
  }

private:
  Signature signature_;
  std::size_t num_states_ = 0;
  std::vector<bool> accepting_;
  std::vector<std::vector<State>> transitions_;
};

// delta-hat on ground trees.
inline State evaluate(const Dfta& a, const Term& t) {
  if (t.is_variable()) throw std::invalid_argument("evaluate requires a ground term");
  std::vector<State> args;
  args.reserve(t.children().size());
  for (const auto& c : t.children()) args.push_back(evaluate(a, c));
  return a.delta(t.label(), args);
}

inline bool accepts(const Dfta& a, const Term& t) { return a.accepting(evaluate(a, t)); }

// Extended evaluation: variable leaves take the state given by `assignment`.
inline State evaluate_term(const Dfta& a, const Term& t,
                           const std::unordered_map<std::string, State>& assignment) {
  if (t.is_variable()) {
    auto it = assignment.find(t.label());
    if (it == assignment.end())
      throw std::invalid_argument("unassigned variable: " + t.label());
    return it->second;
  }
  std::vector<State> args;
  args.reserve(t.children().size());
  for (const auto& c : t.children()) args.push_back(evaluate_term(a, c, assignment));
  return a.delta(t.label(), args);
}

// Full table of the state transformation induced by a term, over Q^k where
// k is the number of distinct variables (sorted by name).
struct StateTransformation {
  std::vector<std::string> variable_order;
  std::vector<State> table;  // row-major over Q^k in variable_order

  std::size_t arity() const { return variable_order.size(); }
};

struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

inline StateTransformation transformation(const Dfta& a, const Term& t,
                                          std::size_t max_entries = 100000000) {
  StateTransformation out;
  out.variable_order = t.variables();
  std::sort(out.variable_order.begin(), out.variable_order.end());
  std::size_t n = a.num_states();
  std::size_t k = out.variable_order.size();
  std::size_t entries = Dfta::table_size(n, k);
  if (entries > max_entries)
    throw BudgetExceeded("transformation table with " + std::to_string(entries) +
                         " entries exceeds budget");
  out.table.resize(entries);
  std::unordered_map<std::string, State> asg;
  std::vector<State> vec(k, 0);
  for (std::size_t idx = 0; idx < entries; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = k; i-- > 0;) {
      vec[i] = static_cast<State>(rest % n);
      rest /= n;
    }
    for (std::size_t i = 0; i < k; ++i) asg[out.variable_order[i]] = vec[i];
    out.table[idx] = evaluate_term(a, t, asg);
  }
  return out;
}

namespace detail {

// Shortest ground tree per state, Dijkstra-style by (size, printed form).
// Unreached states get an invalid Term.
inline std::vector<Term> shortest_trees(const Dfta& a) {
  std::size_t n = a.num_states();
  std::vector<Term> best(n);
  using Entry = std::tuple<std::size_t, std::string, State, Term>;
  auto cmp = [](const Entry& x, const Entry& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
    return std::get<1>(x) > std::get<1>(y);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> pq(cmp);
  const auto& syms = a.signature().symbols();
  for (std::size_t s = 0; s < syms.size(); ++s)
    if (syms[s].arity == 0) {
      Term t = Term::node(syms[s].name);
      pq.emplace(1, t.str(), a.delta(s, {}), t);
    }
  std::vector<State> finalized;
  while (!pq.empty()) {
    auto [sz, repr, q, t] = pq.top();
    pq.pop();
    if (best[q].valid()) continue;
    best[q] = t;
    finalized.push_back(q);
    // Combine the new state with already-final ones at every position.
    for (std::size_t s = 0; s < syms.size(); ++s) {
      std::size_t k = syms[s].arity;
      if (k == 0) continue;
      std::vector<std::size_t> pick(k, 0);  // indices into finalized; last slot forced new
      std::size_t combos = 1;
      for (std::size_t i = 0; i + 1 < k; ++i) combos *= finalized.size();
      for (std::size_t pos = 0; pos < k; ++pos) {
        for (std::size_t c = 0; c < combos; ++c) {
          std::size_t rest = c;
          std::vector<State> args(k);
          std::vector<Term> kids(k);
          bool skip = false;
          for (std::size_t i = 0; i < k; ++i) {
            if (i == pos) {
              args[i] = q;
              kids[i] = t;
            } else {
              State other = finalized[rest % finalized.size()];
              rest /= finalized.size();
              // Avoid duplicate enumeration: positions before `pos` must not be
              // the freshly finalized state.
              if (i < pos && other == q) skip = true;
              args[i] = other;
              kids[i] = best[other];
            }
          }
          if (skip) continue;
          State target = a.delta(s, args);
          if (best[target].valid()) continue;
          Term cand = Term::node(syms[s].name, kids);
          pq.emplace(cand.size(), cand.str(), target, cand);
        }
      }
    }
  }
  return best;
}

}  // namespace detail

// Minimum-size representative tree per state. Requires all states reachable.
inline std::vector<Term> state_representatives(const Dfta& a) {
  auto reps = detail::shortest_trees(a);
  for (std::size_t q = 0; q < reps.size(); ++q)
    if (!reps[q].valid())
      throw std::invalid_argument("state " + std::to_string(q) +
                                  " is unreachable; minimize first");
  return reps;
}

namespace detail {

inline std::vector<bool> reachable_states(const Dfta& a) {
  std::size_t n = a.num_states();
  std::vector<bool> reach(n, false);
  const auto& syms = a.signature().symbols();
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s = 0; s < syms.size(); ++s) {
      std::size_t k = syms[s].arity;
      std::size_t rows = Dfta::table_size(n, k);
      for (std::size_t idx = 0; idx < rows; ++idx) {
        std::size_t rest = idx;
        bool all = true;
        for (std::size_t i = 0; i < k; ++i) {
          if (!reach[rest % n]) {
            all = false;
            break;
          }
          rest /= n;
        }
        if (!all) continue;
        State tgt = a.transitions()[s][idx];
        if (!reach[tgt]) {
          reach[tgt] = true;
          changed = true;
        }
      }
    }
  }
  return reach;
}

}  // namespace detail

// Minimal language-equivalent DFTA: bottom-up reachable states only, then
// partition refinement, then canonical state renumbering by representative
// tree (size, then printed form).
inline Dfta minimize(const Dfta& a) {
  std::size_t n = a.num_states();
  const auto& syms = a.signature().symbols();
  auto reach = detail::reachable_states(a);

  std::vector<State> dense(n, 0);
  std::vector<State> old_of;
  for (std::size_t q = 0; q < n; ++q)
    if (reach[q]) {
      dense[q] = static_cast<State>(old_of.size());
      old_of.push_back(static_cast<State>(q));
    }
  std::size_t m = old_of.size();
  if (m == 0) throw std::logic_error("no reachable states; signature lacks constants?");

  // Restriction to reachable states stays total: targets of reachable rows
  // are reachable by definition.
  std::vector<std::vector<State>> rtrans(syms.size());
  for (std::size_t s = 0; s < syms.size(); ++s) {
    std::size_t k = syms[s].arity;
    std::size_t rows = Dfta::table_size(m, k);
    rtrans[s].resize(rows);
    std::vector<State> args(k);
    for (std::size_t idx = 0; idx < rows; ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = k; i-- > 0;) {
        args[i] = old_of[rest % m];
        rest /= m;
      }
      rtrans[s][idx] = dense[a.delta(s, args)];
    }
  }
  std::vector<bool> racc(m);
  for (std::size_t q = 0; q < m; ++q) racc[q] = a.accepting(old_of[q]);
  Dfta r(a.signature(), m, racc, std::move(rtrans));

  // Partition refinement: split blocks by the block of every height-1
  // successor (all symbols, positions, sibling state vectors).
  std::vector<State> block(m);
  for (std::size_t q = 0; q < m; ++q) block[q] = racc[q] ? 1 : 0;
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::vector<State>, State> sig_to_block;
    std::vector<State> next(m);
    for (std::size_t q = 0; q < m; ++q) {
      std::vector<State> signature{block[q]};
      for (std::size_t s = 0; s < syms.size(); ++s) {
        std::size_t k = syms[s].arity;
        if (k == 0) continue;
        std::size_t sib_rows = Dfta::table_size(m, k - 1);
        std::vector<State> args(k);
        for (std::size_t pos = 0; pos < k; ++pos) {
          for (std::size_t sidx = 0; sidx < sib_rows; ++sidx) {
            std::size_t rest = sidx;
            std::size_t j = 0;
            for (std::size_t i = 0; i < k; ++i) {
              if (i == pos) {
                args[i] = static_cast<State>(q);
              } else {
                args[i] = static_cast<State>(rest % m);
                rest /= m;
                ++j;
              }
            }
            signature.push_back(block[r.delta(s, args)]);
          }
        }
      }
      auto [it, inserted] =
          sig_to_block.emplace(std::move(signature), static_cast<State>(sig_to_block.size()));
      next[q] = it->second;
    }
    if (next != block) {
      block = next;
      changed = true;
    }
  }
  std::size_t blocks = *std::max_element(block.begin(), block.end()) + 1;

  // Quotient automaton over blocks (well-defined by stability).
  std::vector<State> rep_state(blocks);
  for (std::size_t q = m; q-- > 0;) rep_state[block[q]] = static_cast<State>(q);
  std::vector<std::vector<State>> qtrans(syms.size());
  for (std::size_t s = 0; s < syms.size(); ++s) {
    std::size_t k = syms[s].arity;
    std::size_t rows = Dfta::table_size(blocks, k);
    qtrans[s].resize(rows);
    std::vector<State> args(k);
    for (std::size_t idx = 0; idx < rows; ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = k; i-- > 0;) {
        args[i] = rep_state[rest % blocks];
        rest /= blocks;
      }
      qtrans[s][idx] = block[r.delta(s, args)];
    }
  }
  std::vector<bool> qacc(blocks);
  for (std::size_t b = 0; b < blocks; ++b) qacc[b] = racc[rep_state[b]];
  Dfta quotient(a.signature(), blocks, qacc, std::move(qtrans));

  // Canonical renumbering by representative tree.
  auto reps = state_representatives(quotient);
  std::vector<State> order(blocks);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](State x, State y) { return Term::canonical_less(reps[x], reps[y]); });
  std::vector<State> renum(blocks);
  for (std::size_t i = 0; i < blocks; ++i) renum[order[i]] = static_cast<State>(i);
  std::vector<std::vector<State>> ctrans(syms.size());
  for (std::size_t s = 0; s < syms.size(); ++s) {
    std::size_t k = syms[s].arity;
    std::size_t rows = Dfta::table_size(blocks, k);
    ctrans[s].resize(rows);
    std::vector<State> args(k);
    for (std::size_t idx = 0; idx < rows; ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = k; i-- > 0;) {
        args[i] = order[rest % blocks];
        rest /= blocks;
      }
      ctrans[s][idx] = renum[quotient.delta(s, args)];
    }
  }
  std::vector<bool> cacc(blocks);
  for (std::size_t b = 0; b < blocks; ++b) cacc[b] = qacc[order[b]];
  return Dfta(a.signature(), blocks, cacc, std::move(ctrans));
}

inline Dfta complement(const Dfta& a) {
  std::vector<bool> acc = a.accepting_mask();
  acc.flip();
  return Dfta(a.signature(), a.num_states(), std::move(acc), a.transitions());
}

struct EquivalenceResult {
  std::optional<Term> counterexample;  // nullopt = languages equal
  bool equal() const { return !counterexample.has_value(); }
};

// Language equivalence. Equal automata are detected by comparing canonical
// minimal forms; otherwise a minimum-size symmetric-difference tree is found
// by shortest-tree search over reachable product states.
inline EquivalenceResult check_equivalence(const Dfta& a, const Dfta& b) {
  if (!(a.signature() == b.signature()))
    throw std::invalid_argument("check_equivalence requires a common signature");
  Dfta ma = minimize(a), mb = minimize(b);
  if (ma == mb) return {};

  std::size_t na = ma.num_states(), nb = mb.num_states();
  const auto& syms = ma.signature().symbols();
  auto pair_id = [&](State p, State q) { return static_cast<std::size_t>(p) * nb + q; };
  std::vector<Term> best(na * nb);
  using Entry = std::tuple<std::size_t, std::string, std::size_t, Term>;
  auto cmp = [](const Entry& x, const Entry& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
    return std::get<1>(x) > std::get<1>(y);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> pq(cmp);
  for (std::size_t s = 0; s < syms.size(); ++s)
    if (syms[s].arity == 0) {
      Term t = Term::node(syms[s].name);
      pq.emplace(1, t.str(), pair_id(ma.delta(s, {}), mb.delta(s, {})), t);
    }
  std::vector<std::size_t> finalized;
  while (!pq.empty()) {
    auto [sz, repr, pid, t] = pq.top();
    pq.pop();
    if (best[pid].valid()) continue;
    best[pid] = t;
    State p = static_cast<State>(pid / nb), q = static_cast<State>(pid % nb);
    if (ma.accepting(p) != mb.accepting(q)) return {t};
    finalized.push_back(pid);
    for (std::size_t s = 0; s < syms.size(); ++s) {
      std::size_t k = syms[s].arity;
      if (k == 0) continue;
      std::size_t combos = 1;
      for (std::size_t i = 0; i + 1 < k; ++i) combos *= finalized.size();
      for (std::size_t pos = 0; pos < k; ++pos) {
        for (std::size_t c = 0; c < combos; ++c) {
          std::size_t rest = c;
          std::vector<State> pa(k), pb(k);
          std::vector<Term> kids(k);
          bool skip = false;
          for (std::size_t i = 0; i < k; ++i) {
            std::size_t child;
            if (i == pos) {
              child = pid;
            } else {
              child = finalized[rest % finalized.size()];
              rest /= finalized.size();
              if (i < pos && child == pid) skip = true;
            }
            pa[i] = static_cast<State>(child / nb);
            pb[i] = static_cast<State>(child % nb);
            kids[i] = best[child];
          }
          if (skip) continue;
          std::size_t tgt = pair_id(ma.delta(s, pa), mb.delta(s, pb));
          if (best[tgt].valid()) continue;
          Term cand = Term::node(syms[s].name, kids);
          pq.emplace(cand.size(), cand.str(), tgt, cand);
        }
      }
    }
  }
  // Canonical minimal forms differ, so a witness pair must have been found.
  throw std::logic_error("inconsistent canonical forms without a witness");
}

namespace detail {

// BFS over ordered state pairs; returns a context c such that the pair
// (p, q) reaches, through c's layers, a pair satisfying `target`. The hole
// travels with the first component.
template <typename TargetPred>
std::optional<Context> pair_context_search(const Dfta& a, const std::vector<Term>& reps,
                                           State p, State q, TargetPred target) {
  std::size_t n = a.num_states();
  const auto& syms = a.signature().symbols();
  auto pid = [&](State x, State y) { return static_cast<std::size_t>(x) * n + y; };
  struct Step {
    std::size_t parent;
    std::size_t symbol;
    std::size_t position;
    std::vector<State> siblings;
  };
  std::vector<char> seen(n * n, 0);
  std::vector<Step> how(n * n);
  std::deque<std::size_t> queue;
  std::size_t start = pid(p, q);
  seen[start] = 1;
  how[start].parent = start;
  queue.push_back(start);
  std::optional<std::size_t> found;
  while (!queue.empty() && !found) {
    std::size_t cur = queue.front();
    queue.pop_front();
    State u = static_cast<State>(cur / n), v = static_cast<State>(cur % n);
    if (target(u, v)) {
      found = cur;
      break;
    }
    for (std::size_t s = 0; s < syms.size() && !found; ++s) {
      std::size_t k = syms[s].arity;
      if (k == 0) continue;
      std::size_t sib_rows = Dfta::table_size(n, k - 1);
      for (std::size_t pos = 0; pos < k; ++pos) {
        for (std::size_t sidx = 0; sidx < sib_rows; ++sidx) {
          std::size_t rest = sidx;
          std::vector<State> sib(k - 1), au(k), av(k);
          for (std::size_t i = 0; i < k - 1; ++i) {
            sib[i] = static_cast<State>(rest % n);
            rest /= n;
          }
          for (std::size_t i = 0, j = 0; i < k; ++i) {
            if (i == pos) {
              au[i] = u;
              av[i] = v;
            } else {
              au[i] = av[i] = sib[j++];
            }
          }
          std::size_t nxt = pid(a.delta(s, au), a.delta(s, av));
          if (seen[nxt]) continue;
          seen[nxt] = 1;
          how[nxt] = Step{cur, s, pos, sib};
          if (target(static_cast<State>(nxt / n), static_cast<State>(nxt % n))) {
            found = nxt;
            break;
          }
          queue.push_back(nxt);
        }
        if (found) break;
      }
    }
  }
  if (!found) return std::nullopt;
  // Rebuild the context from the path; the first step is innermost.
  Context ctx = Context::hole();
  std::size_t cur = *found;
  std::vector<Step> path;
  while (cur != start) {
    path.push_back(how[cur]);
    cur = how[cur].parent;
  }
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    const auto& syms2 = a.signature().symbols();
    std::size_t k = syms2[it->symbol].arity;
    std::vector<Term> kids(k);
    for (std::size_t i = 0, j = 0; i < k; ++i) {
      if (i == it->position)
        kids[i] = ctx.term();
      else
        kids[i] = reps[it->siblings[j++]];
    }
    ctx = Context(Term::node(syms2[it->symbol].name, std::move(kids)));
  }
  return ctx;
}

}  // namespace detail

// Context under which exactly one of rep(p), rep(q) is accepted. Requires a
// minimal automaton and p != q.
inline Context distinguishing_context(const Dfta& a, State p, State q,
                                      const std::vector<Term>* reps_hint = nullptr) {
  if (p == q) throw std::invalid_argument("distinguishing_context requires distinct states");
  std::vector<Term> local;
  const std::vector<Term>* reps = reps_hint;
  if (!reps) {
    local = state_representatives(a);
    reps = &local;
  }
  auto ctx = detail::pair_context_search(
      a, *reps, p, q, [&](State u, State v) { return a.accepting(u) != a.accepting(v); });
  if (!ctx) throw std::logic_error("states are indistinguishable; automaton not minimal?");
  return *ctx;
}

// Context c with c(rep(p)) accepted and c(rep(q)) rejected. Exists exactly
// when p is not below q in the acceptance order.
inline std::optional<Context> separating_context(const Dfta& a, State p, State q,
                                                 const std::vector<Term>& reps) {
  return detail::pair_context_search(
      a, reps, p, q, [&](State u, State v) { return a.accepting(u) && !a.accepting(v); });
}

// ---- File format ----------------------------------------------------------
// header: `signature: ...`; `states: q0 q1 ...`; `accepting: q1 ...`;
// one line per transition `f(q0,q1) -> q1`, constants `a -> q0`. Missing
// transitions are completed with a fresh non-accepting sink.

struct DftaLoadResult {
  Dfta dfta;
  bool completed_with_sink = false;
};

inline DftaLoadResult parse_dfta(std::istream& in) {
  std::string line;
  std::optional<Signature> sig;
  std::vector<std::string> state_names;
  std::map<std::string, State> state_index;
  std::vector<bool> accepting;
  struct Row {
    std::string symbol;
    std::vector<State> args;
    State target;
  };
  std::vector<Row> rows;
  std::size_t lineno = 0;
  auto need_state = [&](const std::string& name) {
    auto it = state_index.find(name);
    if (it == state_index.end()) throw std::runtime_error("unknown state: " + name);
    return it->second;
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    auto end = line.find_last_not_of(" \t\r");
    std::string body = line.substr(begin, end - begin + 1);
    try {
      if (body.rfind("signature:", 0) == 0) {
        sig = parse_signature(body.substr(10));
      } else if (body.rfind("states:", 0) == 0) {
        std::istringstream is(body.substr(7));
        std::string name;
        while (is >> name) {
          state_index.emplace(name, static_cast<State>(state_names.size()));
          state_names.push_back(name);
        }
        accepting.assign(state_names.size(), false);
      } else if (body.rfind("accepting:", 0) == 0) {
        std::istringstream is(body.substr(10));
        std::string name;
        while (is >> name) accepting[need_state(name)] = true;
      } else {
        if (!sig || state_names.empty())
          throw std::runtime_error("transition before signature/states headers");
        auto arrow = body.find("->");
        if (arrow == std::string::npos) throw std::runtime_error("expected '->'");
        std::string left = body.substr(0, arrow);
        std::istringstream rs(body.substr(arrow + 2));
        std::string tgt;
        rs >> tgt;
        Row row;
        row.target = need_state(tgt);
        auto paren = left.find('(');
        if (paren == std::string::npos) {
          std::istringstream ls(left);
          ls >> row.symbol;
        } else {
          row.symbol = left.substr(0, paren);
          auto close = left.rfind(')');
          std::string args = left.substr(paren + 1, close - paren - 1);
          for (auto& ch : args)
            if (ch == ',') ch = ' ';
          std::istringstream as(args);
          std::string name;
          while (as >> name) row.args.push_back(need_state(name));
        }
        // Trim symbol whitespace.
        while (!row.symbol.empty() && std::isspace(static_cast<unsigned char>(row.symbol.back())))
          row.symbol.pop_back();
        if (!sig->contains(row.symbol))
          throw std::runtime_error("unknown symbol: " + row.symbol);
        if (sig->arity(row.symbol) != row.args.size())
          throw std::runtime_error("arity mismatch for symbol: " + row.symbol);
        rows.push_back(std::move(row));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!sig) throw std::runtime_error("DFTA file has no signature header");
  if (state_names.empty()) throw std::runtime_error("DFTA file has no states header");

  std::size_t n = state_names.size();
  const auto& syms = sig->symbols();
  bool used_sink = false;
  // First pass with a provisional sink as state n.
  std::vector<std::vector<State>> trans(syms.size());
  for (std::size_t s = 0; s < syms.size(); ++s)
    trans[s].assign(Dfta::table_size(n + 1, syms[s].arity), static_cast<State>(n));
  for (const auto& row : rows) {
    std::size_t s = sig->index_of(row.symbol);
    std::size_t idx = 0;
    for (State q : row.args) idx = idx * (n + 1) + q;
    trans[s][idx] = row.target;
  }
  for (std::size_t s = 0; s < syms.size() && !used_sink; ++s) {
    std::size_t k = syms[s].arity;
    std::vector<State> args(k);
    std::size_t rows_n = Dfta::table_size(n, k);
    for (std::size_t idx = 0; idx < rows_n; ++idx) {
      std::size_t rest = idx;
      std::size_t full = 0;
      for (std::size_t i = 0; i < k; ++i) {
        args[k - 1 - i] = static_cast<State>(rest % n);
        rest /= n;
      }
      for (State q : args) full = full * (n + 1) + q;
      if (trans[s][full] == static_cast<State>(n)) {
        used_sink = true;
        break;
      }
    }
  }
  std::size_t total = used_sink ? n + 1 : n;
  std::vector<std::vector<State>> final_trans(syms.size());
  for (std::size_t s = 0; s < syms.size(); ++s) {
    std::size_t k = syms[s].arity;
    final_trans[s].resize(Dfta::table_size(total, k));
    std::vector<State> args(k);
    for (std::size_t idx = 0; idx < final_trans[s].size(); ++idx) {
      std::size_t rest = idx;
      std::size_t src = 0;
      for (std::size_t i = 0; i < k; ++i) {
        args[k - 1 - i] = static_cast<State>(rest % total);
        rest /= total;
      }
      for (State q : args) src = src * (n + 1) + q;
      final_trans[s][idx] = trans[s][src];
    }
  }
  std::vector<bool> acc(total, false);
  for (std::size_t q = 0; q < n; ++q) acc[q] = accepting[q];
  return {Dfta(*sig, total, std::move(acc), std::move(final_trans)), used_sink};
}

inline DftaLoadResult load_dfta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open DFTA file: " + path);
  return parse_dfta(in);
}

inline std::string dfta_to_string(const Dfta& a) {
  std::ostringstream os;
  os << "signature: " << signature_to_string(a.signature()) << '\n';
  os << "states:";
  for (std::size_t q = 0; q < a.num_states(); ++q) os << " q" << q;
  os << '\n';
  os << "accepting:";
  for (std::size_t q = 0; q < a.num_states(); ++q)
    if (a.accepting(static_cast<State>(q))) os << " q" << q;
  os << '\n';
  const auto& syms = a.signature().symbols();
  std::size_t n = a.num_states();
  for (std::size_t s = 0; s < syms.size(); ++s) {
    std::size_t k = syms[s].arity;
    std::size_t rows = Dfta::table_size(n, k);
    std::vector<State> args(k);
    for (std::size_t idx = 0; idx < rows; ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = k; i-- > 0;) {
        args[i] = static_cast<State>(rest % n);
        rest /= n;
      }
      os << syms[s].name;
      if (k > 0) {
        os << '(';
        for (std::size_t i = 0; i < k; ++i) {
          if (i) os << ',';
          os << 'q' << args[i];
        }
        os << ')';
      }
      os << " -> q" << a.transitions()[s][idx] << '\n';
    }
  }
  return os.str();
}

}  // namespace treelearn
