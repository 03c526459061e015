#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "treelearn/consistency.hpp"
#include "treelearn/dfta.hpp"
#include "treelearn/oracle.hpp"
#include "treelearn/rng.hpp"
#include "treelearn/trs.hpp"

namespace treelearn {

enum class CheckMode {
  Exact,             // full enumeration of state assignments
  Approximate,       // sample assignments; fall through to the teacher if clean
  CountingThenExact, // counting heuristic gates the exact search
};

struct AdviceConfig {
  Trs full_trs;      // consistent with the target
  Trs positive_trs;  // positively consistent
  Trs negative_trs;  // negatively consistent
  Trs mem_trs;       // declared-convergent subset of full_trs, keys the cache
  CheckMode check_mode = CheckMode::Exact;
  std::uint64_t approx_seed = 0;
  std::size_t enumeration_budget = kDefaultEnumerationBudget;

  void validate() const {
    for (const auto& r : mem_trs.rules) {
      bool found = false;
      for (const auto& f : full_trs.rules)
        if (f == r) {
          found = true;
          break;
        }
      if (!found)
        throw std::invalid_argument("mem_trs rule '" + r.str() + "' not in full_trs");
    }
  }
};

struct AdviceStats {
  std::size_t inferred_equivalences = 0;
  std::size_t forwarded_equivalences = 0;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  std::size_t heuristic_unsound = 0;  // heuristic flagged a rule the exact check cleared
};

namespace detail {

template <typename BadPred>
std::optional<Violation> sampled_violation(const Dfta& a, const Rule& rule, BadPred bad,
                                           std::size_t samples, Rng& rng) {
  std::vector<std::string> vars = rule.lhs.variables();
  std::sort(vars.begin(), vars.end());
  std::size_t n = a.num_states();
  std::unordered_map<std::string, State> asg;
  std::vector<State> vec(vars.size());
  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t j = 0; j < vars.size(); ++j) {
      vec[j] = static_cast<State>(uniform_below(rng, n));
      asg[vars[j]] = vec[j];
    }
    State ql = evaluate_term(a, rule.lhs, asg);
    State qr = evaluate_term(a, rule.rhs, asg);
    if (bad(ql, qr)) return Violation{rule, vars, vec, ql, qr};
  }
  return std::nullopt;
}

}  // namespace detail

// One learner session's advice state: the equivalence interceptor and the
// membership cache keyed by normal forms modulo mem_trs. Not shareable
// across sessions.
class AdviceSession {
public:
  AdviceSession(AdviceConfig cfg, Teacher& teacher)
      : cfg_(std::move(cfg)), teacher_(teacher), rng_(make_rng(cfg_.approx_seed)) {
    cfg_.validate();
  }

  const AdviceStats& stats() const { return stats_; }
  const AdviceConfig& config() const { return cfg_; }

  // Ground subterms of the advice rules, for pre-seeding the learner's
  // observation table. For a complete ground characterization this puts a
  // representative of every target state into S before the first
  // hypothesis, so any candidate passing the consistency check is already
  // correct and exactly one oracle equivalence query is spent. Non-ground
  // families (associativity etc.) have no ground subterms, so this is
  // empty for them.
  std::vector<Term> seed_terms() const {
    std::vector<Term> out;
    auto add = [&](const Term& t) {
      if (t.ground() && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    };
    for (const Trs* trs : {&cfg_.full_trs, &cfg_.positive_trs, &cfg_.negative_trs})
      for (const auto& r : trs->rules) {
        add(r.lhs);
        add(r.rhs);
      }
    std::sort(out.begin(), out.end(), Term::canonical_less);
    return out;
  }

  // Cache key is the normal form modulo mem_trs; with an empty mem_trs this
  // degenerates to a structural cache.
  bool membership(const Term& t) {
    Term key = cfg_.mem_trs.empty() ? t : normal_form(cfg_.mem_trs, t);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++stats_.cache_hits;
      return it->second;
    }
    ++stats_.cache_misses;
    bool answer = teacher_.membership(t);
    cache_.emplace(std::move(key), answer);
    return answer;
  }

  // Consistency checks against the three advice TRSs; on a violation the
  // counterexample is inferred with a single membership query, otherwise
  // the query is forwarded to the teacher.
  EquivalenceResult equivalence(const Dfta& candidate) {
    Dfta cand = minimize(candidate);

    if (!cfg_.full_trs.empty()) {
      if (auto v = find_violation(cand, cfg_.full_trs, ConsistencyMode::Full, nullptr)) {
        auto [s, t] = violation_to_tree_pair(cand, *v, false);
        bool ms = membership(s);
        bool cand_acc_s = accepts(cand, s);
        ++stats_.inferred_equivalences;
        // Exactly one of s,t is accepted by the candidate, and the target
        // agrees on both; the misclassified one is the counterexample.
        if (ms) return {cand_acc_s ? t : s};
        return {cand_acc_s ? s : t};
      }
    }
    if (!cfg_.positive_trs.empty()) {
      AcceptanceOrder ord = acceptance_order(cand);
      if (auto v = find_violation(cand, cfg_.positive_trs, ConsistencyMode::Positive, &ord)) {
        auto [s, t] = violation_to_tree_pair(cand, *v, true);
        // s is accepted and t rejected by the candidate. If s is in the
        // target, positive consistency forces t in as well.
        bool ms = membership(s);
        ++stats_.inferred_equivalences;
        return {ms ? t : s};
      }
    }
    if (!cfg_.negative_trs.empty()) {
      Dfta comp = minimize(complement(cand));
      AcceptanceOrder ord = acceptance_order(comp);
      if (auto v = find_violation(comp, cfg_.negative_trs, ConsistencyMode::Positive, &ord)) {
        auto [s, t] = violation_to_tree_pair(comp, *v, true);
        // s is rejected and t accepted by the candidate. If s is outside
        // the target, negative consistency forces t outside as well.
        bool ms = membership(s);
        ++stats_.inferred_equivalences;
        return {ms ? s : t};
      }
    }
    ++stats_.forwarded_equivalences;
    return teacher_.equivalence(candidate);
  }

private:
  std::optional<Violation> find_violation(const Dfta& a, const Trs& trs, ConsistencyMode mode,
                                          const AcceptanceOrder* ord) {
    auto bad_full = [](State l, State r) { return l != r; };
    auto bad_pos = [&](State l, State r) { return !ord->leq(l, r); };
    for (const auto& rule : trs.rules) {
      bool linear = rule.lhs.linear() && rule.rhs.linear();
      switch (cfg_.check_mode) {
        case CheckMode::Exact:
          break;
        case CheckMode::Approximate: {
          std::size_t samples = 10 * a.num_states();
          std::optional<Violation> v =
              mode == ConsistencyMode::Full
                  ? detail::sampled_violation(a, rule, bad_full, samples, rng_)
                  : detail::sampled_violation(a, rule, bad_pos, samples, rng_);
          if (v) return v;
          continue;  // no violation sampled; treat the rule as clean
        }
        case CheckMode::CountingThenExact: {
          if (!linear) break;  // heuristic needs linear sides; go exact
          HeuristicVerdict h = heuristic_filter(a, rule, mode, ord);
          if (h == HeuristicVerdict::Consistent) continue;
          if (h == HeuristicVerdict::MaybeConsistent) continue;
          // DefinitelyInconsistent: the exact search below must find a
          // witness; if it does not, the heuristic was unsound.
          break;
        }
      }
      std::optional<Violation> v =
          mode == ConsistencyMode::Full
              ? detail::first_violation(a, rule, bad_full, cfg_.enumeration_budget)
              : detail::first_violation(a, rule, bad_pos, cfg_.enumeration_budget);
      if (v) return v;
      if (cfg_.check_mode == CheckMode::CountingThenExact && linear)
        ++stats_.heuristic_unsound;
    }
    return std::nullopt;
  }

  AdviceConfig cfg_;
  Teacher& teacher_;
  Rng rng_;
  AdviceStats stats_;
  std::unordered_map<Term, bool, TermHash> cache_;
};

}  // namespace treelearn
