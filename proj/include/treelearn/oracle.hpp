#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "treelearn/dfta.hpp"
#include "treelearn/rng.hpp"
#include "treelearn/term.hpp"

namespace treelearn {

struct QueryCounters {
  std::size_t membership_queries = 0;
  std::size_t equivalence_queries = 0;
};

// A token is one tree node; the ledger totals the nodes of every tree used
// to approximate equivalence queries.
struct TokenLedger {
  std::uint64_t tokens = 0;
};

// Minimally adequate teacher for one fixed target language per session.
class Teacher {
public:
  virtual ~Teacher() = default;
  virtual bool membership(const Term& t) = 0;
  virtual EquivalenceResult equivalence(const Dfta& candidate) = 0;

  const QueryCounters& counters() const { return counters_; }
  const Signature& signature() const { return sig_; }

protected:
  explicit Teacher(Signature sig) : sig_(std::move(sig)) {}
  QueryCounters counters_;
  Signature sig_;
};

class ExactTeacher : public Teacher {
public:
  explicit ExactTeacher(Dfta target)
      : Teacher(target.signature()), target_(minimize(target)) {}

  const Dfta& target() const { return target_; }

  bool membership(const Term& t) override {
    ++counters_.membership_queries;
    return accepts(target_, t);
  }

  EquivalenceResult equivalence(const Dfta& candidate) override {
    ++counters_.equivalence_queries;
    if (!(candidate.signature() == sig_))
      throw std::invalid_argument("candidate signature differs from target");
    return check_equivalence(target_, candidate);
  }

private:
  Dfta target_;
};

struct SamplerConfig {
  std::size_t sample_count = 1000;   // N
  std::size_t max_tree_size = 50;
  double leaf_probability = 0.35;    // geometric parameter in (0,1)
  std::uint64_t seed = 0;
};

// Random ground tree of size at most cfg.max_tree_size: each node is a leaf
// with the configured probability (forced once the budget runs out), else a
// uniform non-constant symbol with the remaining budget split randomly
// among children.
inline Term sample_tree(const Signature& sig, const SamplerConfig& cfg, Rng& rng) {
  auto constants = sig.constants();
  std::vector<std::size_t> branchers;
  for (std::size_t i = 0; i < sig.symbols().size(); ++i)
    if (sig.symbols()[i].arity > 0) branchers.push_back(i);

  std::function<Term(std::size_t)> go = [&](std::size_t budget) -> Term {
    bool leaf = branchers.empty() || budget < 2 || uniform_real(rng) < cfg.leaf_probability;
    if (!leaf) {
      // Restrict to symbols whose children fit the remaining budget.
      std::vector<std::size_t> fits;
      for (std::size_t s : branchers)
        if (sig.symbols()[s].arity <= budget - 1) fits.push_back(s);
      if (fits.empty()) leaf = true;
      if (!leaf) {
        std::size_t s = fits[uniform_below(rng, fits.size())];
        std::size_t k = sig.symbols()[s].arity;
        // Random composition of budget-1 into k parts, each >= 1.
        std::size_t pool = budget - 1 - k;
        std::vector<std::size_t> parts(k, 1);
        for (std::size_t i = 0; i + 1 < k; ++i) {
          std::size_t take = uniform_below(rng, pool + 1);
          parts[i] += take;
          pool -= take;
        }
        parts[k - 1] += pool;
        std::vector<Term> kids(k);
        for (std::size_t i = 0; i < k; ++i) kids[i] = go(parts[i]);
        return Term::node(sig.symbols()[s].name, std::move(kids));
      }
    }
    return Term::node(constants[uniform_below(rng, constants.size())]);
  };
  return go(cfg.max_tree_size < 1 ? 1 : cfg.max_tree_size);
}

// Teacher whose equivalence answers test conformance on N random trees.
// Target membership is computed from the hidden DFTA but charged per token,
// so a slow membership oracle can be simulated in cost models.
class ApproxTeacher : public Teacher {
public:
  ApproxTeacher(Dfta target, SamplerConfig cfg)
      : Teacher(target.signature()), target_(minimize(target)), cfg_(cfg),
        rng_(make_rng(cfg.seed)) {}

  const Dfta& target() const { return target_; }
  const TokenLedger& ledger() const { return ledger_; }

  bool membership(const Term& t) override {
    ++counters_.membership_queries;
    return accepts(target_, t);
  }

  EquivalenceResult equivalence(const Dfta& candidate) override {
    ++counters_.equivalence_queries;
    for (std::size_t i = 0; i < cfg_.sample_count; ++i) {
      Term t = sample_tree(sig_, cfg_, rng_);
      ledger_.tokens += t.size();
      if (accepts(target_, t) != accepts(candidate, t)) return {t};
    }
    return {};
  }

private:
  Dfta target_;
  SamplerConfig cfg_;
  Rng rng_;
  TokenLedger ledger_;
};

}  // namespace treelearn
