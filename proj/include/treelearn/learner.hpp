#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "treelearn/dfta.hpp"
#include "treelearn/term.hpp"

namespace treelearn {

using MembershipFn = std::function<bool(const Term&)>;
using EquivalenceFn = std::function<EquivalenceResult(const Dfta&)>;

// Observation table over a subtree-closed tree set S and context set E.
// Rows cover S and its one-symbol frontier; bits come from membership
// queries on plug(e, s).
class ObservationTable {
public:
  ObservationTable(Signature sig, MembershipFn mem)
      : sig_(std::move(sig)), mem_(std::move(mem)) {
    contexts_.push_back(Context::hole());
    for (const auto& c : sig_.constants()) add_to_s(Term::node(c));
  }

  const std::vector<Term>& s_trees() const { return s_; }
  const std::vector<Context>& contexts() const { return contexts_; }

  const std::vector<char>& row(const Term& t) const {
    auto it = rows_.find(t);
    if (it == rows_.end()) throw std::logic_error("row not filled: " + t.str());
    return it->second;
  }

  bool in_s(const Term& t) const { return s_index_.count(t) != 0; }

  // Moves frontier trees with unmatched rows into S and adds distinguishing
  // contexts until the table is closed and consistent.
  void close_and_consist() {
    for (;;) {
      fill_all();
      if (close_step()) continue;
      if (consist_step()) continue;
      return;
    }
  }

  // Adds every subtree of the counterexample to S, smallest first.
  void process_counterexample(const Term& cex) {
    std::vector<Term> subs;
    collect_subtrees(cex, subs);
    std::sort(subs.begin(), subs.end(), Term::canonical_less);
    for (const auto& t : subs)
      if (!in_s(t)) add_to_s(t);
  }

  struct HypothesisResult {
    Dfta dfta;
    std::unordered_map<Term, State, TermHash> row_of;  // S tree -> state
  };

  // States are the distinct rows of S; well-defined on closed, consistent
  // tables. State order is canonical by smallest representative tree.
  HypothesisResult build_hypothesis() const {
    std::map<std::vector<char>, Term> representative;
    for (const auto& s : s_) {
      auto [it, inserted] = representative.emplace(row(s), s);
      if (!inserted && Term::canonical_less(s, it->second)) it->second = s;
    }
    std::vector<std::pair<std::vector<char>, Term>> classes(representative.begin(),
                                                            representative.end());
    std::sort(classes.begin(), classes.end(),
              [](const auto& x, const auto& y) {
                return Term::canonical_less(x.second, y.second);
              });
    std::map<std::vector<char>, State> state_of;
    for (std::size_t i = 0; i < classes.size(); ++i)
      state_of[classes[i].first] = static_cast<State>(i);
    std::size_t n = classes.size();

    const auto& syms = sig_.symbols();
    std::vector<std::vector<State>> trans(syms.size());
    for (std::size_t sym = 0; sym < syms.size(); ++sym) {
      std::size_t k = syms[sym].arity;
      std::size_t rows_n = Dfta::table_size(n, k);
      trans[sym].resize(rows_n);
      std::vector<Term> kids(k);
      for (std::size_t idx = 0; idx < rows_n; ++idx) {
        std::size_t rest = idx;
        for (std::size_t i = k; i-- > 0;) {
          kids[i] = classes[rest % n].second;
          rest /= n;
        }
        Term t = Term::node(syms[sym].name, kids);
        auto it = state_of.find(row_or_throw(t));
        if (it == state_of.end()) throw std::logic_error("table is not closed");
        trans[sym][idx] = it->second;
      }
    }
    std::vector<bool> acc(n);
    for (std::size_t i = 0; i < n; ++i) acc[i] = classes[i].first[0] != 0;

    HypothesisResult out{Dfta(sig_, n, std::move(acc), std::move(trans)), {}};
    for (const auto& s : s_) out.row_of[s] = state_of.at(row(s));
    return out;
  }

private:
  void add_to_s(const Term& t) {
    s_index_.emplace(t, s_.size());
    s_.push_back(t);
  }

  const std::vector<char>& row_or_throw(const Term& t) const {
    auto it = rows_.find(t);
    if (it == rows_.end()) throw std::logic_error("missing row for " + t.str());
    return it->second;
  }

  void fill_row(const Term& t) {
    auto& bits = rows_[t];
    for (std::size_t j = bits.size(); j < contexts_.size(); ++j)
      bits.push_back(mem_(plug(contexts_[j], t)) ? 1 : 0);
  }

  // All frontier trees f(s1..sk) with si in S, in deterministic order.
  std::vector<Term> frontier() const {
    std::vector<Term> out;
    const auto& syms = sig_.symbols();
    for (std::size_t sym = 0; sym < syms.size(); ++sym) {
      std::size_t k = syms[sym].arity;
      if (k == 0) continue;
      std::size_t combos = Dfta::table_size(s_.size(), k);
      std::vector<Term> kids(k);
      for (std::size_t idx = 0; idx < combos; ++idx) {
        std::size_t rest = idx;
        for (std::size_t i = k; i-- > 0;) {
          kids[i] = s_[rest % s_.size()];
          rest /= s_.size();
        }
        Term t = Term::node(syms[sym].name, kids);
        if (!in_s(t)) out.push_back(t);
      }
    }
    return out;
  }

  void fill_all() {
    for (const auto& s : s_) fill_row(s);
    for (const auto& f : frontier()) fill_row(f);
  }

  bool close_step() {
    for (const auto& f : frontier()) {
      const auto& r = row_or_throw(f);
      bool matched = false;
      for (const auto& s : s_)
        if (row(s) == r) {
          matched = true;
          break;
        }
      if (!matched) {
        add_to_s(f);  // children already in S, so closure is preserved
        return true;
      }
    }
    return false;
  }

  bool consist_step() {
    // Group S by row; comparing consecutive members of a group suffices.
    std::map<std::vector<char>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < s_.size(); ++i) groups[row(s_[i])].push_back(i);
    const auto& syms = sig_.symbols();
    for (const auto& [r, members] : groups) {
      for (std::size_t gi = 0; gi + 1 < members.size(); ++gi) {
        const Term& s1 = s_[members[gi]];
        const Term& s2 = s_[members[gi + 1]];
        for (std::size_t sym = 0; sym < syms.size(); ++sym) {
          std::size_t k = syms[sym].arity;
          if (k == 0) continue;
          std::size_t sib_rows = Dfta::table_size(s_.size(), k - 1);
          for (std::size_t pos = 0; pos < k; ++pos) {
            for (std::size_t sidx = 0; sidx < sib_rows; ++sidx) {
              std::size_t rest = sidx;
              std::vector<Term> k1(k), k2(k);
              for (std::size_t i = 0; i < k; ++i) {
                if (i == pos) {
                  k1[i] = s1;
                  k2[i] = s2;
                } else {
                  k1[i] = k2[i] = s_[rest % s_.size()];
                  rest /= s_.size();
                }
              }
              const auto& r1 = row_or_throw(Term::node(syms[sym].name, k1));
              const auto& r2 = row_or_throw(Term::node(syms[sym].name, k2));
              for (std::size_t j = 0; j < contexts_.size(); ++j) {
                if (r1[j] != r2[j]) {
                  // Extend E with the context that witnesses the split.
                  std::vector<Term> kids(k);
                  rest = sidx;
                  for (std::size_t i = 0; i < k; ++i) {
                    if (i == pos) {
                      kids[i] = Term::variable("X");
                    } else {
                      kids[i] = s_[rest % s_.size()];
                      rest /= s_.size();
                    }
                  }
                  Context layer(Term::node(syms[sym].name, std::move(kids)));
                  contexts_.push_back(compose(contexts_[j], layer));
                  return true;
                }
              }
            }
          }
        }
      }
    }
    return false;
  }

  static void collect_subtrees(const Term& t, std::vector<Term>& out) {
    for (const auto& prev : out)
      if (prev == t) return;
    out.push_back(t);
    for (const auto& c : t.children()) collect_subtrees(c, out);
  }

  Signature sig_;
  MembershipFn mem_;
  std::vector<Term> s_;
  std::unordered_map<Term, std::size_t, TermHash> s_index_;
  std::vector<Context> contexts_;
  std::unordered_map<Term, std::vector<char>, TermHash> rows_;
};

struct LearnStats {
  std::size_t hypotheses_submitted = 0;
  std::size_t iterations = 0;
};

struct LearnResult {
  Dfta dfta;
  LearnStats stats;
};

struct IterationCapExceeded : std::runtime_error {
  IterationCapExceeded() : std::runtime_error("learner iteration cap exceeded") {}
};

// Main loop: close/consist, build hypothesis, submit to the equivalence
// channel, process counterexample, repeat until the channel says equal.
// `initial_terms` pre-seeds S (with all their subtrees): ground advice
// terms added here are classified before the first hypothesis, which is
// what makes a complete ground characterization force single-query runs.
inline LearnResult learn(const Signature& sig, const MembershipFn& mem,
                         const EquivalenceFn& equivalence, std::size_t iteration_cap = 1000,
                         const std::vector<Term>& initial_terms = {}) {
  ObservationTable table(sig, mem);
  for (const auto& t : initial_terms) table.process_counterexample(t);
  LearnStats stats;
  for (;;) {
    if (++stats.iterations > iteration_cap) throw IterationCapExceeded();
    table.close_and_consist();
    auto hyp = table.build_hypothesis();
    ++stats.hypotheses_submitted;
    EquivalenceResult r = equivalence(hyp.dfta);
    if (r.equal()) return {std::move(hyp.dfta), stats};
    table.process_counterexample(*r.counterexample);
  }
}

}  // namespace treelearn
