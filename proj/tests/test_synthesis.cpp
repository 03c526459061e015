#include <queue>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "treelearn/advice.hpp"
#include "treelearn/learner.hpp"
#include "treelearn/oracle.hpp"
#include "treelearn/synthesis.hpp"

using namespace treelearn;

namespace {

// Unary-letter DFTA from a word DFA read right-to-left: state of letter
// tree a1(a2(...(e))) is the DFA state after reading a1 a2 ... from q0.
// Built directly: constant e -> 0, letter sym maps q to delta(q, letter).
Dfta unary_dfta(std::size_t n, const std::vector<std::vector<State>>& letter_maps,
                const std::vector<bool>& accepting) {
  std::vector<Signature::Symbol> syms;
  for (std::size_t l = 0; l < letter_maps.size(); ++l)
    syms.push_back({std::string(1, static_cast<char>('p' + l)), 1});
  syms.push_back({"e", 0});
  Signature sig(std::move(syms));
  std::vector<std::vector<State>> trans(letter_maps.begin(), letter_maps.end());
  trans.push_back({0});
  return Dfta(sig, n, accepting, std::move(trans));
}

// Brute-force synchronizability oracle: BFS over state subsets.
bool subset_bfs_synchronizable(const SyncDfa& b) {
  std::set<std::vector<State>> seen;
  std::vector<State> start(b.num_states);
  for (std::size_t q = 0; q < b.num_states; ++q) start[q] = static_cast<State>(q);
  std::queue<std::vector<State>> queue;
  queue.push(start);
  seen.insert(start);
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop();
    if (cur.size() == 1) return true;
    for (std::size_t l = 0; l < b.letters.size(); ++l) {
      std::set<State> next;
      for (State q : cur) next.insert(b.next(q, l));
      std::vector<State> v(next.begin(), next.end());
      if (seen.insert(v).second) queue.push(v);
    }
  }
  return false;
}

}  // namespace

TEST_CASE("ground characterization of the boolean evaluator") {
  Dfta a = minimize(test::eval_dfta());
  Trs trs = ground_characterization(a);
  const Signature& sig = a.signature();
  Rule expect(parse_term("and(top,bot)", sig), parse_term("bot", sig));
  bool found = false;
  for (const auto& r : trs.rules) found = found || r == expect;
  CHECK(found);
  CHECK(check_full(a, trs).consistent());
  for (const auto& r : trs.rules) CHECK(r.lhs != r.rhs);
}

namespace {

std::size_t single_query_run(const Dfta& target) {
  ExactTeacher teacher(target);
  AdviceConfig cfg;
  cfg.full_trs = ground_characterization(target);
  AdviceSession session(cfg, teacher);
  auto r = learn(
      target.signature(), [&](const Term& t) { return session.membership(t); },
      [&](const Dfta& cand) { return session.equivalence(cand); }, 1000, session.seed_terms());
  REQUIRE(check_equivalence(r.dfta, target).equal());
  return teacher.counters().equivalence_queries;
}

}  // namespace

TEST_CASE("ground characterization forces single-query learning") {
  CHECK(single_query_run(minimize(test::even_a_dfta())) == 1);
  CHECK(single_query_run(minimize(test::eval_dfta())) == 1);

  // Seeding S with the rules' ground subterms makes single-query behavior
  // hold on arbitrary minimal targets, not just easy ones.
  Rng rng = make_rng(84);
  Signature sig = parse_signature("f/2 a/0 b/0");
  for (int i = 0; i < 15; ++i) {
    Dfta m = minimize(test::random_test_dfta(sig, 2 + uniform_below(rng, 4), rng));
    CHECK(single_query_run(m) == 1);
  }
}

TEST_CASE("context rule for the Cerny C4 automaton") {
  // C4: letter p = cyclic shift, letter q = shift state 3 to 0, identity
  // elsewhere (the classic synchronizing automaton).
  std::vector<std::vector<State>> letters{{1, 2, 3, 0}, {0, 1, 2, 0}};
  Dfta a = unary_dfta(4, letters, {true, false, false, false});
  Dfta m = minimize(a);
  REQUIRE(m.num_states() == 4);
  auto rule = context_rule_exists(m);
  REQUIRE(rule.has_value());
  CHECK(rule->rhs.ground());
  CHECK(rule->lhs.variables().size() == 1);
  CHECK(check_full(m, Trs{m.signature(), {*rule}}).consistent());
}

TEST_CASE("no context rule for a permutation automaton") {
  // Cyclic shift on 3 states: every letter map is a bijection, so no pair
  // of states ever merges.
  std::vector<std::vector<State>> letters{{1, 2, 0}};
  Dfta a = unary_dfta(3, letters, {true, false, false});
  Dfta m = minimize(a);
  REQUIRE(m.num_states() == 3);
  CHECK_FALSE(context_rule_exists(m).has_value());
}

TEST_CASE("degenerate one-state automaton gets a height-1 rule") {
  Signature sig = parse_signature("g/1 a/0");
  Dfta one(sig, 1, {true}, {{0}, {0}});
  auto rule = context_rule_exists(one);
  REQUIRE(rule.has_value());
  CHECK(rule->str() == "g(X) -> g(a)");
  CHECK(check_full(one, Trs{sig, {*rule}}).consistent());

  Signature consts = parse_signature("a/0 b/0");
  Dfta bare(consts, 1, {true}, {{0}, {0}});
  CHECK_FALSE(context_rule_exists(bare).has_value());
}

TEST_CASE("pair criterion matches subset-BFS synchronizability") {
  Rng rng = make_rng(81);
  for (int i = 0; i < 60; ++i) {
    std::size_t n = 2 + uniform_below(rng, 5);
    std::size_t num_letters = 1 + uniform_below(rng, 3);
    std::vector<std::vector<State>> letters(num_letters, std::vector<State>(n));
    for (auto& map : letters)
      for (auto& q : map) q = static_cast<State>(uniform_below(rng, n));
    std::vector<bool> acc(n, false);
    acc[0] = true;
    Dfta a = unary_dfta(n, letters, acc);
    SyncDfa b = build_sync_dfa(a);
    auto word = synchronizing_word(b);
    CHECK(word.has_value() == subset_bfs_synchronizable(b));
    if (word) {
      // Replaying the word collapses the full state set.
      std::set<State> states;
      for (std::size_t q = 0; q < n; ++q) states.insert(static_cast<State>(q));
      for (std::size_t l : *word) {
        std::set<State> next;
        for (State q : states) next.insert(b.next(q, l));
        states = next;
      }
      CHECK(states.size() == 1);
    }
  }
}

TEST_CASE("unary case agrees with classical DFA synchronizability") {
  // For unary-only signatures the SyncDfa letters are exactly the DFA
  // letters, so a returned rule certifies a synchronizing word.
  Rng rng = make_rng(82);
  for (int i = 0; i < 30; ++i) {
    std::size_t n = 2 + uniform_below(rng, 4);
    std::vector<std::vector<State>> letters(2, std::vector<State>(n));
    for (auto& map : letters)
      for (auto& q : map) q = static_cast<State>(uniform_below(rng, n));
    std::vector<bool> acc(n, false);
    acc[uniform_below(rng, n)] = true;
    Dfta a = minimize(unary_dfta(n, letters, acc));
    if (a.num_states() < 2) continue;
    SyncDfa b = build_sync_dfa(a);
    auto rule = context_rule_exists(a);
    CHECK(rule.has_value() == subset_bfs_synchronizable(b));
    if (rule) CHECK(check_full(a, Trs{a.signature(), {*rule}}).consistent());
  }
}

TEST_CASE("context rules on binary-signature automata") {
  Rng rng = make_rng(83);
  Signature sig = parse_signature("f/2 a/0 b/0");
  int returned = 0;
  for (int i = 0; i < 25; ++i) {
    Dfta m = minimize(test::random_test_dfta(sig, 2 + uniform_below(rng, 3), rng));
    auto rule = context_rule_exists(m);
    if (!rule) continue;
    ++returned;
    CHECK(rule->rhs.ground());
    CHECK(check_full(m, Trs{sig, {*rule}}).consistent());
  }
  CHECK(returned >= 5);
}
