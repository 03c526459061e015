#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "treelearn/consistency.hpp"

using namespace treelearn;
using test::contains_a_dfta;
using test::eval_dfta;

static Rule rule_of(const std::string& l, const std::string& r, const Signature& sig) {
  return Rule(parse_term(l, sig), parse_term(r, sig));
}

TEST_CASE("acceptance order fixed point") {
  Dfta a = minimize(eval_dfta());
  AcceptanceOrder ord = acceptance_order(a);
  for (State p = 0; p < 2; ++p)
    for (State q = 0; q < 2; ++q) CHECK(ord.leq(p, q) == (p == q));

  Dfta c = minimize(contains_a_dfta());
  AcceptanceOrder cord = acceptance_order(c);
  State none = evaluate(c, parse_term("b", c.signature()));
  State has = evaluate(c, parse_term("a", c.signature()));
  CHECK(cord.leq(none, has));
  CHECK_FALSE(cord.leq(has, none));
  CHECK((cord.leq(none, none) && cord.leq(has, has)));

  Signature sig = parse_signature("f/2 a/0");
  Dfta one(sig, 1, {true}, {{0}, {0}});
  CHECK(acceptance_order(one).leq(0, 0));
}

TEST_CASE("order soundness over small contexts") {
  Rng rng = make_rng(31);
  Signature sig = parse_signature("f/2 g/1 a/0 b/0");
  for (int i = 0; i < 15; ++i) {
    Dfta m = minimize(test::random_test_dfta(sig, 2 + uniform_below(rng, 3), rng));
    AcceptanceOrder ord = acceptance_order(m);
    auto reps = state_representatives(m);
    // Every context of size <= 6 built from enumerated terms with one X.
    for (const auto& t : test::enumerate_trees(parse_signature("f/2 g/1 a/0 b/0 X/0"), 6)) {
      std::string s = t.str();
      if (std::count(s.begin(), s.end(), 'X') != 1) continue;
      Term ct = parse_term(s, sig);  // X re-parses as a variable
      if (ct.ground()) continue;
      Context c(ct);
      for (State p = 0; p < m.num_states(); ++p)
        for (State q = 0; q < m.num_states(); ++q)
          if (ord.leq(p, q) && accepts(m, plug(c, reps[p]))) CHECK(accepts(m, plug(c, reps[q])));
    }
  }
}

TEST_CASE("check_full on the boolean evaluator") {
  Dfta a = minimize(eval_dfta());
  const Signature& sig = a.signature();
  CHECK(check_full(a, Trs{sig, {rule_of("or(X,not(X))", "top", sig)}}).consistent());

  auto v = check_full(a, Trs{sig, {rule_of("and(X,Y)", "top", sig)}});
  REQUIRE(!v.consistent());
  CHECK(v.violation->witness == std::vector<State>{0, 0});
  CHECK(v.violation->lhs_state != v.violation->rhs_state);
  CHECK(a.accepting(v.violation->rhs_state));

  CHECK(check_full(a, Trs{sig, {}}).consistent());
  CHECK_THROWS_AS(check_full(a, Trs{sig, {rule_of("and(X,Y)", "top", sig)}}, 2),
                  BudgetExceeded);
}

TEST_CASE("check_positive and the order") {
  Dfta c = minimize(contains_a_dfta());
  const Signature& sig = c.signature();
  AcceptanceOrder ord = acceptance_order(c);
  CHECK(check_positive(c, Trs{sig, {rule_of("f(X,Y)", "a", sig)}}, ord).consistent());
  auto v = check_positive(c, Trs{sig, {rule_of("a", "b", sig)}}, ord);
  CHECK_FALSE(v.consistent());
  // Full consistency implies positive consistency.
  Dfta a = minimize(eval_dfta());
  Trs taut{a.signature(), {rule_of("or(X,not(X))", "top", a.signature())}};
  CHECK(check_positive(a, taut, acceptance_order(a)).consistent());
}

TEST_CASE("check_negative is positive on the complement") {
  Dfta c = minimize(contains_a_dfta());
  const Signature& sig = c.signature();
  CHECK(check_negative(c, Trs{sig, {rule_of("a", "b", sig)}}).consistent());
  CHECK_FALSE(check_negative(c, Trs{sig, {rule_of("b", "a", sig)}}).consistent());
  CHECK(check_negative(c, Trs{sig, {}}).consistent());

  // Duality, verdict for verdict, on random instances.
  Rng rng = make_rng(32);
  Signature rsig = parse_signature("f/2 a/0 b/0");
  for (int i = 0; i < 30; ++i) {
    Dfta m = minimize(test::random_test_dfta(rsig, 2 + uniform_below(rng, 3), rng));
    Term lhs = test::random_term(rsig, {"X"}, 5, rng);
    if (lhs.is_variable()) continue;
    Trs trs{rsig, {Rule(lhs, test::random_term(rsig, lhs.variables(), 5, rng))}};
    Dfta comp = minimize(complement(m));
    CHECK(check_negative(m, trs).consistent() ==
          check_positive(comp, trs, acceptance_order(comp)).consistent());
  }
}

TEST_CASE("fully consistent iff positively and negatively consistent") {
  Rng rng = make_rng(33);
  Signature sig = parse_signature("f/2 a/0 b/0");
  for (int i = 0; i < 60; ++i) {
    Dfta m = minimize(test::random_test_dfta(sig, 2 + uniform_below(rng, 3), rng));
    Term lhs = test::random_term(sig, {"X", "Y"}, 5, rng);
    if (lhs.is_variable()) continue;
    std::vector<std::string> rvars = lhs.variables();
    Term rhs = test::random_term(sig, rvars, 5, rng);
    Trs trs{sig, {Rule(lhs, rhs)}};
    bool full = check_full(m, trs).consistent();
    bool pos = check_positive(m, trs, acceptance_order(m)).consistent();
    bool neg = check_negative(m, trs).consistent();
    CHECK(full == (pos && neg));
  }
}

TEST_CASE("violation_to_tree_pair replays as a membership disagreement") {
  Dfta a = minimize(eval_dfta());
  const Signature& sig = a.signature();
  auto v = check_full(a, Trs{sig, {rule_of("and(X,Y)", "top", sig)}});
  REQUIRE(!v.consistent());
  auto [s, t] = violation_to_tree_pair(a, *v.violation);
  CHECK(s == parse_term("and(bot,bot)", sig));
  CHECK(t == parse_term("top", sig));
  CHECK(accepts(a, s) != accepts(a, t));

  // Positive variant: s accepted, t rejected.
  Dfta c = minimize(contains_a_dfta());
  auto pv = check_positive(c, Trs{c.signature(), {rule_of("a", "b", c.signature())}},
                           acceptance_order(c));
  REQUIRE(!pv.consistent());
  auto [ps, pt] = violation_to_tree_pair(c, *pv.violation, true);
  CHECK(accepts(c, ps));
  CHECK_FALSE(accepts(c, pt));
  CHECK(ps == parse_term("a", c.signature()));
  CHECK(pt == parse_term("b", c.signature()));
}

TEST_CASE("tree pair is one rewrite step apart") {
  Rng rng = make_rng(34);
  Signature sig = parse_signature("f/2 a/0 b/0");
  int seen = 0;
  for (int i = 0; i < 120 && seen < 25; ++i) {
    Dfta m = minimize(test::random_test_dfta(sig, 2 + uniform_below(rng, 4), rng));
    Term lhs = test::random_term(sig, {"X", "Y"}, 5, rng);
    if (lhs.is_variable()) continue;
    Trs trs{sig, {Rule(lhs, test::random_term(sig, lhs.variables(), 5, rng))}};
    auto v = check_full(m, trs);
    if (v.consistent()) continue;
    ++seen;
    auto [s, t] = violation_to_tree_pair(m, *v.violation);
    CHECK(accepts(m, s) != accepts(m, t));
    auto succ = rewrite_once(trs, s);
    CHECK(std::find(succ.begin(), succ.end(), t) != succ.end());
  }
  CHECK(seen >= 25);
}

TEST_CASE("state_count preimage cardinalities") {
  Dfta a = minimize(eval_dfta());
  const Signature& sig = a.signature();
  State q_top = evaluate(a, parse_term("top", sig));
  State q_bot = evaluate(a, parse_term("bot", sig));

  auto conj = state_count(a, parse_term("and(X,Y)", sig));
  CHECK(conj.arity == 2);
  CHECK(conj.counts[q_top] == 1);
  CHECK(conj.counts[q_bot] == 3);

  auto top = state_count(a, parse_term("top", sig));
  CHECK(top.counts[q_top] == 1);
  CHECK(top.counts[q_bot] == 0);

  auto var = state_count(a, Term::variable("X"));
  CHECK(var.counts == std::vector<std::uint64_t>{1, 1});

  CHECK_THROWS_AS(state_count(a, parse_term("and(X,X)", sig)), std::invalid_argument);
}

TEST_CASE("count mass totals |Q|^k") {
  Rng rng = make_rng(35);
  Signature sig = parse_signature("f/2 g/1 a/0 b/0");
  for (int i = 0; i < 40; ++i) {
    Dfta m = minimize(test::random_test_dfta(sig, 2 + uniform_below(rng, 4), rng));
    Term t = test::random_term(sig, {"X", "Y", "Z"}, 7, rng);
    if (!t.linear()) continue;
    auto sc = state_count(m, t);
    std::uint64_t total = 0, expect = 1;
    for (auto c : sc.counts) total += c;
    for (std::size_t j = 0; j < sc.arity; ++j) expect *= m.num_states();
    CHECK(total == expect);
    // Cross-check against the explicit transformation table.
    auto tr = transformation(m, t);
    std::vector<std::uint64_t> direct(m.num_states(), 0);
    for (State q : tr.table) ++direct[q];
    CHECK(sc.counts == direct);
  }
}

TEST_CASE("cumulative_count") {
  Dfta c = minimize(contains_a_dfta());
  AcceptanceOrder ord = acceptance_order(c);
  State none = evaluate(c, parse_term("b", c.signature()));
  State has = evaluate(c, parse_term("a", c.signature()));
  StateCount sc;
  sc.arity = 2;
  sc.counts.assign(2, 0);
  sc.counts[none] = 3;
  sc.counts[has] = 1;
  auto cum = cumulative_count(sc, ord);
  CHECK(cum.counts[none] == 4);
  CHECK(cum.counts[has] == 1);

  // Identity order leaves counts unchanged.
  Dfta a = minimize(eval_dfta());
  StateCount id;
  id.arity = 1;
  id.counts = {1, 1};
  CHECK(cumulative_count(id, acceptance_order(a)).counts == id.counts);

  StateCount zero;
  zero.arity = 0;
  zero.counts = {0, 0};
  CHECK(cumulative_count(zero, ord).counts == std::vector<std::uint64_t>{0, 0});
}

TEST_CASE("heuristic_filter") {
  Dfta a = minimize(eval_dfta());
  const Signature& sig = a.signature();
  CHECK(heuristic_filter(a, rule_of("and(X,Y)", "or(X,Y)", sig), ConsistencyMode::Full) ==
        HeuristicVerdict::DefinitelyInconsistent);
  // Ground rhs fast path is exact.
  CHECK(heuristic_filter(a, rule_of("or(X,top)", "top", sig), ConsistencyMode::Full) ==
        HeuristicVerdict::Consistent);
  CHECK_THROWS_AS(heuristic_filter(a, rule_of("and(X,X)", "top", sig), ConsistencyMode::Full),
                  std::invalid_argument);
}

TEST_CASE("heuristic necessity: consistent rules never flagged") {
  Rng rng = make_rng(36);
  Signature sig = parse_signature("f/2 a/0 b/0");
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    Dfta m = minimize(test::random_test_dfta(sig, 2 + uniform_below(rng, 3), rng));
    Term lhs = test::random_term(sig, {"X", "Y"}, 5, rng);
    if (lhs.is_variable() || !lhs.linear()) continue;
    Term rhs = test::random_term(sig, lhs.variables(), 5, rng);
    if (!rhs.linear()) continue;
    Rule rule(lhs, rhs);
    AcceptanceOrder ord = acceptance_order(m);
    if (check_full(m, Trs{sig, {rule}}).consistent()) {
      ++checked;
      CHECK(heuristic_filter(m, rule, ConsistencyMode::Full) !=
            HeuristicVerdict::DefinitelyInconsistent);
    }
    if (check_positive(m, Trs{sig, {rule}}, ord).consistent())
      CHECK(heuristic_filter(m, rule, ConsistencyMode::Positive, &ord) !=
            HeuristicVerdict::DefinitelyInconsistent);
  }
  CHECK(checked >= 20);
}
