// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <map>
#include <sstream>
#include <unordered_map>

#include "peb/exact.hpp"
#include "peb/smc.hpp"
#include "support.hpp"

using namespace peb;

namespace {

using StateMap = std::unordered_map<MachineState, Rational, MachineStateHash>;

/// Distribution after `k` steps by direct propagation over successor_distribution.
StateMap propagate(const Semantics& sem, std::uint64_t k) {
  StateMap p;
  p[sem.initial_state()] = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    StateMap next;
    for (const auto& [s, m] : p) {
      auto d = sem.successor_distribution(s);
      if (d.deadlock()) {
        next[s] += m;
        continue;
      }
      for (const auto& t : d.entries) next[t.target] += m * t.mass;
    }
    p = std::move(next);
  }
  return p;
}

/// Expected end value by dense Gauss-Jordan over the reachable states.
Rational absorption_oracle(const Semantics& sem, const Query& q) {
  std::vector<MachineState> states{sem.initial_state()};
  std::unordered_map<MachineState, std::size_t, MachineStateHash> idx{{states[0], 0}};
  std::vector<TransitionDistribution> dist;
  for (std::size_t i = 0; i < states.size(); ++i) {
    dist.push_back(sem.successor_distribution(states[i]));
    for (const auto& t : dist.back().entries) {
      if (idx.emplace(t.target, states.size()).second) states.push_back(t.target);
    }
  }
  const std::size_t n = states.size();
  // x_s = value(s) for deadlocks, x_s - sum T(s, s') x_s' = 0 otherwise.
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = 1;
    if (dist[i].deadlock()) {
      a[i][n] = state_value_exact(sem, q, states[i]);
    } else {
      for (const auto& t : dist[i].entries) a[i][idx.at(t.target)] -= t.mass;
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (a[p][c] == 0) ++p;
    std::swap(a[p], a[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      Rational f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return a[0][n] / a[0][0];
}

const char* kBlocked = R"(
MACHINE Stuck
 VARIABLES x
 INVARIANTS x : Nat
 INITIALISATION x := 0
EVENT go
  WHERE x > 5
  THEN x := 0
END
)";

const char* kToggle = R"(
MACHINE Toggle
 VARIABLES x
 INVARIANTS x : Nat
 INITIALISATION x := 0
EVENT flip
  THEN x := 1 - x
END
)";

const char* kChain = R"(
MACHINE Chain
 VARIABLES k
 INVARIANTS k : Nat
 INITIALISATION k := 0
EVENT go
  WHERE k < 1
  THEN k := k + 1
END
)";

}  // namespace

TEST_SUITE("exact") {
  TEST_CASE("gear reachable chain and end-state probabilities") {
    auto m = testing::load_file("gear.peb");
    Semantics sem(m);
    CHECK(find_accumulators(*m).empty());
    auto d = build_dtmc(sem);
    CHECK(d.states[0] == sem.initial_state());
    CHECK(exact_query(sem, d, make_query(*m, "door_open")) == 0);
    auto q = make_query(*m, "gear_retracted");
    Rational p = exact_query(sem, d, q);
    CHECK(p == absorption_oracle(sem, q));
    CHECK(p == Rational("14826074143/29355316036", 10));
  }

  TEST_CASE("single-block P2P matches the hand-built chain") {
    auto m = testing::load_file("p2p.peb", {{"N", "1"}, {"K", "1"}});
    Semantics sem(m);
    auto q = make_query(*m, "transmissions");
    auto accs = accumulators_for(*m, &q);
    REQUIRE(accs == std::vector<std::size_t>{*m->variable_index("n")});
    auto d = build_dtmc(sem, {1000, accs});
    // emp, downloading, ok.
    REQUIRE(d.size() == 3);
    auto file = [&](std::size_t s) { return to_string(d.states[s].values[*m->variable_index("file")]); };
    CHECK(file(0) == "{0 |-> emp}");
    CHECK(file(1) == "{0 |-> downloading}");
    CHECK(file(2) == "{0 |-> ok}");
    CHECK(d.deadlock == std::vector<bool>{false, false, true});
    auto sent = *m->event_index("sent");
    auto receive = *m->event_index("receive");
    auto fail = *m->event_index("fail");
    REQUIRE(d.transitions[0].size() == 1);
    CHECK(d.transitions[0][0].event == sent);
    CHECK(d.transitions[0][0].target == 1);
    CHECK(d.transitions[0][0].mass == 1);
    CHECK(d.transitions[0][0].reward == std::vector<Rational>{1});
    std::map<std::pair<std::size_t, std::size_t>, Rational> row;
    for (const auto& t : d.transitions[1]) row[{t.event, t.target}] = t.mass;
    std::map<std::pair<std::size_t, std::size_t>, Rational> expected = {
        {{receive, 2}, Rational(1, 2)}, {{fail, 1}, Rational(3, 10)}, {{fail, 0}, Rational(1, 5)}};
    CHECK(row == expected);
    // T = 1 + (2/7) T.
    CHECK(exact_query(sem, d, q) == Rational(7, 5));
    CHECK(exact_query(sem, d, make_query(*m, "done")) == 1);
  }

  TEST_CASE("an unbounded counter hits the state bound unless abstracted") {
    auto m = testing::load_file("p2p.peb", {{"N", "1"}, {"K", "1"}});
    Semantics sem(m);
    CHECK_THROWS_AS(build_dtmc(sem, {100, {}}), StateBound);
  }

  TEST_CASE("accumulator detection") {
    auto p2p = testing::load_file("p2p.peb", {{"N", "2"}, {"K", "2"}});
    CHECK(find_accumulators(*p2p) == std::vector<std::size_t>{*p2p->variable_index("n")});
    auto n_sq = make_query(*p2p, "n * n");
    CHECK(accumulators_for(*p2p, &n_sq).empty());
    auto twice = make_query(*p2p, "2 * n + 1");
    CHECK(accumulators_for(*p2p, &twice).size() == 1);
    auto done = make_query(*p2p, "done");
    CHECK(accumulators_for(*p2p, &done).size() == 1);
  }

  TEST_CASE("linear counter queries match the unabstracted chain") {
    auto m = testing::load_file("p2p.peb", {{"N", "1"}, {"K", "1"}});
    Semantics sem(m);
    auto q = make_query(*m, "2 * n - 1");
    auto d = build_dtmc(sem, {1000, accumulators_for(*m, &q)});
    CHECK(exact_query(sem, d, q) == Rational(9, 5));
    // Horizon answers agree with direct propagation over the concrete states.
    for (std::uint64_t h : {0u, 1u, 2u, 5u}) {
      Rational expected = 0;
      for (const auto& [s, p] : propagate(sem, h)) expected += p * state_value_exact(sem, q, s);
      CHECK(exact_query(sem, d, q, h) == expected);
    }
  }

  TEST_CASE("a blocked machine is a single deadlock state") {
    auto m = testing::load_text(kBlocked);
    Semantics sem(m);
    auto d = build_dtmc(sem);
    CHECK(d.size() == 1);
    CHECK(d.transition_count() == 0);
    CHECK(exact_query(sem, d, make_query(*m, "x")) == 0);
  }

  TEST_CASE("bounded reachability") {
    auto m = testing::load_text(kChain);
    Semantics sem(m);
    auto d = build_dtmc(sem);
    CHECK(d.size() == 2);
    CHECK(exact_query(sem, d, make_query(*m, "k = 1", 1)) == 1);
    CHECK(exact_query(sem, d, make_query(*m, "k = 1", 0)) == 0);
    CHECK(exact_query(sem, d, make_query(*m, "k = 0", 0)) == 1);
  }

  TEST_CASE("end-state queries need absorption") {
    auto m = testing::load_text(kToggle);
    Semantics sem(m);
    auto d = build_dtmc(sem);
    CHECK(d.size() == 2);
    CHECK_THROWS_AS(exact_query(sem, d, make_query(*m, "x")), NoAbsorption);
    CHECK(exact_query(sem, d, make_query(*m, "x"), 3) == 1);
    CHECK(exact_query(sem, d, make_query(*m, "x"), 4) == 0);
  }

  TEST_CASE("random models: rows are distributions and horizons match propagation") {
    std::mt19937_64 rng(61);
    for (int i = 0; i < 30; ++i) {
      auto m = testing::load_text(testing::random_model_source(rng));
      Semantics sem(m);
      auto d = build_dtmc(sem);
      for (std::size_t s = 0; s < d.size(); ++s) {
        Rational total = 0;
        for (const auto& t : d.transitions[s]) total += t.mass;
        CHECK(total == (d.deadlock[s] ? 0 : 1));
      }
      auto q = make_query(*m, "x + 2 * y");
      auto horizon = 1 + rng() % 12;
      Rational expected = 0;
      for (const auto& [s, p] : propagate(sem, horizon)) expected += p * state_value_exact(sem, q, s);
      CHECK(exact_query(sem, d, q, horizon) == expected);
      auto reach = make_query(*m, "x = 0 /\\ y = 0", horizon);
      Rational r = exact_query(sem, d, reach);
      CHECK(r >= 0);
      CHECK(r <= 1);
    }
  }

  TEST_CASE("absorption solve agrees with a dense solve") {
    std::mt19937_64 rng(62);
    int solved = 0;
    for (int i = 0; i < 60 && solved < 15; ++i) {
      auto m = testing::load_text(testing::random_model_source(rng));
      Semantics sem(m);
      auto d = build_dtmc(sem);
      auto q = make_query(*m, "x");
      Rational got;
      try {
        got = exact_query(sem, d, q);
      } catch (const NoAbsorption&) {
        continue;
      }
      CHECK(got == absorption_oracle(sem, q));
      ++solved;
    }
    CHECK(solved >= 5);
  }

  TEST_CASE("exact and statistical answers agree") {
    auto m = testing::load_file("p2p.peb", {{"N", "2"}, {"K", "2"}});
    Semantics sem(m);
    auto q = make_query(*m, "transmissions");
    auto d = build_dtmc(sem, {100000, accumulators_for(*m, &q)});
    double exact = exact_query(sem, d, q).get_d();
    EstimateOptions o;
    o.seed = 2;
    o.delta = 0.5;
    auto e = estimate(sem, q, o);
    CHECK(std::abs(e.mean - exact) <= e.half_width);
  }

  TEST_CASE("exports") {
    auto m = testing::load_file("p2p.peb", {{"N", "1"}, {"K", "1"}});
    Semantics sem(m);
    auto d = build_dtmc(sem, {1000, find_accumulators(*m)});
    std::ostringstream tra, sta, dot;
    export_tra(tra, sem, d);
    export_sta(sta, sem, d);
    export_dot(dot, sem, d);
    std::istringstream in(tra.str());
    std::size_t states = 0, transitions = 0;
    in >> states >> transitions;
    CHECK(states == 3);
    CHECK(transitions == 4);
    std::size_t lines = 0;
    for (char c : tra.str()) lines += c == '\n';
    CHECK(lines == 5);
    CHECK(sta.str().find("0 file={0 |-> emp}") == 0);
    CHECK(sta.str().find("n=") == std::string::npos);
    CHECK(dot.str().rfind("digraph dtmc {", 0) == 0);
    CHECK(dot.str().find("peripheries=2") != std::string::npos);
  }
}
