// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "peb/smc.hpp"
#include "support.hpp"

using namespace peb;

namespace {

const char* kCoin = R"(
CONTEXT C SETS S : {a, b, none} END
MACHINE Coin SEES C
 VARIABLES x
 INVARIANTS x : S
 INITIALISATION x := none
EVENT flip
  WHERE x = none
  THEN x := {a @ 0.3, b @ 0.7}
END
)";

/// Two-step chain: reaches `done` after the first step with probability 1.
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

TEST_SUITE("smc") {
  TEST_CASE("Student-t half width") {
    // t quantile 0.975 with 9 degrees of freedom is 2.2621571628.
    CHECK(t_half_width(4.0, 10, 0.05) == doctest::Approx(2.2621571628 * std::sqrt(0.4)).epsilon(1e-9));
    // 99 degrees of freedom at 0.995: 2.6264054563.
    CHECK(t_half_width(1.0, 100, 0.01) == doctest::Approx(2.6264054563 * 0.1).epsilon(1e-9));
    CHECK(t_half_width(0.0, 10, 0.05) == 0.0);
    CHECK(std::isinf(t_half_width(1.0, 1, 0.05)));
  }

  TEST_CASE("a certain predicate converges after one batch") {
    auto m = testing::load_file("gear.peb");
    Semantics sem(m);
    EstimateOptions o;
    o.seed = 3;
    auto e = estimate(sem, make_query(*m, "TRUE"), o);
    CHECK(e.mean == 1.0);
    CHECK(e.half_width == 0.0);
    CHECK(e.runs == o.batch);
    CHECK(e.converged);
    CHECK(e.kind == QueryKind::ProbAtEnd);
  }

  TEST_CASE("gear door is closed at every deadlock") {
    auto m = testing::load_file("gear.peb");
    Semantics sem(m);
    EstimateOptions o;
    o.seed = 11;
    auto e = estimate(sem, make_query(*m, "door_open"), o);
    CHECK(e.mean == 0.0);
    CHECK(e.half_width == 0.0);
  }

  TEST_CASE("ProbReachWithin on a two-state chain") {
    auto m = testing::load_text(kChain);
    Semantics sem(m);
    EstimateOptions o;
    auto e = estimate(sem, make_query(*m, "k = 1", 1), o);
    CHECK(e.kind == QueryKind::ProbReachWithin);
    CHECK(e.mean == 1.0);
    auto never = estimate(sem, make_query(*m, "k = 1", 0), o);
    CHECK(never.mean == 0.0);
  }

  TEST_CASE("the estimate is the sample mean of independently seeded runs") {
    auto m = testing::load_file("p2p.peb", {{"N", "2"}, {"K", "2"}});
    Semantics sem(m);
    Simulator sim(sem);
    auto q = make_query(*m, "transmissions");
    EstimateOptions o;
    o.seed = 17;
    o.batch = 20;
    o.max_runs = 60;
    o.delta = 1e-9;
    o.keep_samples = true;
    auto e = estimate(sem, q, o);
    REQUIRE(e.runs == 60);
    REQUIRE(e.samples.size() == 60);
    double sum = 0;
    for (std::uint64_t i = 0; i < 60; ++i) {
      Trace t = sim.run({derive_seed(17, i), o.max_steps, nullptr});
      double v = eval_query(sem, t, q);
      CHECK(e.samples[i] == v);
      sum += v;
    }
    CHECK(e.mean == doctest::Approx(sum / 60).epsilon(1e-12));
    double ss = 0;
    for (double v : e.samples) ss += (v - sum / 60) * (v - sum / 60);
    CHECK(e.variance == doctest::Approx(ss / 59).epsilon(1e-9));
    CHECK_FALSE(e.converged);
  }

  TEST_CASE("results do not depend on the number of jobs") {
    auto m = testing::load_file("p2p.peb", {{"N", "2"}, {"K", "3"}});
    Semantics sem(m);
    auto q = make_query(*m, "transmissions");
    EstimateOptions o;
    o.seed = 5;
    o.max_runs = 300;
    o.delta = 1e-9;
    auto one = estimate(sem, q, o);
    o.jobs = 4;
    auto four = estimate(sem, q, o);
    CHECK(to_json(one, false) == to_json(four, false));
  }

  TEST_CASE("stopping rule honours min_runs and max_runs") {
    auto m = testing::load_text(kCoin);
    Semantics sem(m);
    auto q = make_query(*m, "x = a");
    EstimateOptions o;
    o.delta = 0.5;
    auto loose = estimate(sem, q, o);
    CHECK(loose.runs == 100);
    o.min_runs = 350;
    auto more = estimate(sem, q, o);
    CHECK(more.runs == 400);
    o.delta = 1e-6;
    o.min_runs = 0;
    o.max_runs = 250;
    auto capped = estimate(sem, q, o);
    CHECK(capped.runs == 250);
    CHECK_FALSE(capped.converged);
  }

  TEST_CASE("invalid options are rejected") {
    auto m = testing::load_text(kCoin);
    Semantics sem(m);
    auto q = make_query(*m, "x = a");
    EstimateOptions o;
    o.alpha = 0;
    CHECK_THROWS_AS(estimate(sem, q, o), std::invalid_argument);
    o = {};
    o.delta = 0;
    CHECK_THROWS_AS(estimate(sem, q, o), std::invalid_argument);
    o = {};
    o.jobs = 0;
    CHECK_THROWS_AS(estimate(sem, q, o), std::invalid_argument);
  }

  TEST_CASE("intervals cover the true probability at about the nominal rate") {
    auto m = testing::load_text(kCoin);
    Semantics sem(m);
    auto q = make_query(*m, "x = a");
    EstimateOptions o;
    o.delta = 1e-9;
    o.max_runs = 200;
    int covered = 0;
    const int trials = 400;
    for (int seed = 0; seed < trials; ++seed) {
      o.seed = static_cast<std::uint64_t>(seed);
      auto e = estimate(sem, q, o);
      covered += std::abs(e.mean - 0.3) <= e.half_width;
    }
    // Binomial(400, 0.95): mean 380, sd 4.4.
    CHECK(covered >= 362);
  }

  TEST_CASE("step-bounded runs are counted as truncated") {
    auto m = testing::load_file("p2p.peb", {{"N", "2"}, {"K", "2"}});
    Semantics sem(m);
    EstimateOptions o;
    o.max_steps = 2;
    o.max_runs = 100;
    auto e = estimate(sem, make_query(*m, "transmissions"), o);
    CHECK(e.truncated_runs == 100);
    CHECK(e.mean <= 2.0);
  }

  TEST_CASE("JSON output and sample exports") {
    auto m = testing::load_text(kCoin);
    Semantics sem(m);
    EstimateOptions o;
    o.keep_samples = true;
    o.delta = 1.0;
    auto e = estimate(sem, make_query(*m, "x = a"), o);
    auto j = to_json(e);
    for (const char* key : {"query", "kind", "mean", "half_width", "confidence", "runs", "seed", "rng", "wall_time"}) {
      CHECK(j.contains(key));
    }
    CHECK(j["rng"] == "mt19937_64");
    CHECK_FALSE(to_json(e, false).contains("wall_time"));
    std::ostringstream csv;
    write_samples_csv(csv, e);
    CHECK(csv.str().rfind("run,value\n0,", 0) == 0);
    std::ostringstream hist;
    write_histogram(hist, e, 2);
    std::istringstream in(hist.str());
    std::string header;
    std::getline(in, header);
    double c0, c1;
    std::uint64_t n0, n1;
    in >> c0 >> n0 >> c1 >> n1;
    CHECK(n0 + n1 == e.runs);
    CHECK(static_cast<double>(n1) == doctest::Approx(e.mean * static_cast<double>(e.runs)));
  }
}
