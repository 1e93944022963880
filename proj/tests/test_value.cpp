// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <random>

#include "peb/value.hpp"
#include "support.hpp"

using namespace peb;

namespace {

int sign(std::strong_ordering o) { return o < 0 ? -1 : (o > 0 ? 1 : 0); }

Value ints(std::initializer_list<std::int64_t> xs) {
  std::vector<Value> v;
  for (auto x : xs) v.push_back(Value::integer(x));
  return canonical_set(std::move(v));
}

}  // namespace

TEST_SUITE("value") {
  TEST_CASE("cross-kind rank puts symbols before booleans before integers") {
    CHECK(compare_values(Value::symbol("open"), Value::boolean(false)) < 0);
    CHECK(compare_values(Value::boolean(true), Value::integer(0)) < 0);
    CHECK(compare_values(Value::integer(3), Value::integer(3)) == 0);
    CHECK(compare_values(Value::integer(1000), Value::pair(Value::integer(0), Value::integer(0))) < 0);
    CHECK(compare_values(Value::pair(Value::integer(9), Value::integer(9)), Value::empty_set()) < 0);
  }

  TEST_CASE("orders within a kind") {
    CHECK(compare_values(Value::symbol("down"), Value::symbol("up")) < 0);
    CHECK(compare_values(Value::symbol("ab"), Value::symbol("b")) < 0);
    CHECK(compare_values(Value::symbol("a"), Value::symbol("ab")) < 0);
    CHECK(compare_values(Value::boolean(false), Value::boolean(true)) < 0);
    CHECK(compare_values(Value::integer(-5), Value::integer(2)) < 0);
    auto p = [](int a, int b) { return Value::pair(Value::integer(a), Value::integer(b)); };
    CHECK(compare_values(p(1, 9), p(2, 0)) < 0);
    CHECK(compare_values(p(1, 1), p(1, 2)) < 0);
    CHECK(compare_values(ints({1, 2}), ints({1, 2, 3})) < 0);
    CHECK(compare_values(ints({1, 3}), ints({1, 2, 3})) > 0);
    CHECK(compare_values(ints({}), ints({0})) < 0);
  }

  TEST_CASE("canonical_set sorts and removes duplicates") {
    CHECK(ints({2, 1, 2}) == ints({1, 2}));
    CHECK(ints({2, 1, 2}).size() == 2);
    CHECK(canonical_set({}).size() == 0);
    auto s = canonical_set({Value::symbol("up"), Value::symbol("down")});
    REQUIRE(s.size() == 2);
    CHECK(s.elements()[0] == Value::symbol("down"));
    CHECK(s.elements()[1] == Value::symbol("up"));
  }

  TEST_CASE("canonical_set rejects mixed scalar and pair elements") {
    CHECK_THROWS_AS(canonical_set({Value::integer(1), Value::pair(Value::integer(1), Value::integer(2))}),
                    KindMismatch);
    CHECK_THROWS_AS(canonical_set({ints({1})}), KindMismatch);
    CHECK_THROWS_AS(Value::pair(ints({1}), Value::integer(0)), KindMismatch);
  }

  TEST_CASE("sets of mixed scalar kinds are allowed and ordered by rank") {
    auto s = canonical_set({Value::integer(1), Value::symbol("z"), Value::boolean(true)});
    REQUIRE(s.size() == 3);
    CHECK(s.elements()[0].is_sym());
    CHECK(s.elements()[1].is_bool());
    CHECK(s.elements()[2].is_int());
  }

  TEST_CASE("rendering uses model syntax") {
    auto r = canonical_set({Value::pair(Value::integer(1), Value::symbol("emp")),
                            Value::pair(Value::integer(0), Value::symbol("ok"))});
    CHECK(to_string(r) == "{0 |-> ok, 1 |-> emp}");
    CHECK(to_string(Value::boolean(true)) == "TRUE");
    CHECK(to_string(Value::integer(-4)) == "-4");
  }

  TEST_CASE("compare_values is a strict total order on random triples") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 5000; ++i) {
      Value a = testing::random_value(rng);
      Value b = testing::random_value(rng);
      Value c = testing::random_value(rng);
      int ab = sign(compare_values(a, b));
      int ba = sign(compare_values(b, a));
      CHECK(ab == -ba);
      CHECK(sign(compare_values(a, a)) == 0);
      if (ab < 0 && sign(compare_values(b, c)) < 0) CHECK(sign(compare_values(a, c)) < 0);
      if (ab == 0) CHECK(a.hash() == b.hash());
    }
  }

  TEST_CASE("canonical_set is idempotent and permutation invariant") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 2000; ++i) {
      std::vector<Value> elems;
      int n = static_cast<int>(rng() % 7);
      bool pairs = rng() % 2;
      for (int k = 0; k < n; ++k) {
        elems.push_back(pairs ? Value::pair(testing::random_scalar(rng, 2), testing::random_scalar(rng, 0))
                              : testing::random_scalar(rng, static_cast<int>(rng() % 3)));
      }
      Value s = canonical_set(elems);
      std::vector<Value> again(s.elements().begin(), s.elements().end());
      CHECK(canonical_set(again) == s);
      std::shuffle(elems.begin(), elems.end(), rng);
      CHECK(canonical_set(elems) == s);
      auto e = s.elements();
      for (std::size_t k = 1; k < e.size(); ++k) CHECK(compare_values(e[k - 1], e[k]) < 0);
      for (const auto& x : elems) CHECK(s.contains(x));
    }
  }

  TEST_CASE("set equality coincides with equality of element sequences") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 2000; ++i) {
      Value a = testing::random_int_set(rng, 3);
      Value b = testing::random_int_set(rng, 3);
      auto ea = a.elements();
      auto eb = b.elements();
      bool same = std::equal(ea.begin(), ea.end(), eb.begin(), eb.end(),
                             [](const Value& x, const Value& y) { return x.as_int() == y.as_int(); });
      CHECK((a == b) == same);
    }
  }
}
