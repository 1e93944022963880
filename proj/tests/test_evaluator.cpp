// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "algebra.hpp"
#include "peb/evaluator.hpp"
#include "peb/parser.hpp"
#include "support.hpp"

using namespace peb;

namespace {

using Bindings = std::vector<std::pair<std::string, Value>>;

/// Evaluates with the symbols used below in scope, as a model's deferred
/// sets would provide them.
Value ev(const std::string& text, const Bindings& bindings = {}) {
  Bindings all = bindings;
  for (const char* sym : {"a", "b", "c", "emp", "ok", "downloading"}) all.emplace_back(sym, Value::symbol(sym));
  return evaluate_text(text, all);
}

std::string show(const std::string& text, const Bindings& bindings = {}) {
  return to_string(ev(text, bindings));
}

/// Binds names without a static type, so kind errors surface at run time.
Value ev_untyped(const std::string& text, const Bindings& bindings) {
  auto parsed = parse_expression(text);
  REQUIRE(parsed.expr);
  std::unordered_map<std::string, NameInfo> names;
  std::vector<Value> values;
  for (const auto& [name, value] : bindings) {
    NameInfo info;
    info.kind = RefKind::Constant;
    info.index = static_cast<std::uint32_t>(values.size());
    names[name] = info;
    values.push_back(value);
  }
  std::vector<Diagnostic> diags;
  auto resolved = resolve_with_names(parsed.expr, names, diags);
  REQUIRE(resolved);
  return eval(*resolved, Env{values, {}, {}});
}

template <class F>
ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const EvalError& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Unbound;
}

ErrorKind error_of(const std::string& text) {
  return error_kind([&] { ev(text); });
}

ErrorKind untyped_error_of(const std::string& text, const Bindings& bindings) {
  return error_kind([&] { ev_untyped(text, bindings); });
}

}  // namespace

TEST_SUITE("evaluator") {
  TEST_CASE("intervals") {
    CHECK(show("1 .. 3") == "{1, 2, 3}");
    CHECK(show("3 .. 1") == "{}");
    CHECK(show("card(0 .. 9)") == "10");
  }

  TEST_CASE("relational operators") {
    CHECK(show("{1 |-> a, 2 |-> b} <+ {2 |-> c}") == "{1 |-> a, 2 |-> c}");
    CHECK(show("{1 |-> emp, 2 |-> ok, 3 |-> emp} |> {emp}") == "{1 |-> emp, 3 |-> emp}");
    CHECK(show("{1 |-> emp, 2 |-> ok, 3 |-> emp} |>> {emp}") == "{2 |-> ok}");
    CHECK(show("{1} <<| {1 |-> a, 2 |-> b}") == "{2 |-> b}");
    CHECK(show("{1} <| {1 |-> a, 2 |-> b}") == "{1 |-> a}");
    CHECK(show("dom({1 |-> a, 2 |-> a})") == "{1, 2}");
    CHECK(show("ran({1 |-> a, 2 |-> a})") == "{a}");
    CHECK(show("(0 .. 1) * {emp}") == "{0 |-> emp, 1 |-> emp}");
  }

  TEST_CASE("comprehensions") {
    Value file = ev("{0 |-> emp, 1 |-> emp, 2 |-> ok}");
    CHECK(show("{x . dom(file |> {emp}) | (x mod 2) = 0}", {{"file", file}}) == "{0}");
    CHECK(show("{x . 0 .. 5 | x mod 3}") == "{0, 1, 2}");
    CHECK(show("{x . 1 .. 3 | x |-> x * x}") == "{1 |-> 1, 2 |-> 4, 3 |-> 9}");
    // Nested, capturing the outer binder.
    CHECK(show("{x . 0 .. 3 | x /: {y . 0 .. x | y * 2}}") == "{1, 3}");
    CHECK(show("{x . 0 .. 2 | card({y . 0 .. 2 | y < x}) = 1}") == "{1}");
  }

  TEST_CASE("the nested P2P domain") {
    Value file = ev("{0 |-> downloading, 1 |-> emp, 2 |-> emp, 3 |-> ok}");
    std::vector<std::pair<std::string, Value>> b = {{"file", file}, {"N", Value::integer(2)}};
    CHECK(show("{x . dom(file |> {emp}) | (x mod N) /: {y . dom(file |> {downloading}) | y mod N}}", b) ==
          "{1}");
  }

  TEST_CASE("arithmetic and logic") {
    CHECK(show("7 div 2") == "3");
    CHECK(show("-7 div 2") == "-4");
    CHECK(show("-7 mod 2") == "1");
    CHECK(show("2 + 3 * 4 - 1") == "13");
    CHECK(show("1 < 2 /\\ not(3 <= 2)") == "TRUE");
    CHECK(show("FALSE => 1 div 0 = 0") == "TRUE");
    CHECK(show("card({})") == "0");
    CHECK(show("min({3, 1, 2}) + max({3, 1, 2})") == "4");
  }

  TEST_CASE("membership and subsets, including infinite carriers") {
    CHECK(show("3 : Nat") == "TRUE");
    CHECK(show("-1 : NAT") == "FALSE");
    CHECK(show("0 : Nat1") == "FALSE");
    CHECK(show("{1 |-> a} : POW(Nat * {a, b})") == "TRUE");
    CHECK(show("{1 |-> c} <: Nat * {a, b}") == "FALSE");
    CHECK(show("{1, 2} <<: {1, 2}") == "FALSE");
    CHECK(show("{1} /<: {2}") == "TRUE");
    CHECK(show("({1, 2} \\/ {3}) = 1 .. 3") == "TRUE");
    CHECK(show("{1, 2} /\\ {2, 3}") == "{2}");
    CHECK(show("{1, 2} \\ {2, 3}") == "{1}");
  }

  TEST_CASE("runtime errors") {
    CHECK(error_of("1 div 0") == ErrorKind::DivisionByZero);
    CHECK(error_of("1 mod 0") == ErrorKind::DivisionByZero);
    CHECK(error_of("9223372036854775807 + 1") == ErrorKind::IntegerOverflow);
    CHECK(untyped_error_of("card(x)", {{"x", Value::integer(1)}}) == ErrorKind::KindMismatch);
    CHECK(untyped_error_of("x + 1", {{"x", ev("{1}")}}) == ErrorKind::KindMismatch);
    CHECK(error_of("min({})") == ErrorKind::EmptyChoice);
    CHECK(error_of("card(Nat)") == ErrorKind::InfiniteSet);
    CHECK(error_of("5 mod -2") == ErrorKind::InvalidOperation);
  }

  TEST_CASE("errors carry the span of the failing node") {
    try {
      ev("1 + (2 div 0)");
      FAIL("expected an error");
    } catch (const EvalError& e) {
      CHECK(e.span().column == 6);
    }
  }

  TEST_CASE("results are canonical") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 500; ++i) {
      Value a = testing::random_int_set(rng);
      Value r = testing::random_relation(rng);
      for (const char* text : {"{x . A | x * 2 mod 5}", "A \\/ {x . A | x + 1}", "ran(r) \\/ {a}", "dom(r <+ {3 |-> b})"}) {
        Value v = ev(text, {{"A", a}, {"r", r}});
        auto e = v.elements();
        for (std::size_t k = 1; k < e.size(); ++k) CHECK(compare_values(e[k - 1], e[k]) < 0);
      }
    }
  }

  TEST_CASE("algebraic laws hold on random small values") {
    testing::AlgebraSuite suite;
    auto report = suite.run(2000, 32);
    for (const auto& f : report.failures) FAIL_CHECK(f);
    CHECK(report.checks >= 2000);
  }

  TEST_CASE("evaluation leaves the environment untouched") {
    std::vector<Value> constants = {ev("{1 |-> 10, 2 |-> 20}")};
    std::vector<Value> before = constants;
    auto parsed = parse_expression("{x . dom(k) | x > 1} \\/ dom(k <+ {5 |-> 50})");
    REQUIRE(parsed.expr);
    std::unordered_map<std::string, NameInfo> names;
    NameInfo info;
    info.kind = RefKind::Constant;
    info.index = 0;
    info.type = type_of(constants[0]);
    names["k"] = info;
    std::vector<Diagnostic> diags;
    auto resolved = resolve_with_names(parsed.expr, names, diags);
    REQUIRE(resolved);
    Env env{constants, {}, {}};
    CHECK(to_string(eval(*resolved, env)) == "{1, 2, 5}");
    CHECK(constants == before);
  }

  TEST_CASE("constant subtrees are folded without changing results") {
    auto m = testing::load_file("p2p.peb", {{"N", "2"}, {"K", "2"}});
    const Event& sent = m->events()[0];
    CHECK(sent.weight->args[0]->folded);  // N * K
    CHECK_FALSE(sent.weight->folded);
  }
}
