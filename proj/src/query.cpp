// SPDX-License-Identifier: Apache-2.0

#include "peb/query.hpp"

namespace peb {

const char* to_string(QueryKind k) {
  switch (k) {
    case QueryKind::ExpectedAtEnd: return "ExpectedAtEnd";
    case QueryKind::ProbAtEnd: return "ProbAtEnd";
    case QueryKind::ProbReachWithin: return "ProbReachWithin";
  }
  return "?";
}

Query make_query(const CheckedModel& model, const std::string& text, std::optional<std::uint64_t> within) {
  Query q;
  q.text = text;
  if (const Property* p = model.property(text)) {
    q.expr = p->expr;
  } else {
    auto parsed = parse_expression(text, "<query>");
    if (!parsed.expr) throw QueryError("query '" + text + "' does not parse", parsed.diagnostics);
    std::vector<Diagnostic> diags;
    q.expr = resolve_expression(model, parsed.expr, diags);
    if (!q.expr) throw QueryError("query '" + text + "' is not well-formed", diags);
  }
  const Type& t = q.expr->type;
  if (within) {
    if (t.known() && t.tag != Type::Tag::Bool) {
      throw QueryError("--within needs a predicate, but '" + text + "' has type " + to_string(t));
    }
    q.kind = QueryKind::ProbReachWithin;
    q.within = *within;
  } else if (t.tag == Type::Tag::Bool) {
    q.kind = QueryKind::ProbAtEnd;
  } else if (t.tag == Type::Tag::Int || !t.known()) {
    q.kind = QueryKind::ExpectedAtEnd;
  } else {
    throw QueryError("query '" + text + "' has type " + to_string(t) + "; expected a number or a predicate");
  }
  return q;
}

namespace {

Value raw(const Semantics& sem, const Query& q, const MachineState& s) {
  Value v = eval(*q.expr, sem.env(s));
  if (!v.is_int() && !v.is_bool()) {
    throw EvalError(ErrorKind::KindMismatch, "query value " + to_string(v) + " is not numeric",
                    q.expr->span);
  }
  return v;
}

}  // namespace

double state_value(const Semantics& sem, const Query& q, const MachineState& s) {
  Value v = raw(sem, q, s);
  return v.is_bool() ? (v.as_bool() ? 1.0 : 0.0) : static_cast<double>(v.as_int());
}

Rational state_value_exact(const Semantics& sem, const Query& q, const MachineState& s) {
  Value v = raw(sem, q, s);
  if (v.is_bool()) return v.as_bool() ? 1 : 0;
  return Rational(mpz_class(static_cast<long>(v.as_int())));
}

bool state_holds(const Semantics& sem, const Query& q, const MachineState& s) {
  Value v = raw(sem, q, s);
  if (!v.is_bool()) throw EvalError(ErrorKind::KindMismatch, "query is not a predicate", q.expr->span);
  return v.as_bool();
}

}  // namespace peb
