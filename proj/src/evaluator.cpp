// SPDX-License-Identifier: Apache-2.0

#include "peb/evaluator.hpp"

#include <algorithm>
#include <iterator>
#include <limits>
#include <unordered_set>

#include "peb/parser.hpp"

namespace peb {

namespace {

constexpr std::int64_t kMaxInterval = 10'000'000;

[[noreturn]] void fail(ErrorKind kind, const Expr& at, const std::string& msg) {
  throw EvalError(kind, msg, at.span);
}

bool less(const Value& a, const Value& b) { return compare_values(a, b) < 0; }

Value make_sorted(std::vector<Value> v) { return Value::set_from_sorted(std::move(v)); }

Value set_union(const Value& a, const Value& b) {
  auto x = a.elements();
  auto y = b.elements();
  if (x.empty()) return b;
  if (y.empty()) return a;
  std::vector<Value> out;
  out.reserve(x.size() + y.size());
  std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out), less);
  if (!out.empty() && out.front().is_pair() != out.back().is_pair()) {
    throw KindMismatch("union of a relation with a set of scalars");
  }
  return make_sorted(std::move(out));
}

Value set_inter(const Value& a, const Value& b) {
  auto x = a.elements();
  auto y = b.elements();
  std::vector<Value> out;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out), less);
  return make_sorted(std::move(out));
}

Value set_diff(const Value& a, const Value& b) {
  auto x = a.elements();
  auto y = b.elements();
  if (y.empty()) return a;
  std::vector<Value> out;
  std::set_difference(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out), less);
  return make_sorted(std::move(out));
}

bool subset(const Value& a, const Value& b) {
  auto x = a.elements();
  auto y = b.elements();
  return std::includes(y.begin(), y.end(), x.begin(), x.end(), less);
}

/// Pairs of a sorted relation whose first component equals `key`.
std::span<const Value> image_range(std::span<const Value> rel, const Scalar& key) {
  auto lo = std::partition_point(rel.begin(), rel.end(), [&](const Value& p) {
    return compare_scalars(p.as_pair().first, key) < 0;
  });
  auto hi = std::partition_point(lo, rel.end(), [&](const Value& p) {
    return compare_scalars(p.as_pair().first, key) == 0;
  });
  return {lo, hi};
}

void require_relation(const Value& r) {
  if (!r.is_set() || !r.is_relation()) throw KindMismatch("expected a relation");
}

Value override_rel(const Value& r, const Value& s) {
  require_relation(r);
  require_relation(s);
  if (s.size() == 0) return r;
  auto sx = s.elements();
  std::vector<Value> out;
  out.reserve(r.size() + sx.size());
  // Merge, dropping pairs of r whose first component appears in s.
  auto it = sx.begin();
  for (const auto& p : r.elements()) {
    const Scalar& k = p.as_pair().first;
    while (it != sx.end() && less(*it, p)) out.push_back(*it++);
    bool shadowed = !image_range(sx, k).empty();
    if (!shadowed) out.push_back(p);
  }
  while (it != sx.end()) out.push_back(*it++);
  return make_sorted(std::move(out));
}

template <class Keep>
Value filter(const Value& s, Keep keep) {
  std::vector<Value> out;
  for (const auto& v : s.elements()) {
    if (keep(v)) out.push_back(v);
  }
  if (out.size() == s.size()) return s;
  return make_sorted(std::move(out));
}

Value project(const Value& r, bool first) {
  require_relation(r);
  std::vector<Value> out;
  out.reserve(r.size());
  for (const auto& p : r.elements()) out.push_back(first ? p.first() : p.second());
  if (first) {
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return make_sorted(std::move(out));
  }
  return Value::set(std::move(out));
}

template <class F>
Value checked_int(const Expr& at, F op) {
  std::int64_t out;
  if (op(out)) fail(ErrorKind::IntegerOverflow, at, "integer overflow");
  return Value::integer(out);
}

class Evaluator {
 public:
  explicit Evaluator(const Env& env) : env_(env) {}

  Value eval(const Expr& e) {
    if (e.folded) return e.literal;
    if (e.hoist_slot >= 0 && static_cast<std::size_t>(e.hoist_slot) < frames_.size()) {
      auto& cache = frames_[e.hoist_slot].cache;
      for (const auto& [node, v] : cache) {
        if (node == &e) return v;
      }
      Value v = eval_node(e);
      frames_[e.hoist_slot].cache.emplace_back(&e, v);
      return v;
    }
    return eval_node(e);
  }

  bool eval_bool(const Expr& e) {
    Value v = eval(e);
    if (!v.is_bool()) fail(ErrorKind::KindMismatch, e, "expected a boolean, found " + to_string(v));
    return v.as_bool();
  }

  std::int64_t eval_int(const Expr& e) {
    Value v = eval(e);
    if (!v.is_int()) fail(ErrorKind::KindMismatch, e, "expected an integer, found " + to_string(v));
    return v.as_int();
  }

  Value eval_set(const Expr& e) {
    Value v = eval(e);
    if (!v.is_set()) fail(ErrorKind::KindMismatch, e, "expected a set, found " + to_string(v));
    return v;
  }

  bool member(const Value& v, const Expr& s) {
    try {
      return member_node(v, s);
    } catch (const KindMismatch& ex) {
      fail(ErrorKind::KindMismatch, s, ex.what());
    }
  }

 private:
  struct Frame {
    Value binder;
    std::vector<std::pair<const Expr*, Value>> cache;
  };

  bool member_node(const Value& v, const Expr& s) {
    if (s.kind == ExprKind::Ident && s.ref == RefKind::Builtin) {
      switch (s.builtin) {
        case BuiltinSet::Nat: return v.is_int() && v.as_int() >= 0;
        case BuiltinSet::Nat1: return v.is_int() && v.as_int() >= 1;
        case BuiltinSet::Int: return v.is_int();
        case BuiltinSet::Bool: return v.is_bool();
      }
    }
    if (s.kind == ExprKind::Call && s.op == Op::Pow) {
      if (!v.is_set()) return false;
      for (const auto& x : v.elements()) {
        if (!member_node(x, *s.args[0])) return false;
      }
      return true;
    }
    if (s.kind == ExprKind::Binary && s.op == Op::Mul && is_structural(s)) {
      if (!v.is_pair()) return false;
      return member_node(v.first(), *s.args[0]) && member_node(v.second(), *s.args[1]);
    }
    if (s.kind == ExprKind::Binary && (s.op == Op::Union || (s.op == Op::Or && is_structural(s)))) {
      return member_node(v, *s.args[0]) || member_node(v, *s.args[1]);
    }
    if (s.kind == ExprKind::Binary && s.op == Op::Range) {
      if (!v.is_int()) return false;
      std::int64_t x = v.as_int();
      return eval_int(*s.args[0]) <= x && x <= eval_int(*s.args[1]);
    }
    Value set = eval_set(s);
    return set.contains(v);
  }

  /// Whether a set-valued operator node may denote an infinite carrier.
  static bool is_structural(const Expr& s) {
    if (s.kind == ExprKind::Ident) return s.ref == RefKind::Builtin;
    if (s.kind == ExprKind::Call) return s.op == Op::Pow;
    if (s.kind == ExprKind::Binary && (s.op == Op::Mul || s.op == Op::Union || s.op == Op::Or)) {
      return s.type.is_set() || is_structural(*s.args[0]) || is_structural(*s.args[1]);
    }
    return false;
  }

  Value eval_node(const Expr& e) {
    try {
      return dispatch(e);
    } catch (const KindMismatch& ex) {
      fail(ErrorKind::KindMismatch, e, ex.what());
    }
  }

  Value dispatch(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return Value::integer(e.int_value);
      case ExprKind::BoolLit: return Value::boolean(e.bool_value);
      case ExprKind::SymLit: return e.literal;
      case ExprKind::Ident: return ident(e);
      case ExprKind::SetLit: {
        std::vector<Value> elems;
        elems.reserve(e.args.size());
        for (const auto& a : e.args) elems.push_back(eval(*a));
        return Value::set(std::move(elems));
      }
      case ExprKind::Enumerated:
        fail(ErrorKind::InvalidOperation, e, "an enumerated distribution is not a value");
      case ExprKind::Comprehension: return comprehension(e);
      case ExprKind::Unary:
        if (e.op == Op::Neg) {
          std::int64_t x = eval_int(*e.args[0]);
          if (x == std::numeric_limits<std::int64_t>::min()) {
            fail(ErrorKind::IntegerOverflow, e, "integer overflow");
          }
          return Value::integer(-x);
        }
        return Value::boolean(!eval_bool(*e.args[0]));
      case ExprKind::Binary: return binary(e);
      case ExprKind::Call: return call(e);
      case ExprKind::Apply: return apply(e);
    }
    fail(ErrorKind::InvalidOperation, e, "malformed expression");
  }

  Value ident(const Expr& e) {
    switch (e.ref) {
      case RefKind::Constant: return slot(env_.constants, e);
      case RefKind::Variable: return slot(env_.variables, e);
      case RefKind::Parameter: return slot(env_.parameters, e);
      case RefKind::Binder:
        if (e.index >= frames_.size()) fail(ErrorKind::Unbound, e, "unbound '" + e.name + "'");
        return frames_[e.index].binder;
      case RefKind::Literal: return e.literal;
      case RefKind::Builtin:
        if (e.builtin == BuiltinSet::Bool) {
          return Value::set_from_sorted({Value::boolean(false), Value::boolean(true)});
        }
        fail(ErrorKind::InfiniteSet, e, "'" + e.name + "' is infinite and cannot be enumerated");
      case RefKind::None: break;
    }
    fail(ErrorKind::Unbound, e, "unresolved identifier '" + e.name + "'");
  }

  Value slot(std::span<const Value> values, const Expr& e) {
    if (e.index >= values.size()) fail(ErrorKind::Unbound, e, "no value bound to '" + e.name + "'");
    return values[e.index];
  }

  Value comprehension(const Expr& e) {
    Value domain = eval_set(*e.args[0]);
    const Expr& body = *e.args[1];
    const std::size_t depth = e.index;
    if (frames_.size() != depth) fail(ErrorKind::InvalidOperation, e, "comprehension nesting mismatch");
    frames_.emplace_back();
    std::vector<Value> out;
    out.reserve(domain.size());
    bool filter_mode = e.comp_mode == CompMode::Filter;
    bool decided = e.comp_mode != CompMode::Dynamic;
    bool sorted = true;
    try {
      for (const auto& x : domain.elements()) {
        frames_[depth].binder = x;
        Value v = eval(body);
        if (!decided) {
          filter_mode = v.is_bool();
          decided = true;
        }
        if (filter_mode) {
          if (!v.is_bool()) fail(ErrorKind::KindMismatch, body, "comprehension body is not a predicate");
          if (v.as_bool()) out.push_back(x);
        } else {
          if (!out.empty() && !less(out.back(), v)) sorted = false;
          out.push_back(std::move(v));
        }
      }
    } catch (...) {
      frames_.pop_back();
      throw;
    }
    frames_.pop_back();
    if (filter_mode || sorted) {
      if (!out.empty() && out.front().is_pair() != out.back().is_pair()) {
        throw KindMismatch("comprehension mixes pairs and scalars");
      }
      if (!out.empty() && out.front().is_set()) throw KindMismatch("sets of sets are not supported");
      return make_sorted(std::move(out));
    }
    return Value::set(std::move(out));
  }

  Value binary(const Expr& e) {
    const Expr& lhs = *e.args[0];
    const Expr& rhs = *e.args[1];
    switch (e.op) {
      case Op::And:
      case Op::Or: {
        Value l = eval(lhs);
        if (l.is_bool()) {
          bool lb = l.as_bool();
          if (e.op == Op::And ? !lb : lb) return l;
          return Value::boolean(eval_bool(rhs));
        }
        Value r = eval(rhs);
        if (!l.is_set() || !r.is_set()) throw KindMismatch("expected predicates or sets");
        return e.op == Op::And ? set_inter(l, r) : set_union(l, r);
      }
      case Op::Implies:
        return Value::boolean(!eval_bool(lhs) || eval_bool(rhs));
      case Op::Iff:
        return Value::boolean(eval_bool(lhs) == eval_bool(rhs));
      case Op::In:
      case Op::NotIn: {
        Value l = eval(lhs);
        bool in = member_node(l, rhs);
        return Value::boolean(e.op == Op::In ? in : !in);
      }
      case Op::Subset:
      case Op::NotSubset:
      case Op::StrictSubset: {
        Value l = eval_set(lhs);
        bool sub;
        bool strict;
        if (is_structural(rhs)) {
          sub = std::all_of(l.elements().begin(), l.elements().end(),
                            [&](const Value& x) { return member_node(x, rhs); });
          strict = true;
        } else {
          Value r = eval_set(rhs);
          sub = subset(l, r);
          strict = l.size() < r.size();
        }
        if (e.op == Op::Subset) return Value::boolean(sub);
        if (e.op == Op::NotSubset) return Value::boolean(!sub);
        return Value::boolean(sub && strict);
      }
      default:
        break;
    }

    Value l = eval(lhs);
    Value r = eval(rhs);
    switch (e.op) {
      case Op::Add: {
        return checked_int(e, [&](std::int64_t& out) { return __builtin_add_overflow(l.as_int(), r.as_int(), &out); });
      }
      case Op::Sub: {
        return checked_int(e, [&](std::int64_t& out) { return __builtin_sub_overflow(l.as_int(), r.as_int(), &out); });
      }
      case Op::Mul: {
        if (l.is_set() || r.is_set()) return product(e, l, r);
        return checked_int(e, [&](std::int64_t& out) { return __builtin_mul_overflow(l.as_int(), r.as_int(), &out); });
      }
      case Op::Div:
      case Op::Mod: {
        std::int64_t a = l.as_int();
        std::int64_t b = r.as_int();
        if (b == 0) fail(ErrorKind::DivisionByZero, e, "division by zero");
        if (b < 0) fail(ErrorKind::InvalidOperation, e, "negative divisor " + std::to_string(b));
        std::int64_t q = a / b;
        std::int64_t m = a % b;
        if (m < 0) {
          q -= 1;
          m += b;
        }
        return Value::integer(e.op == Op::Div ? q : m);
      }
      case Op::Range: {
        std::int64_t a = l.as_int();
        std::int64_t b = r.as_int();
        if (b < a) return Value::empty_set();
        if (b - a >= kMaxInterval) {
          fail(ErrorKind::InfiniteSet, e,
               "interval " + std::to_string(a) + " .. " + std::to_string(b) + " is too large");
        }
        std::vector<Value> out;
        out.reserve(static_cast<std::size_t>(b - a + 1));
        for (std::int64_t i = a; i <= b; ++i) out.push_back(Value::integer(i));
        return make_sorted(std::move(out));
      }
      case Op::Maplet: return Value::pair(l, r);
      case Op::Eq: return Value::boolean(l == r);
      case Op::Neq: return Value::boolean(!(l == r));
      case Op::Lt: return Value::boolean(l.as_int() < r.as_int());
      case Op::Le: return Value::boolean(l.as_int() <= r.as_int());
      case Op::Gt: return Value::boolean(l.as_int() > r.as_int());
      case Op::Ge: return Value::boolean(l.as_int() >= r.as_int());
      case Op::Union: return set_union(need_set(l), need_set(r));
      case Op::Inter: return set_inter(need_set(l), need_set(r));
      case Op::Diff: return set_diff(need_set(l), need_set(r));
      case Op::Override: return override_rel(l, r);
      case Op::DomRes:
      case Op::DomSub: {
        need_set(l);
        require_relation(r);
        bool keep_in = e.op == Op::DomRes;
        return filter(r, [&](const Value& p) { return l.contains_scalar(p.as_pair().first) == keep_in; });
      }
      case Op::RangeRes:
      case Op::RangeSub: {
        require_relation(l);
        need_set(r);
        bool keep_in = e.op == Op::RangeRes;
        return filter(l, [&](const Value& p) { return r.contains_scalar(p.as_pair().second) == keep_in; });
      }
      default:
        break;
    }
    fail(ErrorKind::InvalidOperation, e, std::string("unsupported operator ") + spelling(e.op));
  }

  static const Value& need_set(const Value& v) {
    if (!v.is_set()) throw KindMismatch("expected a set, found " + to_string(v));
    return v;
  }

  Value product(const Expr& e, const Value& l, const Value& r) {
    need_set(l);
    need_set(r);
    if (l.size() * r.size() > static_cast<std::size_t>(kMaxInterval)) {
      fail(ErrorKind::InfiniteSet, e, "Cartesian product is too large");
    }
    std::vector<Value> out;
    out.reserve(l.size() * r.size());
    for (const auto& a : l.elements()) {
      for (const auto& b : r.elements()) out.push_back(Value::pair(a, b));
    }
    return make_sorted(std::move(out));
  }

  Value call(const Expr& e) {
    const Expr& arg = *e.args[0];
    switch (e.op) {
      case Op::BoolOf: return Value::boolean(eval_bool(arg));
      case Op::Pow:
        fail(ErrorKind::InvalidOperation, e, "POW(_) can only appear on the right of ':'");
      default:
        break;
    }
    Value s = eval_set(arg);
    switch (e.op) {
      case Op::Card: return Value::integer(static_cast<std::int64_t>(s.size()));
      case Op::Dom: return project(s, true);
      case Op::Ran: return project(s, false);
      case Op::Min:
      case Op::Max: {
        if (s.size() == 0) fail(ErrorKind::EmptyChoice, e, std::string(spelling(e.op)) + " of the empty set");
        const Value& v = e.op == Op::Min ? s.elements().front() : s.elements().back();
        if (!v.is_int()) throw KindMismatch("expected a set of integers");
        return v;
      }
      default:
        break;
    }
    fail(ErrorKind::InvalidOperation, e, "unsupported call");
  }

  Value apply(const Expr& e) {
    Value f = eval(*e.args[0]);
    Value x = eval(*e.args[1]);
    require_relation(f);
    if (!x.is_scalar()) throw KindMismatch("function argument must be a scalar");
    auto img = image_range(f.elements(), x.as_scalar());
    if (img.size() != 1) {
      fail(ErrorKind::InvalidOperation, e,
           img.empty() ? to_string(x) + " is outside the domain" : "relation is not functional at " + to_string(x));
    }
    return img.front().second();
  }

  const Env& env_;
  std::vector<Frame> frames_;
};

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::IntegerOverflow: return "IntegerOverflow";
    case ErrorKind::KindMismatch: return "KindMismatch";
    case ErrorKind::EmptyChoice: return "EmptyChoice";
    case ErrorKind::InfiniteSet: return "InfiniteSet";
    case ErrorKind::InvalidOperation: return "InvalidOperation";
    case ErrorKind::Unbound: return "Unbound";
  }
  return "?";
}

Diagnostic EvalError::diagnostic() const {
  return {Severity::Error, std::string(to_string(kind_)) + ": " + what(), span_};
}

Value eval(const Expr& expr, const Env& env) { return Evaluator(env).eval(expr); }

bool eval_bool(const Expr& expr, const Env& env) { return Evaluator(env).eval_bool(expr); }

std::int64_t eval_int(const Expr& expr, const Env& env) { return Evaluator(env).eval_int(expr); }

bool is_member(const Value& v, const Expr& set_expr, const Env& env) {
  return Evaluator(env).member(v, set_expr);
}

Type type_of(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Int: return Type::integer();
    case ValueKind::Bool: return Type::boolean();
    case ValueKind::Sym: return Type::symbol();
    case ValueKind::Pair: return Type::pair(type_of(v.first()), type_of(v.second()));
    case ValueKind::Set:
      return Type::set_of(v.size() ? type_of(v.elements().front()) : Type::unknown());
  }
  return Type::unknown();
}

Value evaluate_text(std::string_view text, const std::vector<std::pair<std::string, Value>>& bindings) {
  auto parsed = parse_expression(text);
  if (!parsed.expr) {
    throw std::invalid_argument(parsed.diagnostics.empty() ? "syntax error"
                                                           : format(parsed.diagnostics.front()));
  }
  std::unordered_map<std::string, NameInfo> names;
  std::vector<Value> values;
  for (const auto& [name, value] : bindings) {
    NameInfo info;
    info.kind = RefKind::Constant;
    info.index = static_cast<std::uint32_t>(values.size());
    info.type = type_of(value);
    names[name] = info;
    values.push_back(value);
  }
  std::vector<Diagnostic> diags;
  auto resolved = resolve_with_names(parsed.expr, names, diags);
  if (!resolved) {
    std::string msg;
    for (const auto& d : diags) {
      if (d.severity == Severity::Error) {
        msg = format(d);
        break;
      }
    }
    throw std::invalid_argument(msg.empty() ? "resolution failed" : msg);
  }
  return eval(*resolved, Env{values, {}, {}});
}

namespace {

/// Binder slots referenced freely by `e`, or all bits when `e` reads the
/// state or an event parameter.
std::uint64_t free_dependencies(const Expr& e, std::vector<const Expr*>& pure) {
  constexpr std::uint64_t kState = ~std::uint64_t{0};
  std::uint64_t deps = 0;
  if (e.kind == ExprKind::Ident) {
    if (e.ref == RefKind::Variable || e.ref == RefKind::Parameter || e.ref == RefKind::None) deps = kState;
    if (e.ref == RefKind::Binder) deps = e.index < 64 ? std::uint64_t{1} << e.index : kState;
    return deps;
  }
  std::vector<std::uint64_t> child;
  for (const auto& a : e.args) child.push_back(free_dependencies(*a, pure));
  for (std::size_t i = 0; i < child.size(); ++i) {
    std::uint64_t d = child[i];
    if (e.kind == ExprKind::Comprehension && i == 1 && d != kState && e.index < 64) {
      d &= ~(std::uint64_t{1} << e.index);
    }
    deps |= d;
  }
  if (deps == 0) pure.push_back(&e);
  return deps;
}

bool fold_node(const Expr& e, const Env& env) {
  constexpr std::size_t kMaxFolded = std::size_t{1} << 20;
  if (e.kind == ExprKind::IntLit || e.kind == ExprKind::BoolLit || e.kind == ExprKind::SymLit ||
      e.kind == ExprKind::Enumerated) {
    return false;
  }
  try {
    Value v = eval(e, env);
    if (v.is_set() && v.size() > kMaxFolded) return false;
    auto& node = const_cast<Expr&>(e);
    node.literal = std::move(v);
    node.folded = true;
    return true;
  } catch (const EvalError&) {
    // Left for evaluation time, where the error is reported in context.
    return false;
  }
}

void fold_top_down(const Expr& e, const std::unordered_set<const Expr*>& pure, const Env& env) {
  if (pure.count(&e) && fold_node(e, env)) return;
  for (const auto& a : e.args) fold_top_down(*a, pure, env);
}

}  // namespace

void fold_constants(const Expr& root, const Env& env) {
  std::vector<const Expr*> pure;
  free_dependencies(root, pure);
  fold_top_down(root, {pure.begin(), pure.end()}, env);
}

}  // namespace peb
