// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "peb/ast.hpp"
#include "peb/value.hpp"

namespace peb {

enum class ErrorKind {
  DivisionByZero,
  IntegerOverflow,
  KindMismatch,
  EmptyChoice,
  InfiniteSet,
  InvalidOperation,
  Unbound,
};

const char* to_string(ErrorKind kind);

/// Runtime evaluation failure. Aborts the current analysis; there are no
/// partial results.
class EvalError : public std::runtime_error {
 public:
  EvalError(ErrorKind kind, const std::string& message, SourceSpan span)
      : std::runtime_error(message), kind_(kind), span_(std::move(span)) {}

  ErrorKind kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }
  Diagnostic diagnostic() const;

 private:
  ErrorKind kind_;
  SourceSpan span_;
};

/// Values for resolved identifier slots. Deferred-set names and elements are
/// folded into the expression tree by the checker.
struct Env {
  std::span<const Value> constants;
  std::span<const Value> variables;
  std::span<const Value> parameters;
};

/// Evaluates a checked expression. Pure: `env` is never modified.
Value eval(const Expr& expr, const Env& env);
bool eval_bool(const Expr& expr, const Env& env);
/// Precomputes every maximal subtree of `root` that depends on nothing but
/// the constants in `env`. Subtrees whose evaluation fails are left alone.
void fold_constants(const Expr& root, const Env& env);
std::int64_t eval_int(const Expr& expr, const Env& env);

/// Membership that also understands the infinite carriers (`Nat`, `INT`, ...)
/// and `POW(_)` / `A * B` without materializing them.
bool is_member(const Value& v, const Expr& set_expr, const Env& env);

/// Parses, resolves and evaluates `text` with `bindings` in scope. Throws
/// std::invalid_argument on syntax or resolution errors.
Value evaluate_text(std::string_view text,
                    const std::vector<std::pair<std::string, Value>>& bindings = {});

/// Static type describing a runtime value.
Type type_of(const Value& v);

}  // namespace peb
