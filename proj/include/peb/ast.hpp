// SPDX-License-Identifier: Apache-2.0
//
// Abstract syntax of probabilistic Event-B models: contexts (deferred sets and
// constants), machines (variables, typing invariants, initialisation, weighted
// events) and the PROPERTIES section.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "peb/rational.hpp"
#include "peb/value.hpp"

namespace peb {

struct SourceSpan {
  std::shared_ptr<const std::string> file;
  std::uint32_t line = 0;    // 1-based; 0 when synthesized
  std::uint32_t column = 0;  // 1-based
  std::uint32_t length = 0;

  std::string file_name() const { return file ? *file : std::string("<input>"); }
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;
  SourceSpan span;
};

/// `file:line:col: error: message`
std::string format(const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& diags);

/// Shallow static type used for light checking and for telling filter
/// comprehensions from map comprehensions.
struct Type {
  enum class Tag : std::uint8_t { Unknown, Int, Bool, Sym, Pair, Set };

  Tag tag = Tag::Unknown;
  std::string carrier;     // Sym: the deferred set, when known
  std::vector<Type> args;  // Pair: two components; Set: element type

  static Type unknown() { return {}; }
  static Type integer() { return {Tag::Int, {}, {}}; }
  static Type boolean() { return {Tag::Bool, {}, {}}; }
  static Type symbol(std::string carrier = {}) { return {Tag::Sym, std::move(carrier), {}}; }
  static Type pair(Type a, Type b) { return {Tag::Pair, {}, {std::move(a), std::move(b)}}; }
  static Type set_of(Type elem) { return {Tag::Set, {}, {std::move(elem)}}; }

  bool known() const { return tag != Tag::Unknown; }
  bool is_set() const { return tag == Tag::Set; }
  const Type& element() const;  // Set only; Unknown otherwise
};

/// Unknown parts are compatible with anything; symbol carriers are nominal.
bool compatible(const Type& a, const Type& b);
std::string to_string(const Type& t);

enum class ExprKind : std::uint8_t {
  IntLit,
  BoolLit,
  SymLit,  // quoted "name"
  Ident,
  SetLit,
  Enumerated,  // {E1 @ p1, ...}; only legal as an assignment right-hand side
  Comprehension,
  Unary,
  Binary,
  Call,   // card(_), dom(_), ran(_), POW(_), min(_), max(_), bool(_)
  Apply,  // r(x)
};

enum class Op : std::uint8_t {
  None,
  // unary
  Neg,
  Not,
  // arithmetic; Mul doubles as Cartesian product on sets
  Add,
  Sub,
  Mul,
  Div,
  Mod,
  Range,
  Maplet,
  // relational
  Eq,
  Neq,
  Lt,
  Le,
  Gt,
  Ge,
  In,
  NotIn,
  Subset,
  NotSubset,
  StrictSubset,
  // logical; And/Or double as intersection/union on sets
  And,
  Or,
  Implies,
  Iff,
  // sets and relations
  Union,
  Inter,
  Diff,
  RangeRes,
  RangeSub,
  DomRes,
  DomSub,
  Override,
  // calls
  Card,
  Dom,
  Ran,
  Pow,
  Min,
  Max,
  BoolOf,
};

/// Concrete spelling used by the printer.
const char* spelling(Op op);

enum class RefKind : std::uint8_t { None, Constant, Variable, Parameter, Binder, Literal, Builtin };

enum class BuiltinSet : std::uint8_t { Nat, Nat1, Int, Bool };

enum class CompMode : std::uint8_t { Dynamic, Filter, Map };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  Op op = Op::None;
  SourceSpan span;
  std::int64_t int_value = 0;
  bool bool_value = false;
  std::string name;            // Ident / SymLit / comprehension binder
  std::vector<ExprPtr> args;   // Comprehension: {domain, body}; Apply: {fn, arg}
  std::vector<Rational> probs; // Enumerated only

  // Filled in by check_model; untouched in freshly parsed trees.
  RefKind ref = RefKind::None;
  std::uint32_t index = 0;     // slot for Constant/Variable/Parameter/Binder
  BuiltinSet builtin = BuiltinSet::Nat;
  Value literal;               // RefKind::Literal and SymLit
  Type type;
  CompMode comp_mode = CompMode::Dynamic;
  std::int32_t hoist_slot = -1;  // >= 0: invariant w.r.t. binders at depth >= slot
  bool folded = false;           // state-independent; value precomputed in `literal`
};

/// Structural equality, ignoring spans and checker annotations.
bool same_structure(const Expr& a, const Expr& b);
bool same_structure(const ExprPtr& a, const ExprPtr& b);

struct SetDecl {
  std::string name;
  SourceSpan span;
  std::vector<std::string> elements;       // S : {a, b}
  std::optional<std::int64_t> cardinality; // S : n  -> S1 .. Sn
};

struct ConstantDecl {
  std::string name;
  SourceSpan span;
  ExprPtr type;
  ExprPtr value;
};

struct Context {
  std::string name;
  SourceSpan span;
  std::vector<SetDecl> sets;
  std::vector<ConstantDecl> constants;
};

struct Initialisation {
  std::string target;
  SourceSpan span;
  ExprPtr value;
  std::uint32_t target_index = 0;
};

struct Parameter {
  std::string name;
  SourceSpan span;
  ExprPtr domain;
};

enum class AssignKind : std::uint8_t { Deterministic, UniformSet, UniformList, Enumerated };

struct Assignment {
  std::string target;
  SourceSpan span;
  AssignKind kind = AssignKind::Deterministic;
  std::vector<ExprPtr> exprs;  // one for Deterministic/UniformSet
  std::vector<Rational> probs; // Enumerated only, parallel to exprs
  std::uint32_t target_index = 0;
};

struct Event {
  std::string name;
  SourceSpan span;
  ExprPtr weight;  // null: weight 1
  std::vector<Parameter> params;
  ExprPtr guard;   // null: TRUE
  std::vector<Assignment> actions;
};

struct Property {
  std::string name;
  SourceSpan span;
  ExprPtr expr;
  bool named = false;  // false: addressed by its 1-based position
};

struct Machine {
  std::string name;
  SourceSpan span;
  std::string sees;
  std::vector<std::string> variables;
  std::vector<SourceSpan> variable_spans;
  std::vector<ExprPtr> invariants;
  std::vector<Initialisation> init;
  std::vector<Event> events;
  std::vector<Property> properties;
};

struct Model {
  std::optional<Context> context;
  std::optional<Machine> machine;
};

bool same_structure(const Model& a, const Model& b);

}  // namespace peb
