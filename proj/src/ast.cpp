// SPDX-License-Identifier: Apache-2.0

#include "peb/ast.hpp"

#include <algorithm>

namespace peb {

std::string format(const Diagnostic& d) {
  std::string out = d.span.file_name();
  if (d.span.line > 0) {
    out += ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.column);
  }
  out += d.severity == Severity::Error ? ": error: " : ": warning: ";
  out += d.message;
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

const Type& Type::element() const {
  static const Type unknown_type;
  if (tag == Tag::Set && !args.empty()) return args.front();
  return unknown_type;
}

bool compatible(const Type& a, const Type& b) {
  if (!a.known() || !b.known()) return true;
  if (a.tag != b.tag) return false;
  if (a.tag == Type::Tag::Sym) {
    return a.carrier.empty() || b.carrier.empty() || a.carrier == b.carrier;
  }
  if (a.args.size() != b.args.size()) return true;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!compatible(a.args[i], b.args[i])) return false;
  }
  return true;
}

std::string to_string(const Type& t) {
  switch (t.tag) {
    case Type::Tag::Unknown: return "?";
    case Type::Tag::Int: return "INT";
    case Type::Tag::Bool: return "BOOL";
    case Type::Tag::Sym: return t.carrier.empty() ? std::string("symbol") : t.carrier;
    case Type::Tag::Pair:
      return to_string(t.args.at(0)) + " * " + to_string(t.args.at(1));
    case Type::Tag::Set: return "POW(" + to_string(t.element()) + ")";
  }
  return "?";
}

const char* spelling(Op op) {
  switch (op) {
    case Op::None: return "";
    case Op::Neg: return "-";
    case Op::Not: return "not";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "div";
    case Op::Mod: return "mod";
    case Op::Range: return "..";
    case Op::Maplet: return "|->";
    case Op::Eq: return "=";
    case Op::Neq: return "/=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::In: return ":";
    case Op::NotIn: return "/:";
    case Op::Subset: return "<:";
    case Op::NotSubset: return "/<:";
    case Op::StrictSubset: return "<<:";
    case Op::And: return "/\\";
    case Op::Or: return "\\/";
    case Op::Implies: return "=>";
    case Op::Iff: return "<=>";
    case Op::Union: return "union";
    case Op::Inter: return "inter";
    case Op::Diff: return "\\";
    case Op::RangeRes: return "|>";
    case Op::RangeSub: return "|>>";
    case Op::DomRes: return "<|";
    case Op::DomSub: return "<<|";
    case Op::Override: return "<+";
    case Op::Card: return "card";
    case Op::Dom: return "dom";
    case Op::Ran: return "ran";
    case Op::Pow: return "POW";
    case Op::Min: return "min";
    case Op::Max: return "max";
    case Op::BoolOf: return "bool";
  }
  return "?";
}

bool same_structure(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return same_structure(*a, *b);
}

bool same_structure(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.op != b.op || a.int_value != b.int_value ||
      a.bool_value != b.bool_value || a.name != b.name || a.args.size() != b.args.size() ||
      a.probs != b.probs) {
    return false;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_structure(a.args[i], b.args[i])) return false;
  }
  return true;
}

namespace {

bool same_exprs(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_structure(a[i], b[i])) return false;
  }
  return true;
}

bool same_context(const Context& a, const Context& b) {
  if (a.name != b.name || a.sets.size() != b.sets.size() ||
      a.constants.size() != b.constants.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.sets.size(); ++i) {
    const auto& x = a.sets[i];
    const auto& y = b.sets[i];
    if (x.name != y.name || x.elements != y.elements || x.cardinality != y.cardinality) return false;
  }
  for (std::size_t i = 0; i < a.constants.size(); ++i) {
    const auto& x = a.constants[i];
    const auto& y = b.constants[i];
    if (x.name != y.name || !same_structure(x.type, y.type) || !same_structure(x.value, y.value)) {
      return false;
    }
  }
  return true;
}

bool same_event(const Event& a, const Event& b) {
  if (a.name != b.name || !same_structure(a.weight, b.weight) ||
      !same_structure(a.guard, b.guard) || a.params.size() != b.params.size() ||
      a.actions.size() != b.actions.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].name != b.params[i].name ||
        !same_structure(a.params[i].domain, b.params[i].domain)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.actions.size(); ++i) {
    const auto& x = a.actions[i];
    const auto& y = b.actions[i];
    if (x.target != y.target || x.kind != y.kind || x.probs != y.probs ||
        !same_exprs(x.exprs, y.exprs)) {
      return false;
    }
  }
  return true;
}

bool same_machine(const Machine& a, const Machine& b) {
  if (a.name != b.name || a.sees != b.sees || a.variables != b.variables ||
      !same_exprs(a.invariants, b.invariants) || a.init.size() != b.init.size() ||
      a.events.size() != b.events.size() || a.properties.size() != b.properties.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.init.size(); ++i) {
    if (a.init[i].target != b.init[i].target || !same_structure(a.init[i].value, b.init[i].value)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    if (!same_event(a.events[i], b.events[i])) return false;
  }
  for (std::size_t i = 0; i < a.properties.size(); ++i) {
    const auto& x = a.properties[i];
    const auto& y = b.properties[i];
    if (x.named != y.named || (x.named && x.name != y.name) || !same_structure(x.expr, y.expr)) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool same_structure(const Model& a, const Model& b) {
  if (a.context.has_value() != b.context.has_value() ||
      a.machine.has_value() != b.machine.has_value()) {
    return false;
  }
  if (a.context && !same_context(*a.context, *b.context)) return false;
  if (a.machine && !same_machine(*a.machine, *b.machine)) return false;
  return true;
}

}  // namespace peb
