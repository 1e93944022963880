// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include "peb/parser.hpp"

namespace peb {

namespace {

void print(std::ostream& os, const Expr& e);

void print_list(std::ostream& os, const std::vector<ExprPtr>& xs, const std::vector<Rational>* probs) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << ", ";
    print(os, *xs[i]);
    if (probs) os << " @ " << to_string((*probs)[i]);
  }
}

void print(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit: os << e.int_value; break;
    case ExprKind::BoolLit: os << (e.bool_value ? "TRUE" : "FALSE"); break;
    case ExprKind::SymLit: os << '"' << e.name << '"'; break;
    case ExprKind::Ident: os << e.name; break;
    case ExprKind::SetLit:
      os << '{';
      print_list(os, e.args, nullptr);
      os << '}';
      break;
    case ExprKind::Enumerated:
      os << '{';
      print_list(os, e.args, &e.probs);
      os << '}';
      break;
    case ExprKind::Comprehension:
      os << '{' << e.name << " . ";
      print(os, *e.args[0]);
      os << " | ";
      print(os, *e.args[1]);
      os << '}';
      break;
    case ExprKind::Unary:
      os << '(' << spelling(e.op) << ' ';
      print(os, *e.args[0]);
      os << ')';
      break;
    case ExprKind::Binary:
      os << '(';
      print(os, *e.args[0]);
      os << ' ' << spelling(e.op) << ' ';
      print(os, *e.args[1]);
      os << ')';
      break;
    case ExprKind::Call:
      os << spelling(e.op) << '(';
      print(os, *e.args[0]);
      os << ')';
      break;
    case ExprKind::Apply:
      print(os, *e.args[0]);
      os << '(';
      print(os, *e.args[1]);
      os << ')';
      break;
  }
}

void print_assignment(std::ostream& os, const Assignment& a) {
  os << "    " << a.target;
  switch (a.kind) {
    case AssignKind::Deterministic:
      os << " := ";
      print(os, *a.exprs[0]);
      break;
    case AssignKind::UniformSet:
      os << " :in ";
      print(os, *a.exprs[0]);
      break;
    case AssignKind::UniformList:
      os << " := {";
      print_list(os, a.exprs, nullptr);
      os << '}';
      break;
    case AssignKind::Enumerated:
      os << " := {";
      print_list(os, a.exprs, &a.probs);
      os << '}';
      break;
  }
  os << '\n';
}

}  // namespace

std::string pretty_print(const Expr& expr) {
  std::ostringstream os;
  print(os, expr);
  return os.str();
}

std::string pretty_print(const Model& model) {
  std::ostringstream os;
  if (model.context) {
    const Context& c = *model.context;
    os << "CONTEXT " << c.name << '\n';
    if (!c.sets.empty()) {
      os << "  SETS\n";
      for (const auto& s : c.sets) {
        os << "    " << s.name << " : ";
        if (s.cardinality) {
          os << *s.cardinality;
        } else {
          os << '{';
          for (std::size_t i = 0; i < s.elements.size(); ++i) os << (i ? ", " : "") << s.elements[i];
          os << '}';
        }
        os << '\n';
      }
    }
    if (!c.constants.empty()) {
      os << "  CONSTANTS\n";
      for (const auto& k : c.constants) {
        os << "    " << k.name << " : ";
        print(os, *k.type);
        os << " := ";
        print(os, *k.value);
        os << '\n';
      }
    }
    os << "END\n";
  }
  if (model.machine) {
    const Machine& m = *model.machine;
    if (model.context) os << '\n';
    os << "MACHINE " << m.name;
    if (!m.sees.empty()) os << " SEES " << m.sees;
    os << '\n';
    if (!m.variables.empty()) {
      os << "  VARIABLES";
      for (const auto& v : m.variables) os << ' ' << v;
      os << '\n';
    }
    if (!m.invariants.empty()) {
      os << "  INVARIANTS\n";
      for (const auto& inv : m.invariants) {
        os << "    ";
        print(os, *inv);
        os << '\n';
      }
    }
    if (!m.init.empty()) {
      os << "  INITIALISATION\n";
      for (const auto& i : m.init) {
        os << "    " << i.target << " := ";
        print(os, *i.value);
        os << '\n';
      }
    }
    for (const auto& ev : m.events) {
      os << "  EVENT " << ev.name << '\n';
      if (ev.weight) {
        os << "    WEIGHT ";
        print(os, *ev.weight);
        os << '\n';
      }
      if (!ev.params.empty()) {
        os << "    ANY\n";
        for (const auto& p : ev.params) {
          os << "      " << p.name << " :in ";
          print(os, *p.domain);
          os << '\n';
        }
      }
      if (ev.guard) {
        os << "    WHERE ";
        print(os, *ev.guard);
        os << '\n';
      }
      if (!ev.actions.empty()) {
        os << "    THEN\n";
        for (const auto& a : ev.actions) {
          os << "  ";
          print_assignment(os, a);
        }
      }
      os << "  END\n";
    }
    if (!m.properties.empty()) {
      os << "  PROPERTIES\n";
      for (const auto& p : m.properties) {
        os << "    ";
        if (p.named) os << p.name << " := ";
        print(os, *p.expr);
        os << '\n';
      }
    }
    os << "END\n";
  }
  return os.str();
}

}  // namespace peb
