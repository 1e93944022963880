// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <set>

#include "peb/evaluator.hpp"
#include "peb/parser.hpp"

namespace peb {

namespace {

struct BuiltinName {
  const char* name;
  BuiltinSet set;
};

constexpr BuiltinName kBuiltins[] = {
    {"Nat", BuiltinSet::Nat},      {"NAT", BuiltinSet::Nat},   {"NATURAL", BuiltinSet::Nat},
    {"Nat1", BuiltinSet::Nat1},    {"NAT1", BuiltinSet::Nat1}, {"NATURAL1", BuiltinSet::Nat1},
    {"Int", BuiltinSet::Int},      {"INT", BuiltinSet::Int},   {"INTEGER", BuiltinSet::Int},
    {"Bool", BuiltinSet::Bool},    {"BOOL", BuiltinSet::Bool},
};

std::unordered_map<std::string, NameInfo> builtin_names() {
  std::unordered_map<std::string, NameInfo> names;
  for (const auto& b : kBuiltins) {
    NameInfo info;
    info.kind = RefKind::Builtin;
    info.builtin = b.set;
    info.type = Type::set_of(b.set == BuiltinSet::Bool ? Type::boolean() : Type::integer());
    names.emplace(b.name, info);
  }
  return names;
}

bool trivial(const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit:
    case ExprKind::BoolLit:
    case ExprKind::SymLit:
    case ExprKind::Ident:
      return true;
    default:
      return false;
  }
}

/// Rewrites a parsed expression into a resolved, typed tree.
class Resolver {
 public:
  struct Local {
    std::string name;
    Type type;
  };

  Resolver(const std::unordered_map<std::string, NameInfo>& names, std::vector<Diagnostic>& diags)
      : names_(names), diags_(diags) {}

  /// Variables may be referenced (false inside initialisation / constants).
  bool allow_variables = true;
  /// Event parameters in scope; null means parameters are not allowed here.
  const std::vector<Local>* params = nullptr;
  std::string context_what = "expression";

  ExprPtr resolve(const ExprPtr& e) {
    errors_before_ = count_errors();
    std::uint64_t use = 0;
    auto out = walk(*e, 0, use);
    if (count_errors() > errors_before_) return nullptr;
    return out;
  }

 private:
  std::size_t count_errors() const {
    return static_cast<std::size_t>(std::count_if(
        diags_.begin(), diags_.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; }));
  }

  void error(const SourceSpan& span, std::string msg) {
    diags_.push_back({Severity::Error, std::move(msg), span});
  }
  void warning(const SourceSpan& span, std::string msg) {
    diags_.push_back({Severity::Warning, std::move(msg), span});
  }

  void expect_int(const Expr& operand) {
    const Type& t = operand.type;
    if (t.known() && t.tag != Type::Tag::Int) {
      error(operand.span, "expected an integer expression, found " + to_string(t));
    }
  }
  void expect_bool(const Expr& operand) {
    const Type& t = operand.type;
    if (t.known() && t.tag != Type::Tag::Bool) {
      error(operand.span, "expected a predicate, found " + to_string(t));
    }
  }
  void expect_set(const Expr& operand) {
    const Type& t = operand.type;
    if (t.known() && t.tag != Type::Tag::Set) {
      error(operand.span, "expected a set, found " + to_string(t));
    }
  }

  /// One past the innermost binder slot in `mask`; 0 when no binder is used.
  static int binder_level(std::uint64_t mask) { return mask ? 64 - __builtin_clzll(mask) : 0; }

  // `use` collects the binder slots referenced by the subtree, one bit each.
  std::shared_ptr<Expr> walk(const Expr& src, int depth, std::uint64_t& use) {
    auto e = std::make_shared<Expr>(src);
    e->args.clear();
    use = 0;
    std::vector<std::uint64_t> child_use;
    std::vector<int> child_depth;

    auto add_child = [&](const ExprPtr& c, int d) {
      std::uint64_t u = 0;
      auto r = walk(*c, d, u);
      e->args.push_back(r);
      child_use.push_back(u);
      child_depth.push_back(d);
      use |= u;
    };

    switch (src.kind) {
      case ExprKind::IntLit:
        e->type = Type::integer();
        break;
      case ExprKind::BoolLit:
        e->type = Type::boolean();
        break;
      case ExprKind::SymLit: {
        e->literal = Value::symbol(src.name);
        auto it = names_.find(src.name);
        e->type = it != names_.end() && it->second.kind == RefKind::Literal &&
                          it->second.literal.is_sym()
                      ? it->second.type
                      : Type::symbol();
        break;
      }
      case ExprKind::Ident:
        resolve_ident(*e, use);
        break;
      case ExprKind::SetLit:
      case ExprKind::Enumerated: {
        for (const auto& a : src.args) add_child(a, depth);
        Type elem;
        for (const auto& a : e->args) {
          if (a->type.known()) {
            elem = a->type;
            break;
          }
        }
        e->type = src.kind == ExprKind::SetLit ? Type::set_of(elem) : elem;
        break;
      }
      case ExprKind::Comprehension: {
        add_child(src.args[0], depth);
        const Expr& domain = *e->args[0];
        expect_set(domain);
        if (shadows(src.name)) {
          warning(src.span, "comprehension binder '" + src.name + "' shadows an outer identifier");
        }
        binders_.push_back({src.name, domain.type.element()});
        add_child(src.args[1], depth + 1);
        binders_.pop_back();
        // The binder itself is slot `depth`; uses of it do not escape.
        use = child_use[0] | (child_use[1] & ~(std::uint64_t{1} << depth));
        const Type& body = e->args[1]->type;
        e->index = static_cast<std::uint32_t>(depth);
        if (body.tag == Type::Tag::Bool) {
          e->comp_mode = CompMode::Filter;
          e->type = domain.type.known() ? domain.type : Type::set_of(Type::unknown());
        } else if (body.known()) {
          e->comp_mode = CompMode::Map;
          e->type = Type::set_of(body);
        } else {
          e->comp_mode = CompMode::Dynamic;
          e->type = Type::set_of(Type::unknown());
        }
        break;
      }
      case ExprKind::Unary:
        add_child(src.args[0], depth);
        if (src.op == Op::Neg) {
          expect_int(*e->args[0]);
          e->type = Type::integer();
        } else {
          expect_bool(*e->args[0]);
          e->type = Type::boolean();
        }
        break;
      case ExprKind::Binary:
        add_child(src.args[0], depth);
        add_child(src.args[1], depth);
        type_binary(*e);
        break;
      case ExprKind::Call:
        add_child(src.args[0], depth);
        type_call(*e);
        break;
      case ExprKind::Apply: {
        add_child(src.args[0], depth);
        add_child(src.args[1], depth);
        const Type& fn = e->args[0]->type;
        expect_set(*e->args[0]);
        const Type& elem = fn.element();
        e->type = elem.tag == Type::Tag::Pair ? elem.args[1] : Type::unknown();
        break;
      }
    }

    // Mark maximal binder-invariant subtrees for per-comprehension caching.
    int level = binder_level(use);
    bool self_hoistable = level < depth && !trivial(*e);
    for (std::size_t i = 0; i < e->args.size(); ++i) {
      auto& child = const_cast<Expr&>(*e->args[i]);
      int cu = binder_level(child_use[i]);
      int cd = child_depth[i];
      if (cu < cd && !trivial(child) && !(self_hoistable && level == cu)) {
        child.hoist_slot = cu;
      }
    }
    return e;
  }

  bool shadows(const std::string& name) const {
    if (names_.count(name)) return true;
    for (const auto& b : binders_) {
      if (b.name == name) return true;
    }
    if (params) {
      for (const auto& p : *params) {
        if (p.name == name) return true;
      }
    }
    return false;
  }

  void resolve_ident(Expr& e, std::uint64_t& use) {
    for (std::size_t i = binders_.size(); i-- > 0;) {
      if (binders_[i].name == e.name) {
        e.ref = RefKind::Binder;
        e.index = static_cast<std::uint32_t>(i);
        e.type = binders_[i].type;
        if (i >= 64) {
          error(e.span, "comprehensions nested too deeply");
          return;
        }
        use = std::uint64_t{1} << i;
        return;
      }
    }
    if (params) {
      for (std::size_t i = 0; i < params->size(); ++i) {
        if ((*params)[i].name == e.name) {
          e.ref = RefKind::Parameter;
          e.index = static_cast<std::uint32_t>(i);
          e.type = (*params)[i].type;
          return;
        }
      }
    }
    auto it = names_.find(e.name);
    if (it == names_.end()) {
      error(e.span, "unknown identifier '" + e.name + "'");
      return;
    }
    const NameInfo& info = it->second;
    if (info.kind == RefKind::Variable && !allow_variables) {
      error(e.span, context_what + " must be constant but references variable '" + e.name + "'");
      return;
    }
    if (info.kind == RefKind::Parameter) {
      error(e.span, "parameter '" + e.name + "' is not in scope here");
      return;
    }
    e.ref = info.kind;
    e.index = info.index;
    e.builtin = info.builtin;
    e.literal = info.literal;
    e.type = info.type;
  }

  void type_binary(Expr& e) {
    const Expr& l = *e.args[0];
    const Expr& r = *e.args[1];
    const Type& lt = l.type;
    const Type& rt = r.type;
    switch (e.op) {
      case Op::Add:
      case Op::Sub:
      case Op::Div:
      case Op::Mod:
        expect_int(l);
        expect_int(r);
        e.type = Type::integer();
        break;
      case Op::Mul:
        if (lt.is_set() || rt.is_set()) {
          expect_set(l);
          expect_set(r);
          e.type = Type::set_of(Type::pair(lt.element(), rt.element()));
        } else if (lt.tag == Type::Tag::Int || rt.tag == Type::Tag::Int) {
          expect_int(l);
          expect_int(r);
          e.type = Type::integer();
        }
        break;
      case Op::Range:
        expect_int(l);
        expect_int(r);
        e.type = Type::set_of(Type::integer());
        break;
      case Op::Maplet:
        e.type = Type::pair(lt, rt);
        break;
      case Op::Lt:
      case Op::Le:
      case Op::Gt:
      case Op::Ge:
        expect_int(l);
        expect_int(r);
        e.type = Type::boolean();
        break;
      case Op::Eq:
      case Op::Neq:
        if (!compatible(lt, rt)) {
          error(e.span, "comparing " + to_string(lt) + " with " + to_string(rt));
        }
        e.type = Type::boolean();
        break;
      case Op::In:
      case Op::NotIn:
        expect_set(r);
        if (!compatible(lt, rt.element())) {
          error(e.span, "membership of " + to_string(lt) + " in " + to_string(rt));
        }
        e.type = Type::boolean();
        break;
      case Op::Subset:
      case Op::NotSubset:
      case Op::StrictSubset:
        expect_set(l);
        expect_set(r);
        e.type = Type::boolean();
        break;
      case Op::And:
      case Op::Or:
        if (lt.is_set() || rt.is_set()) {
          expect_set(l);
          expect_set(r);
          e.type = lt.known() ? lt : rt;
        } else if (lt.tag == Type::Tag::Bool || rt.tag == Type::Tag::Bool) {
          expect_bool(l);
          expect_bool(r);
          e.type = Type::boolean();
        }
        break;
      case Op::Implies:
      case Op::Iff:
        expect_bool(l);
        expect_bool(r);
        e.type = Type::boolean();
        break;
      case Op::Union:
      case Op::Inter:
      case Op::Diff:
      case Op::Override:
        expect_set(l);
        expect_set(r);
        e.type = lt.known() && lt.element().known() ? lt : rt;
        if (!e.type.known()) e.type = Type::set_of(Type::unknown());
        break;
      case Op::RangeRes:
      case Op::RangeSub:
        expect_set(l);
        expect_set(r);
        e.type = lt.known() ? lt : Type::set_of(Type::unknown());
        break;
      case Op::DomRes:
      case Op::DomSub:
        expect_set(l);
        expect_set(r);
        e.type = rt.known() ? rt : Type::set_of(Type::unknown());
        break;
      default:
        break;
    }
  }

  void type_call(Expr& e) {
    const Expr& a = *e.args[0];
    const Type& at = a.type;
    switch (e.op) {
      case Op::Card:
        expect_set(a);
        e.type = Type::integer();
        break;
      case Op::Dom:
      case Op::Ran: {
        expect_set(a);
        const Type& elem = at.element();
        Type comp = elem.tag == Type::Tag::Pair ? elem.args[e.op == Op::Dom ? 0 : 1] : Type::unknown();
        e.type = Type::set_of(comp);
        break;
      }
      case Op::Pow:
        expect_set(a);
        e.type = Type::set_of(at);
        break;
      case Op::Min:
      case Op::Max:
        expect_set(a);
        e.type = Type::integer();
        break;
      case Op::BoolOf:
        expect_bool(a);
        e.type = Type::boolean();
        break;
      default:
        break;
    }
  }

  const std::unordered_map<std::string, NameInfo>& names_;
  std::vector<Diagnostic>& diags_;
  std::vector<Local> binders_;
  std::size_t errors_before_ = 0;
};

class Checker {
 public:
  explicit Checker(const Model& model) : source_(model) {}

  CheckResult run() {
    auto out = std::make_shared<CheckedModel>();
    out->model = source_;
    out->names = builtin_names();
    if (!source_.machine) {
      error({}, "model has no MACHINE section");
      return finish(out);
    }
    const Machine& m = *source_.machine;
    if (!m.sees.empty() && (!source_.context || source_.context->name != m.sees)) {
      error(m.span, "machine sees unknown context '" + m.sees + "'");
    }
    if (source_.context) check_context(*out);
    check_variables(*out);
    check_invariants(*out);
    check_initialisation(*out);
    check_events(*out);
    check_properties(*out);
    return finish(out);
  }

 private:
  CheckResult finish(std::shared_ptr<CheckedModel> out) {
    CheckResult r;
    r.diagnostics = std::move(diags_);
    if (!has_errors(r.diagnostics)) {
      fold_model(*out);
      r.model = std::move(out);
    }
    return r;
  }

  void fold_model(CheckedModel& cm) {
    Env env = constant_env(cm);
    auto fold = [&](const ExprPtr& e) {
      if (e) fold_constants(*e, env);
    };
    for (const auto& e : cm.monitors) fold(e);
    for (const auto& ev : cm.model.machine->events) {
      fold(ev.weight);
      fold(ev.guard);
      for (const auto& p : ev.params) fold(p.domain);
      for (const auto& a : ev.actions) {
        for (const auto& x : a.exprs) fold(x);
      }
    }
    for (const auto& p : cm.model.machine->properties) fold(p.expr);
  }

  void error(const SourceSpan& span, std::string msg) {
    diags_.push_back({Severity::Error, std::move(msg), span});
  }

  bool declare(CheckedModel& cm, const std::string& name, const NameInfo& info, const SourceSpan& span,
               const char* what) {
    auto it = cm.names.find(name);
    if (it != cm.names.end()) {
      error(span, std::string(what) + " '" + name + "' clashes with an existing " +
                      describe(it->second.kind));
      return false;
    }
    cm.names.emplace(name, info);
    return true;
  }

  static const char* describe(RefKind k) {
    switch (k) {
      case RefKind::Constant: return "constant";
      case RefKind::Variable: return "variable";
      case RefKind::Literal: return "set or set element";
      case RefKind::Builtin: return "built-in set";
      default: return "name";
    }
  }

  Env constant_env(const CheckedModel& cm) const { return Env{cm.constants, {}, {}}; }

  void check_context(CheckedModel& cm) {
    Context& ctx = *cm.model.context;
    for (const auto& s : ctx.sets) {
      std::vector<Value> elems;
      std::vector<std::string> names = s.elements;
      if (s.cardinality) {
        if (*s.cardinality < 0) {
          error(s.span, "set '" + s.name + "' has negative cardinality");
          continue;
        }
        names.clear();
        for (std::int64_t i = 1; i <= *s.cardinality; ++i) names.push_back(s.name + std::to_string(i));
      }
      std::set<std::string> seen;
      NameInfo set_info;
      set_info.kind = RefKind::Literal;
      set_info.type = Type::set_of(Type::symbol(s.name));
      for (const auto& n : names) {
        if (!seen.insert(n).second) {
          error(s.span, "duplicate element '" + n + "' in set '" + s.name + "'");
          continue;
        }
        elems.push_back(Value::symbol(n));
      }
      set_info.literal = Value::set(elems);
      if (!declare(cm, s.name, set_info, s.span, "set")) continue;
      cm.deferred_sets.emplace_back(s.name, set_info.literal);
      for (const auto& v : set_info.literal.elements()) {
        NameInfo el;
        el.kind = RefKind::Literal;
        el.literal = v;
        el.type = Type::symbol(s.name);
        declare(cm, v.as_sym().name(), el, s.span, "set element");
      }
    }

    for (auto& c : ctx.constants) {
      Resolver r(cm.names, diags_);
      r.allow_variables = false;
      r.context_what = "constant initializer";
      auto type_expr = r.resolve(c.type);
      auto value_expr = r.resolve(c.value);
      Type declared = type_expr ? type_expr->type.element() : Type::unknown();
      if (type_expr && type_expr->type.known() && !type_expr->type.is_set()) {
        error(c.type->span, "type of constant '" + c.name + "' is not a set");
      }
      Value value;
      bool ok = type_expr && value_expr;
      if (ok && !compatible(declared, value_expr->type)) {
        error(c.span, "constant '" + c.name + "' declared " + to_string(declared) +
                          " but initialized with " + to_string(value_expr->type));
        ok = false;
      }
      if (ok) {
        try {
          value = eval(*value_expr, constant_env(cm));
          if (!is_member(value, *type_expr, constant_env(cm))) {
            error(c.span, "value " + to_string(value) + " of constant '" + c.name +
                              "' is outside its declared type");
          }
        } catch (const EvalError& ex) {
          diags_.push_back(ex.diagnostic());
        }
      }
      c.type = type_expr ? type_expr : c.type;
      c.value = value_expr ? value_expr : c.value;
      NameInfo info;
      info.kind = RefKind::Constant;
      info.index = static_cast<std::uint32_t>(cm.constants.size());
      info.type = declared.known() ? declared : (value_expr ? value_expr->type : Type::unknown());
      if (declare(cm, c.name, info, c.span, "constant")) {
        cm.constant_names.push_back(c.name);
        cm.constant_types.push_back(info.type);
        cm.constants.push_back(value);
      }
    }
  }

  void check_variables(CheckedModel& cm) {
    const Machine& m = *cm.model.machine;
    for (std::size_t i = 0; i < m.variables.size(); ++i) {
      NameInfo info;
      info.kind = RefKind::Variable;
      info.index = static_cast<std::uint32_t>(cm.variable_names.size());
      if (declare(cm, m.variables[i], info, m.variable_spans[i], "variable")) {
        cm.variable_names.push_back(m.variables[i]);
      }
    }
    cm.variable_types.assign(cm.variable_names.size(), Type::unknown());
    cm.variable_domains.assign(cm.variable_names.size(), nullptr);
    cm.initial_values.assign(cm.variable_names.size(), Value());
  }

  static bool is_typing(const CheckedModel& cm, const Expr& e) {
    return e.kind == ExprKind::Binary && e.op == Op::In && e.args[0]->kind == ExprKind::Ident &&
           cm.variable_index(e.args[0]->name).has_value();
  }

  void check_invariants(CheckedModel& cm) {
    Machine& m = *cm.model.machine;
    for (auto& inv : m.invariants) {
      const Expr& e = *inv;
      if (!is_typing(cm, e)) continue;
      auto idx = *cm.variable_index(e.args[0]->name);
      if (cm.variable_domains[idx]) {
        error(e.span, "variable '" + e.args[0]->name + "' has more than one typing invariant");
        continue;
      }
      Resolver r(cm.names, diags_);
      r.allow_variables = false;
      r.context_what = "typing invariant";
      auto domain = r.resolve(e.args[1]);
      if (!domain) continue;
      if (domain->type.known() && !domain->type.is_set()) {
        error(e.args[1]->span, "type of variable '" + e.args[0]->name + "' is not a set");
        continue;
      }
      cm.variable_domains[idx] = domain;
      cm.variable_types[idx] = domain->type.element();
      cm.names[e.args[0]->name].type = domain->type.element();
    }
    // Remaining invariants are monitored at runtime; resolved once every
    // variable type is known.
    for (auto& inv : m.invariants) {
      if (is_typing(cm, *inv)) continue;
      Resolver r(cm.names, diags_);
      if (auto resolved = r.resolve(inv)) {
        if (resolved->type.known() && resolved->type.tag != Type::Tag::Bool) {
          error(inv->span, "invariant is not a predicate");
        }
        cm.monitors.push_back(resolved);
      }
    }

    for (std::size_t i = 0; i < cm.variable_names.size(); ++i) {
      if (!cm.variable_domains[i]) {
        error(m.variable_spans[i], "variable '" + cm.variable_names[i] +
                                       "' has no typing invariant '" + cm.variable_names[i] + " : A'");
      }
    }
  }

  void check_initialisation(CheckedModel& cm) {
    Machine& m = *cm.model.machine;
    std::vector<bool> seen(cm.variable_names.size(), false);
    for (auto& init : m.init) {
      auto idx = cm.variable_index(init.target);
      if (!idx) {
        error(init.span, "initialisation of '" + init.target + "', which is not a variable");
        continue;
      }
      if (seen[*idx]) {
        error(init.span, "variable '" + init.target + "' is initialised more than once");
        continue;
      }
      seen[*idx] = true;
      init.target_index = static_cast<std::uint32_t>(*idx);
      Resolver r(cm.names, diags_);
      r.allow_variables = false;
      r.context_what = "initialisation of '" + init.target + "'";
      auto value_expr = r.resolve(init.value);
      if (!value_expr) continue;
      init.value = value_expr;
      if (!compatible(cm.variable_types[*idx], value_expr->type)) {
        error(init.span, "variable '" + init.target + "' has type " + to_string(cm.variable_types[*idx]) +
                             " but is initialised with " + to_string(value_expr->type));
        continue;
      }
      if (has_errors(diags_)) continue;
      try {
        Value v = eval(*value_expr, constant_env(cm));
        cm.initial_values[*idx] = v;
        if (cm.variable_domains[*idx] && !is_member(v, *cm.variable_domains[*idx], constant_env(cm))) {
          error(init.span, "initial value " + to_string(v) + " of '" + init.target +
                               "' violates its typing invariant");
        }
      } catch (const EvalError& ex) {
        diags_.push_back(ex.diagnostic());
      }
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (!seen[i]) {
        error(m.variable_spans[i], "variable '" + cm.variable_names[i] + "' is never initialised");
      }
    }
  }

  void check_events(CheckedModel& cm) {
    Machine& m = *cm.model.machine;
    std::set<std::string> event_names;
    for (auto& ev : m.events) {
      if (!event_names.insert(ev.name).second) {
        error(ev.span, "duplicate event '" + ev.name + "'");
      }
      std::vector<Resolver::Local> params;
      for (auto& p : ev.params) {
        bool clash = cm.names.count(p.name) > 0;
        for (const auto& q : params) clash = clash || q.name == p.name;
        if (clash) {
          error(p.span, "parameter '" + p.name + "' of event '" + ev.name +
                            "' clashes with another name");
        }
        Resolver r(cm.names, diags_);
        r.params = &params;
        auto domain = r.resolve(p.domain);
        Type elem;
        if (domain) {
          p.domain = domain;
          if (domain->type.known() && !domain->type.is_set()) {
            error(p.domain->span, "domain of parameter '" + p.name + "' is not a set");
          }
          elem = domain->type.element();
        }
        params.push_back({p.name, elem});
      }

      Resolver r(cm.names, diags_);
      r.params = &params;
      if (ev.weight) {
        Resolver wr(cm.names, diags_);
        wr.context_what = "weight of event '" + ev.name + "'";
        if (auto w = wr.resolve(ev.weight)) {
          ev.weight = w;
          if (w->type.known() && w->type.tag != Type::Tag::Int) {
            error(w->span, "weight of event '" + ev.name + "' is not an integer expression");
          }
        }
      }
      if (ev.guard) {
        if (auto g = r.resolve(ev.guard)) {
          ev.guard = g;
          if (g->type.known() && g->type.tag != Type::Tag::Bool) {
            error(g->span, "guard of event '" + ev.name + "' is not a predicate");
          }
        }
      }

      std::set<std::string> assigned;
      for (auto& a : ev.actions) check_assignment(cm, ev, a, r, assigned);
    }
  }

  void check_assignment(CheckedModel& cm, const Event& ev, Assignment& a, Resolver& r,
                        std::set<std::string>& assigned) {
    auto idx = cm.variable_index(a.target);
    if (!idx) {
      auto it = cm.names.find(a.target);
      if (it != cm.names.end() && it->second.kind == RefKind::Constant) {
        error(a.span, "cannot assign to constant '" + a.target + "'");
      } else {
        error(a.span, "assignment to '" + a.target + "', which is not a variable");
      }
      return;
    }
    if (!assigned.insert(a.target).second) {
      error(a.span, "variable '" + a.target + "' is assigned more than once in event '" + ev.name +
                        "' (a variable can appear only once as left-hand side)");
    }
    a.target_index = static_cast<std::uint32_t>(*idx);
    for (auto& x : a.exprs) {
      if (auto resolved = r.resolve(x)) x = resolved;
    }
    const Type& target = cm.variable_types[*idx];

    if (a.kind == AssignKind::UniformList && target.is_set()) {
      // `s := {e1, e2}` for a set-valued target is a plain set literal unless
      // the elements are themselves sets.
      bool elements_are_sets = std::any_of(a.exprs.begin(), a.exprs.end(),
                                           [](const ExprPtr& x) { return x->type.is_set(); });
      if (!elements_are_sets) {
        auto lit = std::make_shared<Expr>();
        lit->kind = ExprKind::SetLit;
        lit->span = a.span;
        lit->args = a.exprs;
        lit->type = Type::set_of(a.exprs.front()->type);
        a.exprs = {lit};
        a.kind = AssignKind::Deterministic;
      }
    }

    auto mismatch = [&](const ExprPtr& x, const Type& t) {
      error(x->span, "variable '" + a.target + "' has type " + to_string(target) +
                         " but is assigned " + to_string(t));
    };
    switch (a.kind) {
      case AssignKind::Deterministic:
      case AssignKind::UniformList:
        for (const auto& x : a.exprs) {
          if (!compatible(target, x->type)) mismatch(x, x->type);
        }
        break;
      case AssignKind::UniformSet: {
        const auto& x = a.exprs.front();
        if (x->type.known() && !x->type.is_set()) {
          error(x->span, "':in' expects a set, found " + to_string(x->type));
        } else if (!compatible(target, x->type.element())) {
          mismatch(x, x->type.element());
        }
        break;
      }
      case AssignKind::Enumerated: {
        Rational total = 0;
        bool probs_ok = true;
        for (std::size_t i = 0; i < a.exprs.size(); ++i) {
          const Rational& p = a.probs[i];
          if (p <= 0 || p > 1) {
            error(a.exprs[i]->span, "probability " + to_string(p) + " is not in (0, 1]");
            probs_ok = false;
          }
          total += p;
          if (!compatible(target, a.exprs[i]->type)) mismatch(a.exprs[i], a.exprs[i]->type);
        }
        if (probs_ok && total != 1) {
          error(a.span, "probabilities sum to " + to_string(total) + " ≠ 1");
        }
        break;
      }
    }
  }

  void check_properties(CheckedModel& cm) {
    Machine& m = *cm.model.machine;
    std::set<std::string> seen;
    for (auto& p : m.properties) {
      if (p.named && !seen.insert(p.name).second) {
        error(p.span, "duplicate property '" + p.name + "'");
      }
      Resolver r(cm.names, diags_);
      if (auto e = r.resolve(p.expr)) p.expr = e;
    }
  }

  Model source_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

std::optional<std::size_t> CheckedModel::variable_index(const std::string& name) const {
  auto it = std::find(variable_names.begin(), variable_names.end(), name);
  if (it == variable_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - variable_names.begin());
}

std::optional<std::size_t> CheckedModel::event_index(const std::string& name) const {
  const auto& evs = events();
  for (std::size_t i = 0; i < evs.size(); ++i) {
    if (evs[i].name == name) return i;
  }
  return std::nullopt;
}

const Property* CheckedModel::property(const std::string& name) const {
  for (const auto& p : machine().properties) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

CheckResult check_model(const Model& model) { return Checker(model).run(); }

ExprPtr resolve_expression(const CheckedModel& model, const ExprPtr& expr,
                           std::vector<Diagnostic>& diagnostics) {
  Resolver r(model.names, diagnostics);
  return r.resolve(expr);
}

ExprPtr resolve_with_names(const ExprPtr& expr, const std::unordered_map<std::string, NameInfo>& names,
                           std::vector<Diagnostic>& diagnostics) {
  auto all = builtin_names();
  for (const auto& [k, v] : names) all[k] = v;
  Resolver r(all, diagnostics);
  return r.resolve(expr);
}

}  // namespace peb
