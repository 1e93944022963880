// SPDX-License-Identifier: Apache-2.0

#include "peb/exact.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>

namespace peb {

namespace {

void mark_variables(const Expr& e, std::vector<bool>& used) {
  if (e.kind == ExprKind::Ident && e.ref == RefKind::Variable) used[e.index] = true;
  for (const auto& a : e.args) mark_variables(*a, used);
}

/// For `v := v + e`, `v := e + v` and `v := v - e`: the increment expression
/// and its sign.
std::optional<std::pair<const Expr*, int>> increment_of(const Assignment& a) {
  if (a.kind != AssignKind::Deterministic) return std::nullopt;
  const Expr& rhs = *a.exprs[0];
  if (rhs.kind != ExprKind::Binary || (rhs.op != Op::Add && rhs.op != Op::Sub)) return std::nullopt;
  auto is_target = [&](const Expr& x) {
    return x.kind == ExprKind::Ident && x.ref == RefKind::Variable && x.index == a.target_index;
  };
  if (is_target(*rhs.args[0])) return std::make_pair(rhs.args[1].get(), rhs.op == Op::Add ? 1 : -1);
  if (rhs.op == Op::Add && is_target(*rhs.args[1])) return std::make_pair(rhs.args[0].get(), 1);
  return std::nullopt;
}

/// sum(scale * rest) + sum(coef[v] * v) over accumulators v.
struct LinearForm {
  std::vector<std::pair<const Expr*, Rational>> rest;
  std::map<std::size_t, Rational> coef;
};

bool references(const Expr& e, const std::vector<bool>& vars) {
  if (e.kind == ExprKind::Ident && e.ref == RefKind::Variable && vars[e.index]) return true;
  return std::any_of(e.args.begin(), e.args.end(), [&](const ExprPtr& a) { return references(*a, vars); });
}

bool references_any_variable(const Expr& e) {
  if (e.kind == ExprKind::Ident && (e.ref == RefKind::Variable || e.ref == RefKind::Parameter ||
                                    e.ref == RefKind::Binder)) {
    return true;
  }
  return std::any_of(e.args.begin(), e.args.end(), [](const ExprPtr& a) { return references_any_variable(*a); });
}

bool linearize(const CheckedModel& cm, const Expr& e, const Rational& scale, const std::vector<bool>& accs,
               LinearForm& out) {
  if (!references(e, accs)) {
    out.rest.emplace_back(&e, scale);
    return true;
  }
  if (e.kind == ExprKind::Ident) {
    out.coef[e.index] += scale;
    return true;
  }
  if (e.kind == ExprKind::Unary && e.op == Op::Neg) return linearize(cm, *e.args[0], -scale, accs, out);
  if (e.kind != ExprKind::Binary) return false;
  const Expr& l = *e.args[0];
  const Expr& r = *e.args[1];
  switch (e.op) {
    case Op::Add: return linearize(cm, l, scale, accs, out) && linearize(cm, r, scale, accs, out);
    case Op::Sub: return linearize(cm, l, scale, accs, out) && linearize(cm, r, -scale, accs, out);
    case Op::Mul: {
      const Expr* k = !references_any_variable(l) ? &l : !references_any_variable(r) ? &r : nullptr;
      if (!k) return false;
      Value c = eval(*k, Env{cm.constants, {}, {}});
      if (!c.is_int()) return false;
      Rational factor = scale * Rational(mpz_class(static_cast<long>(c.as_int())));
      return linearize(cm, k == &l ? r : l, factor, accs, out);
    }
    default:
      return false;
  }
}

std::vector<bool> as_mask(std::size_t n, const std::vector<std::size_t>& idx) {
  std::vector<bool> mask(n, false);
  for (auto i : idx) mask[i] = true;
  return mask;
}

Rational to_rational(std::int64_t v) { return Rational(mpz_class(static_cast<long>(v))); }

/// Solves (I - Q) x = b over the transient states by sparse elimination.
/// I - Q is a nonsingular M-matrix when every state reaches a deadlock, so
/// diagonal pivots are nonzero.
std::vector<Rational> solve_absorbing(const std::vector<std::map<std::size_t, Rational>>& q,
                                      const std::vector<Rational>& b) {
  const std::size_t m = b.size();
  std::vector<std::map<std::size_t, Rational>> upper(m);
  std::vector<Rational> rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::map<std::size_t, Rational> row;
    row[i] = 1;
    for (const auto& [j, p] : q[i]) row[j] -= p;
    Rational c = b[i];
    while (true) {
      auto it = row.begin();
      while (it != row.end() && it->first < i && it->second == 0) it = row.erase(it);
      if (it == row.end() || it->first >= i) break;
      std::size_t k = it->first;
      Rational factor = it->second / upper[k].at(k);
      row.erase(it);
      for (auto jt = std::next(upper[k].begin()); jt != upper[k].end(); ++jt) row[jt->first] -= factor * jt->second;
      c -= factor * rhs[k];
    }
    for (auto it = row.begin(); it != row.end();) it = it->second == 0 && it->first != i ? row.erase(it) : std::next(it);
    upper[i] = std::move(row);
    rhs[i] = c;
  }
  std::vector<Rational> x(m);
  for (std::size_t i = m; i-- > 0;) {
    Rational acc = rhs[i];
    for (auto it = std::next(upper[i].begin()); it != upper[i].end(); ++it) acc -= it->second * x[it->first];
    x[i] = acc / upper[i].at(i);
  }
  return x;
}

std::size_t state_cost(const MachineState& s) {
  std::size_t n = 0;
  for (const auto& v : s.values) n += 1 + (v.is_set() ? v.size() : 0);
  return n;
}

std::string state_label(const Semantics& sem, const Dtmc& d, const MachineState& s, const char* sep) {
  const auto& names = sem.model().variable_names;
  auto hidden = as_mask(names.size(), d.accumulators);
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (hidden[i]) continue;
    if (!out.empty()) out += sep;
    out += names[i] + "=" + to_string(s.values[i]);
  }
  return out;
}

}  // namespace

std::size_t Dtmc::transition_count() const {
  std::size_t n = 0;
  for (const auto& t : transitions) n += t.size();
  return n;
}

std::vector<std::size_t> find_accumulators(const CheckedModel& cm) {
  const std::size_t n = cm.variable_names.size();
  std::vector<bool> candidate(n, false);
  for (std::size_t i = 0; i < n; ++i) candidate[i] = cm.variable_types[i].tag == Type::Tag::Int;
  std::vector<bool> used(n, false);
  for (const auto& m : cm.monitors) mark_variables(*m, used);
  for (const auto& ev : cm.events()) {
    if (ev.weight) mark_variables(*ev.weight, used);
    if (ev.guard) mark_variables(*ev.guard, used);
    for (const auto& p : ev.params) mark_variables(*p.domain, used);
    for (const auto& a : ev.actions) {
      auto inc = increment_of(a);
      if (inc) {
        mark_variables(*inc->first, used);
      } else {
        candidate[a.target_index] = false;
        for (const auto& x : a.exprs) mark_variables(*x, used);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (candidate[i] && !used[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> accumulators_for(const CheckedModel& cm, const Query* q) {
  auto accs = find_accumulators(cm);
  if (!q || accs.empty()) return accs;
  auto mask = as_mask(cm.variable_names.size(), accs);
  if (q->kind == QueryKind::ExpectedAtEnd) {
    LinearForm form;
    if (linearize(cm, *q->expr, 1, mask, form)) return accs;
  }
  std::vector<bool> used(cm.variable_names.size(), false);
  mark_variables(*q->expr, used);
  std::vector<std::size_t> out;
  for (auto a : accs) {
    if (!used[a]) out.push_back(a);
  }
  return out;
}

Dtmc build_dtmc(const Semantics& sem, const BuildOptions& options) {
  Dtmc d;
  d.accumulators = options.abstract_vars;
  std::sort(d.accumulators.begin(), d.accumulators.end());
  const MachineState init = sem.initial_state();
  std::unordered_map<MachineState, std::size_t, MachineStateHash> index;
  index.emplace(init, 0);
  d.states.push_back(init);
  std::size_t stored = state_cost(init);

  for (std::size_t i = 0; i < d.states.size(); ++i) {
    TransitionDistribution dist;
    try {
      dist = sem.successor_distribution(d.states[i]);
    } catch (const EvalError& e) {
      throw EvalError(e.kind(), std::string(e.what()) + " in state " + std::to_string(i), e.span());
    }
    d.deadlock.push_back(dist.deadlock());
    std::vector<DtmcTransition> out;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> merged;
    for (auto& t : dist.entries) {
      std::vector<Rational> reward(d.accumulators.size());
      for (std::size_t a = 0; a < d.accumulators.size(); ++a) {
        std::size_t v = d.accumulators[a];
        std::int64_t inc = t.target.values[v].as_int() - init.values[v].as_int();
        reward[a] = t.mass * to_rational(inc);
        t.target.values[v] = init.values[v];
      }
      auto [it, fresh] = index.emplace(t.target, d.states.size());
      if (fresh) {
        if (d.states.size() >= options.max_states) {
          throw StateBound("state space exceeds " + std::to_string(options.max_states) +
                           " states; use statistical estimation (smc) instead");
        }
        stored += state_cost(t.target);
        if (stored > options.max_values) {
          throw StateBound("explored states hold more than " + std::to_string(options.max_values) +
                           " values after " + std::to_string(d.states.size()) +
                           " states; use statistical estimation (smc) instead");
        }
        d.states.push_back(std::move(t.target));
      }
      auto key = std::make_pair(t.event, it->second);
      auto [mt, new_edge] = merged.emplace(key, out.size());
      if (new_edge) {
        out.push_back({t.event, it->second, t.mass, std::move(reward)});
      } else {
        auto& edge = out[mt->second];
        edge.mass += t.mass;
        for (std::size_t a = 0; a < reward.size(); ++a) edge.reward[a] += reward[a];
      }
    }
    d.transitions.push_back(std::move(out));
  }
  return d;
}

Rational exact_query(const Semantics& sem, const Dtmc& d, const Query& q, std::optional<std::uint64_t> horizon) {
  const CheckedModel& cm = sem.model();
  const std::size_t n = d.size();
  auto acc_mask = as_mask(cm.variable_names.size(), d.accumulators);

  if (q.kind == QueryKind::ProbReachWithin) {
    if (references(*q.expr, acc_mask)) {
      throw std::invalid_argument("query mentions a variable that was abstracted from the state space");
    }
    std::vector<bool> phi(n);
    for (std::size_t s = 0; s < n; ++s) phi[s] = state_holds(sem, q, d.states[s]);
    if (phi[0]) return 1;
    std::vector<Rational> p(n);
    p[0] = 1;
    Rational reached = 0;
    for (std::uint64_t step = 0; step < q.within; ++step) {
      std::vector<Rational> next(n);
      bool moving = false;
      for (std::size_t s = 0; s < n; ++s) {
        if (p[s] == 0) continue;
        if (d.deadlock[s]) {
          next[s] += p[s];
          continue;
        }
        moving = true;
        for (const auto& t : d.transitions[s]) {
          Rational m = p[s] * t.mass;
          if (phi[t.target]) {
            reached += m;
          } else {
            next[t.target] += m;
          }
        }
      }
      p = std::move(next);
      if (!moving) break;
    }
    return reached;
  }

  LinearForm form;
  if (!linearize(cm, *q.expr, 1, acc_mask, form)) {
    throw std::invalid_argument("query is not linear in the abstracted counter variables");
  }
  auto end_value = [&](std::size_t s) {
    Rational v = 0;
    for (const auto& [expr, scale] : form.rest) {
      Query part{q.kind, ExprPtr(ExprPtr{}, expr), 0, q.text};
      v += scale * state_value_exact(sem, part, d.states[s]);
    }
    return v;
  };
  auto reward = [&](std::size_t s) {
    Rational r = 0;
    for (std::size_t a = 0; a < d.accumulators.size(); ++a) {
      auto it = form.coef.find(d.accumulators[a]);
      if (it == form.coef.end()) continue;
      for (const auto& t : d.transitions[s]) r += it->second * t.reward[a];
    }
    return r;
  };
  Rational base = 0;
  for (const auto& [v, c] : form.coef) base += c * to_rational(d.states[0].values[v].as_int());

  if (horizon) {
    std::vector<Rational> p(n);
    p[0] = 1;
    Rational gained = 0;
    for (std::uint64_t step = 0; step < *horizon; ++step) {
      std::vector<Rational> next(n);
      bool moving = false;
      for (std::size_t s = 0; s < n; ++s) {
        if (p[s] == 0) continue;
        if (d.deadlock[s]) {
          next[s] += p[s];
          continue;
        }
        moving = true;
        if (!form.coef.empty()) gained += p[s] * reward(s);
        for (const auto& t : d.transitions[s]) next[t.target] += p[s] * t.mass;
      }
      p = std::move(next);
      if (!moving) break;
    }
    Rational total = base + gained;
    for (std::size_t s = 0; s < n; ++s) {
      if (p[s] != 0) total += p[s] * end_value(s);
    }
    return total;
  }

  // Every state must reach a deadlock, otherwise "at end" is undefined.
  std::vector<std::vector<std::size_t>> preds(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& t : d.transitions[s]) preds[t.target].push_back(s);
  }
  std::vector<bool> reaches(n, false);
  std::deque<std::size_t> work;
  for (std::size_t s = 0; s < n; ++s) {
    if (d.deadlock[s]) {
      reaches[s] = true;
      work.push_back(s);
    }
  }
  while (!work.empty()) {
    std::size_t s = work.front();
    work.pop_front();
    for (auto p : preds[s]) {
      if (!reaches[p]) {
        reaches[p] = true;
        work.push_back(p);
      }
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (!reaches[s]) {
      throw NoAbsorption("state " + std::to_string(s) +
                         " cannot reach a deadlock; give a horizon to analyse bounded runs");
    }
  }

  if (d.deadlock[0]) return base + end_value(0);

  std::vector<std::size_t> row(n, SIZE_MAX);
  std::vector<std::size_t> transient;
  for (std::size_t s = 0; s < n; ++s) {
    if (!d.deadlock[s]) {
      row[s] = transient.size();
      transient.push_back(s);
    }
  }
  std::vector<Rational> final_value(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (d.deadlock[s]) final_value[s] = end_value(s);
  }
  std::vector<std::map<std::size_t, Rational>> qm(transient.size());
  std::vector<Rational> b(transient.size());
  for (std::size_t i = 0; i < transient.size(); ++i) {
    std::size_t s = transient[i];
    if (!form.coef.empty()) b[i] = reward(s);
    for (const auto& t : d.transitions[s]) {
      if (d.deadlock[t.target]) {
        b[i] += t.mass * final_value[t.target];
      } else {
        qm[i][row[t.target]] += t.mass;
      }
    }
  }
  auto x = solve_absorbing(qm, b);
  return base + x[row[0]];
}

void export_tra(std::ostream& os, const Semantics& sem, const Dtmc& d) {
  os << d.size() << ' ' << d.transition_count() << '\n';
  for (std::size_t s = 0; s < d.size(); ++s) {
    for (const auto& t : d.transitions[s]) {
      os << s << ' ' << t.target << ' ' << to_decimal(t.mass, 12) << ' ' << sem.model().events()[t.event].name
         << '\n';
    }
  }
}

void export_sta(std::ostream& os, const Semantics& sem, const Dtmc& d) {
  for (std::size_t s = 0; s < d.size(); ++s) os << s << ' ' << state_label(sem, d, d.states[s], " ") << '\n';
}

void export_dot(std::ostream& os, const Semantics& sem, const Dtmc& d) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + '"';
  };
  os << "digraph dtmc {\n  node [shape=box];\n";
  for (std::size_t s = 0; s < d.size(); ++s) {
    os << "  s" << s << " [label=" << quote(std::to_string(s) + ": " + state_label(sem, d, d.states[s], ", "));
    if (d.deadlock[s]) os << ", peripheries=2";
    os << "];\n";
  }
  for (std::size_t s = 0; s < d.size(); ++s) {
    for (const auto& t : d.transitions[s]) {
      os << "  s" << s << " -> s" << t.target << " [label="
         << quote(sem.model().events()[t.event].name + " " + to_string(t.mass)) << "];\n";
    }
  }
  os << "}\n";
}

}  // namespace peb
