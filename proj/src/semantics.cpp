// SPDX-License-Identifier: Apache-2.0

#include "peb/semantics.hpp"

#include <unordered_map>

namespace peb {

std::size_t MachineState::hash() const {
  std::size_t h = 0x84222325cbf29ce4ULL;
  for (const auto& v : values) h = (h ^ v.hash()) * 0x100000001b3ULL;
  return h;
}

Rational TransitionDistribution::total() const {
  Rational sum = 0;
  for (const auto& t : entries) sum += t.mass;
  return sum;
}

Semantics::Semantics(std::shared_ptr<const CheckedModel> model) : model_(std::move(model)) {}

MachineState Semantics::initial_state() const { return MachineState{model_->initial_values}; }

std::vector<ParamValuation> Semantics::guard_valuations(const MachineState& s, std::size_t event) const {
  const Event& ev = model_->events()[event];
  std::vector<ParamValuation> out;
  ParamValuation current;
  current.reserve(ev.params.size());

  auto guard_holds = [&]() {
    return !ev.guard || eval_bool(*ev.guard, env(s, &current));
  };

  // Depth-first over the parameter domains; later domains may mention
  // earlier parameters.
  auto expand = [&](auto& self, std::size_t i) -> void {
    if (i == ev.params.size()) {
      if (guard_holds()) out.push_back(current);
      return;
    }
    const Expr& dom = *ev.params[i].domain;
    Value set = eval(dom, env(s, &current));
    if (!set.is_set()) {
      throw EvalError(ErrorKind::KindMismatch, "parameter domain is not a set", dom.span);
    }
    for (const auto& v : set.elements()) {
      current.push_back(v);
      self(self, i + 1);
      current.pop_back();
    }
  };
  expand(expand, 0);
  return out;
}

std::int64_t Semantics::weight(const MachineState& s, std::size_t event) const {
  const Event& ev = model_->events()[event];
  return ev.weight ? eval_int(*ev.weight, env(s)) : 1;
}

EventStatus Semantics::event_status(const MachineState& s, std::size_t event) const {
  std::int64_t w = weight(s, event);
  if (w <= 0) return EventStatus::blocked();
  const Event& ev = model_->events()[event];
  if (ev.params.empty()) {
    ParamValuation none;
    if (ev.guard && !eval_bool(*ev.guard, env(s, &none))) return EventStatus::blocked();
    return EventStatus::enabled_with(w);
  }
  return guard_valuations(s, event).empty() ? EventStatus::blocked() : EventStatus::enabled_with(w);
}

std::vector<EventStatus> Semantics::statuses(const MachineState& s) const {
  std::vector<EventStatus> out;
  out.reserve(event_count());
  for (std::size_t i = 0; i < event_count(); ++i) out.push_back(event_status(s, i));
  return out;
}

std::vector<Weighted<Value>> Semantics::variable_outcomes(const MachineState& s, const ParamValuation& params,
                                                          const Assignment& a) const {
  Env e = env(s, &params);
  std::vector<Weighted<Value>> out;
  auto add = [&](Value v, const Rational& p) {
    for (auto& o : out) {
      if (o.value == v) {
        o.mass += p;
        return;
      }
    }
    out.push_back({std::move(v), p});
  };
  switch (a.kind) {
    case AssignKind::Deterministic:
      out.push_back({eval(*a.exprs[0], e), Rational(1)});
      break;
    case AssignKind::UniformSet: {
      Value set = eval(*a.exprs[0], e);
      if (!set.is_set()) throw EvalError(ErrorKind::KindMismatch, "':in' expects a set", a.exprs[0]->span);
      if (set.size() == 0) {
        throw EvalError(ErrorKind::EmptyChoice, "uniform choice from the empty set", a.exprs[0]->span);
      }
      Rational p(1, set.size());
      for (const auto& v : set.elements()) out.push_back({v, p});
      break;
    }
    case AssignKind::UniformList: {
      Rational p(1, a.exprs.size());
      for (const auto& x : a.exprs) add(eval(*x, e), p);
      break;
    }
    case AssignKind::Enumerated:
      for (std::size_t i = 0; i < a.exprs.size(); ++i) add(eval(*a.exprs[i], e), a.probs[i]);
      break;
  }
  return out;
}

std::vector<Weighted<MachineState>> Semantics::assignment_outcomes(const MachineState& s,
                                                                   const ParamValuation& params,
                                                                   std::size_t event) const {
  const Event& ev = model_->events()[event];
  std::vector<Weighted<MachineState>> joint{{s, Rational(1)}};
  for (const auto& a : ev.actions) {
    auto outcomes = variable_outcomes(s, params, a);
    std::vector<Weighted<MachineState>> next;
    next.reserve(joint.size() * outcomes.size());
    for (const auto& j : joint) {
      for (const auto& o : outcomes) {
        MachineState t = j.value;
        t.values[a.target_index] = o.value;
        next.push_back({std::move(t), j.mass * o.mass});
      }
    }
    joint = std::move(next);
  }
  return joint;
}

TransitionDistribution Semantics::successor_distribution(const MachineState& s) const {
  TransitionDistribution dist;
  auto st = statuses(s);
  std::int64_t total = 0;
  for (const auto& x : st) {
    if (x.enabled && __builtin_add_overflow(total, x.weight, &total)) {
      throw EvalError(ErrorKind::IntegerOverflow, "sum of event weights overflows", {});
    }
  }
  if (total == 0) return dist;
  for (std::size_t e = 0; e < st.size(); ++e) {
    if (!st[e].enabled) continue;
    auto vals = guard_valuations(s, e);
    Rational scale = ratio(st[e].weight, total) / Rational(static_cast<long>(vals.size()));
    std::unordered_map<MachineState, std::size_t, MachineStateHash> index;
    for (const auto& pv : vals) {
      for (auto& o : assignment_outcomes(s, pv, e)) {
        Rational m = scale * o.mass;
        auto [it, fresh] = index.emplace(o.value, dist.entries.size());
        if (fresh) {
          dist.entries.push_back({e, std::move(o.value), std::move(m)});
        } else {
          dist.entries[it->second].mass += m;
        }
      }
    }
  }
  return dist;
}

std::vector<std::size_t> Semantics::violated_monitors(const MachineState& s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < model_->monitors.size(); ++i) {
    if (!eval_bool(*model_->monitors[i], env(s))) out.push_back(i);
  }
  return out;
}

}  // namespace peb
