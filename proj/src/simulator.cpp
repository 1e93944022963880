// SPDX-License-Identifier: Apache-2.0

#include "peb/simulator.hpp"

#include <ostream>

#include "peb/json_io.hpp"

namespace peb {

std::size_t pick_event(std::span<const EventStatus> statuses, std::int64_t r) {
  std::int64_t acc = 0;
  std::size_t last = statuses.size();
  for (std::size_t i = 0; i < statuses.size(); ++i) {
    if (!statuses[i].enabled) continue;
    acc += statuses[i].weight;
    last = i;
    if (acc > r) return i;
  }
  return last;
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Deadlock: return "deadlock";
    case Termination::StepBound: return "step-bound";
    case Termination::StopPredicate: return "stop-predicate";
  }
  return "?";
}

const MachineState& Trace::state_at(std::uint64_t k) const {
  if (k == 0 || steps.empty()) return initial;
  return k >= steps.size() ? steps.back().state : steps[k - 1].state;
}

Simulator::Simulator(const Semantics& semantics) : sem_(semantics) {
  for (const auto& ev : sem_.model().events()) {
    std::vector<std::vector<double>> per_action;
    for (const auto& a : ev.actions) {
      std::vector<double> cum;
      if (a.kind == AssignKind::Enumerated) {
        Rational acc = 0;
        for (const auto& p : a.probs) {
          acc += p;
          cum.push_back(acc.get_d());
        }
        cum.back() = 1.0;
      }
      per_action.push_back(std::move(cum));
    }
    cumulative_.push_back(std::move(per_action));
  }
}

Value Simulator::sample_assignment(const Assignment& a, const std::vector<double>& cumulative, const Env& env,
                                   RandomSource& rng) const {
  switch (a.kind) {
    case AssignKind::Deterministic:
      return eval(*a.exprs[0], env);
    case AssignKind::UniformSet: {
      Value set = eval(*a.exprs[0], env);
      if (!set.is_set()) throw EvalError(ErrorKind::KindMismatch, "':in' expects a set", a.exprs[0]->span);
      if (set.size() == 0) {
        throw EvalError(ErrorKind::EmptyChoice, "uniform choice from the empty set", a.exprs[0]->span);
      }
      return set.elements()[rng.uniform_index(set.size())];
    }
    case AssignKind::UniformList:
      return eval(*a.exprs[rng.uniform_index(a.exprs.size())], env);
    case AssignKind::Enumerated: {
      double u = rng.uniform_real();
      std::size_t k = 0;
      while (k + 1 < cumulative.size() && !(u < cumulative[k])) ++k;
      return eval(*a.exprs[k], env);
    }
  }
  return {};
}

const StepCache::Entry* StepCache::find(const MachineState& s) {
  if (disabled_) return nullptr;
  ++lookups_;
  auto it = map_.find(s);
  if (it != map_.end()) {
    ++hits_;
    return &it->second;
  }
  if (lookups_ >= 4096 && hits_ * 8 < lookups_) {
    disabled_ = true;
    map_.clear();
  }
  return nullptr;
}

const StepCache::Entry* StepCache::insert(const MachineState& s, Entry& e) {
  if (disabled_) return nullptr;
  std::size_t cost = 1 + s.values.size();
  for (const auto& v : e.valuations) {
    for (const auto& p : v) cost += p.size();
  }
  if (used_ + cost > budget_) return nullptr;
  used_ += cost;
  return &map_.emplace(s, std::move(e)).first->second;
}

StepCache::Entry Simulator::enabled_events(const MachineState& s) const {
  const auto& events = sem_.model().events();
  const std::size_t n = events.size();
  StepCache::Entry out;
  out.statuses.resize(n);
  out.valuations.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    std::int64_t w = sem_.weight(s, e);
    if (w <= 0) continue;
    if (events[e].params.empty()) {
      if (events[e].guard && !eval_bool(*events[e].guard, sem_.env(s))) continue;
    } else {
      out.valuations[e] = sem_.guard_valuations(s, e);
      if (out.valuations[e].empty()) continue;
    }
    out.statuses[e] = EventStatus::enabled_with(w);
    if (__builtin_add_overflow(out.total, w, &out.total)) {
      throw EvalError(ErrorKind::IntegerOverflow, "sum of event weights overflows", events[e].span);
    }
  }
  return out;
}

std::optional<StepResult> Simulator::step(const MachineState& s, RandomSource& rng, StepCache* cache) const {
  // Phase 1: statuses.
  const StepCache::Entry* entry = cache ? cache->find(s) : nullptr;
  StepCache::Entry local;
  if (!entry) {
    local = enabled_events(s);
    entry = &local;
    if (cache) {
      if (const auto* kept = cache->insert(s, local)) entry = kept;
    }
  }
  if (entry->total == 0) return std::nullopt;

  // Phase 2: next event.
  auto r = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(entry->total)));
  std::size_t chosen = pick_event(entry->statuses, r);
  const Event& ev = sem_.model().events()[chosen];

  // Phase 3: execute against the pre-state.
  const ParamValuation* params = nullptr;
  if (!ev.params.empty()) {
    const auto& vals = entry->valuations[chosen];
    params = &vals[rng.uniform_index(vals.size())];
  }
  Env env = sem_.env(s, params);
  StepResult out{chosen, s};
  for (std::size_t i = 0; i < ev.actions.size(); ++i) {
    const Assignment& a = ev.actions[i];
    out.state.values[a.target_index] = sample_assignment(a, cumulative_[chosen][i], env, rng);
  }
  return out;
}

namespace {

EvalError at_step(const EvalError& e, std::uint64_t step) {
  return EvalError(e.kind(), "at step " + std::to_string(step) + ": " + e.what(), e.span());
}

class TraceRecorder final : public RunObserver {
 public:
  explicit TraceRecorder(Trace& t) : trace_(t) {}
  bool observe(std::uint64_t step, std::size_t event, const MachineState& state) override {
    if (step == 0) {
      trace_.initial = state;
    } else {
      trace_.steps.push_back({step, event, state});
    }
    return false;
  }

 private:
  Trace& trace_;
};

}  // namespace

RunSummary Simulator::run(const RunConfig& config, RandomSource& rng, RunObserver* observer,
                          StepCache* cache) const {
  if (config.max_steps == 0) throw std::invalid_argument("max_steps must be at least 1");
  StepCache own;
  if (!cache) cache = &own;
  RunSummary out;
  out.final_state = sem_.initial_state();
  auto stop = [&](std::uint64_t k, std::size_t event) {
    try {
      if (observer && observer->observe(k, event, out.final_state)) return true;
      return config.stop_predicate && eval_bool(*config.stop_predicate, sem_.env(out.final_state));
    } catch (const EvalError& e) {
      throw at_step(e, k);
    }
  };
  if (stop(0, kNoEvent)) {
    out.reason = Termination::StopPredicate;
    return out;
  }
  for (std::uint64_t k = 1;; ++k) {
    if (k > config.max_steps) {
      out.reason = Termination::StepBound;
      return out;
    }
    std::optional<StepResult> next;
    try {
      next = step(out.final_state, rng, cache);
    } catch (const EvalError& e) {
      throw at_step(e, k);
    }
    if (!next) {
      out.reason = Termination::Deadlock;
      return out;
    }
    out.final_state = std::move(next->state);
    out.steps = k;
    if (stop(k, next->event)) {
      out.reason = Termination::StopPredicate;
      return out;
    }
  }
}

Trace Simulator::run(const RunConfig& config) const {
  Trace trace;
  trace.seed = config.seed;
  TraceRecorder recorder(trace);
  Rng rng(config.seed);
  trace.reason = run(config, rng, &recorder).reason;
  return trace;
}

void write_trace_jsonl(std::ostream& os, const CheckedModel& model, const Trace& trace) {
  os << nlohmann::json{{"step", 0}, {"event", nullptr}, {"state", to_json(model, trace.initial)}}.dump()
     << '\n';
  for (const auto& s : trace.steps) {
    os << nlohmann::json{{"step", s.step},
                         {"event", model.events()[s.event].name},
                         {"state", to_json(model, s.state)}}
              .dump()
       << '\n';
  }
}

}  // namespace peb
