// SPDX-License-Identifier: Apache-2.0
//
// One-step semantics of a checked machine: event statuses, parameter
// valuations, assignment outcome distributions and the transition
// probability function T(s, e, s').

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "peb/evaluator.hpp"
#include "peb/parser.hpp"
#include "peb/rational.hpp"

namespace peb {

/// Valuation of the machine variables, indexed like CheckedModel::variable_names.
struct MachineState {
  std::vector<Value> values;

  friend bool operator==(const MachineState&, const MachineState&) = default;
  std::size_t hash() const;
};

struct MachineStateHash {
  std::size_t operator()(const MachineState& s) const { return s.hash(); }
};

struct EventStatus {
  bool enabled = false;
  std::int64_t weight = 0;  // > 0 when enabled

  static EventStatus blocked() { return {}; }
  static EventStatus enabled_with(std::int64_t w) { return {true, w}; }
  friend bool operator==(const EventStatus&, const EventStatus&) = default;
};

/// One assignment of values to the event parameters, in declaration order.
using ParamValuation = std::vector<Value>;

template <class T>
struct Weighted {
  T value;
  Rational mass;
};

struct Transition {
  std::size_t event = 0;
  MachineState target;
  Rational mass;
};

struct TransitionDistribution {
  std::vector<Transition> entries;  // empty iff deadlock

  bool deadlock() const { return entries.empty(); }
  Rational total() const;
};

/// Thin handle bundling a checked model with the environment plumbing shared
/// by the simulator and the exact engine.
class Semantics {
 public:
  explicit Semantics(std::shared_ptr<const CheckedModel> model);

  const CheckedModel& model() const { return *model_; }
  std::size_t event_count() const { return model_->events().size(); }

  MachineState initial_state() const;

  Env env(const MachineState& s, const ParamValuation* params = nullptr) const {
    return Env{model_->constants, s.values,
               params ? std::span<const Value>(*params) : std::span<const Value>()};
  }

  /// Guard-satisfying parameter valuations in canonical order. A
  /// parameterless event yields one empty valuation when its guard holds.
  std::vector<ParamValuation> guard_valuations(const MachineState& s, std::size_t event) const;

  std::int64_t weight(const MachineState& s, std::size_t event) const;
  EventStatus event_status(const MachineState& s, std::size_t event) const;
  std::vector<EventStatus> statuses(const MachineState& s) const;

  /// Outcome distribution of one assignment, with equal values aggregated.
  /// Outcomes keep the order in which they first appear.
  std::vector<Weighted<Value>> variable_outcomes(const MachineState& s, const ParamValuation& params,
                                                 const Assignment& a) const;

  /// Joint distribution over successor states for a fixed parameter valuation.
  std::vector<Weighted<MachineState>> assignment_outcomes(const MachineState& s,
                                                          const ParamValuation& params,
                                                          std::size_t event) const;

  TransitionDistribution successor_distribution(const MachineState& s) const;

  /// Runtime invariants (non-typing INVARIANTS) that fail in `s`.
  std::vector<std::size_t> violated_monitors(const MachineState& s) const;

 private:
  std::shared_ptr<const CheckedModel> model_;
};

}  // namespace peb
