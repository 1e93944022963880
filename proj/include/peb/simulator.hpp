// SPDX-License-Identifier: Apache-2.0
//
// Seeded Monte-Carlo execution. Each step runs three phases: compute event
// statuses, pick the next event by accumulated weight, then execute it with
// sampled parameter and assignment choices.
//
// Draw order per step: (1) the event sample r in [0, sum of weights),
// (2) a parameter-valuation index when the event declares parameters,
// (3) one sample per probabilistic assignment in action order (uniform index
// for `:in` and lists, a 53-bit uniform real for enumerated choices).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "peb/random.hpp"
#include "peb/semantics.hpp"

namespace peb {

/// Index of the first enabled event whose accumulated weight is strictly
/// greater than r. Requires 0 <= r < sum of enabled weights.
std::size_t pick_event(std::span<const EventStatus> statuses, std::int64_t r);

enum class Termination { Deadlock, StepBound, StopPredicate };

const char* to_string(Termination t);

struct RunConfig {
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 1'000'000;
  ExprPtr stop_predicate;  // resolved against the model; may be null
};

struct StepResult {
  std::size_t event = 0;
  MachineState state;
};

struct TraceStep {
  std::uint64_t step = 0;  // 1-based
  std::size_t event = 0;
  MachineState state;
};

struct Trace {
  MachineState initial;
  std::vector<TraceStep> steps;
  Termination reason = Termination::Deadlock;
  std::uint64_t seed = 0;

  const MachineState& final_state() const { return steps.empty() ? initial : steps.back().state; }
  /// State after `k` steps, clamped to the end of the trace.
  const MachineState& state_at(std::uint64_t k) const;
};

inline constexpr std::size_t kNoEvent = static_cast<std::size_t>(-1);

/// Receives every state of a run, starting with the initial state at step 0
/// (whose event is kNoEvent). Returning true ends the run early, reported as
/// StopPredicate.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual bool observe(std::uint64_t step, std::size_t event, const MachineState& state) = 0;
};

struct RunSummary {
  MachineState final_state;
  std::uint64_t steps = 0;
  Termination reason = Termination::Deadlock;
};

/// Memo of per-state event statuses and guard valuations for runs that
/// revisit states. Purely a speed-up: results do not depend on it. Stops
/// caching once its value budget is spent, and gives up entirely when states
/// rarely repeat. Not thread-safe; use one per thread.
class StepCache {
 public:
  explicit StepCache(std::size_t budget = std::size_t{1} << 18) : budget_(budget) {}

  std::size_t size() const { return map_.size(); }

 private:
  friend class Simulator;

  struct Entry {
    std::vector<EventStatus> statuses;
    std::vector<std::vector<ParamValuation>> valuations;
    std::int64_t total = 0;
  };

  const Entry* find(const MachineState& s);
  /// Moves `e` into the cache and returns it, or returns null and leaves `e`
  /// untouched when over budget.
  const Entry* insert(const MachineState& s, Entry& e);

  std::unordered_map<MachineState, Entry, MachineStateHash> map_;
  std::size_t budget_;
  std::size_t used_ = 0;
  std::uint64_t lookups_ = 0;
  std::uint64_t hits_ = 0;
  bool disabled_ = false;
};

class Simulator {
 public:
  explicit Simulator(const Semantics& semantics);

  const Semantics& semantics() const { return sem_; }

  /// One transition, or nullopt on deadlock.
  std::optional<StepResult> step(const MachineState& s, RandomSource& rng, StepCache* cache = nullptr) const;

  Trace run(const RunConfig& config) const;

  /// Runs without recording a trace. A private cache is used when `cache`
  /// is null.
  RunSummary run(const RunConfig& config, RandomSource& rng, RunObserver* observer,
                 StepCache* cache = nullptr) const;

 private:
  StepCache::Entry enabled_events(const MachineState& s) const;

  Value sample_assignment(const Assignment& a, const std::vector<double>& cumulative, const Env& env,
                          RandomSource& rng) const;

  const Semantics& sem_;
  // Per event, per action: cumulative masses of enumerated assignments.
  std::vector<std::vector<std::vector<double>>> cumulative_;
};

/// One JSON object per line: {"step", "event", "state"}; the initial state is
/// step 0 with a null event.
void write_trace_jsonl(std::ostream& os, const CheckedModel& model, const Trace& trace);

}  // namespace peb
