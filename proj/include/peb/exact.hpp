// SPDX-License-Identifier: Apache-2.0
//
// Explicit-state construction of the reachable DTMC and exact transient and
// absorption analysis over rationals.
//
// Counter variables that only ever grow by deterministic increments (`n :=
// n + e`) and influence nothing else can be projected out of the state. Such
// an accumulator is pinned to its initial value in every explored state, and
// each transition records the mass-weighted increment instead. This keeps
// chains finite whose only unbounded component is a counter.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "peb/query.hpp"
#include "peb/semantics.hpp"

namespace peb {

class StateBound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoAbsorption : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DtmcTransition {
  std::size_t event = 0;
  std::size_t target = 0;
  Rational mass;
  std::vector<Rational> reward;  // per accumulator: sum of mass * increment
};

struct Dtmc {
  std::vector<MachineState> states;  // BFS discovery order; 0 is initial
  std::vector<std::vector<DtmcTransition>> transitions;
  std::vector<bool> deadlock;
  std::vector<std::size_t> accumulators;  // projected variable indices

  std::size_t size() const { return states.size(); }
  std::size_t transition_count() const;
};

struct BuildOptions {
  std::size_t max_states = 1'000'000;
  std::vector<std::size_t> abstract_vars;  // must be accumulators
  /// Bound on the stored values, counting each set element; keeps memory in
  /// check when states are large.
  std::size_t max_values = std::size_t{1} << 25;
};

/// Integer variables whose every assignment is `v := v + e`, `v := e + v` or
/// `v := v - e` with `e` free of v, and which no guard, weight, parameter
/// domain, other right-hand side or runtime invariant mentions.
std::vector<std::size_t> find_accumulators(const CheckedModel& model);

/// Accumulators that can stay abstract for `q`: all of them for expected
/// values linear in the accumulators, otherwise those the query ignores.
std::vector<std::size_t> accumulators_for(const CheckedModel& model, const Query* q);

Dtmc build_dtmc(const Semantics& sem, const BuildOptions& options = {});

/// ExpectedAtEnd / ProbAtEnd from the absorption distribution, or from the
/// distribution after `horizon` steps when given. ProbReachWithin(phi, k) by
/// k-step propagation with phi-states absorbing.
Rational exact_query(const Semantics& sem, const Dtmc& dtmc, const Query& q,
                     std::optional<std::uint64_t> horizon = std::nullopt);

void export_tra(std::ostream& os, const Semantics& sem, const Dtmc& dtmc);
void export_sta(std::ostream& os, const Semantics& sem, const Dtmc& dtmc);
void export_dot(std::ostream& os, const Semantics& sem, const Dtmc& dtmc);

}  // namespace peb
