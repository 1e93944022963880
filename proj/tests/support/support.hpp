// SPDX-License-Identifier: Apache-2.0
//
// Helpers shared by the unit tests and the acceptance runner.

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "peb/parser.hpp"
#include "peb/semantics.hpp"

namespace peb::testing {

using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Directory holding the bundled models.
std::string models_dir();

/// Parses, applies `--const`-style overrides and checks; throws
/// std::runtime_error carrying the diagnostics on failure.
std::shared_ptr<const CheckedModel> load_text(std::string_view text, const Overrides& overrides = {});
std::shared_ptr<const CheckedModel> load_file(const std::string& name, const Overrides& overrides = {});

/// Source text of a random machine over a small bounded state space. Every
/// generated model passes check_model and has finitely many reachable
/// states. Uses weights that may vanish, parameters with guards that mention
/// them, uniform and enumerated assignments.
std::string random_model_source(std::mt19937_64& rng);

/// Random scalar of the given kind tag (0 symbol, 1 bool, 2 int).
Value random_scalar(std::mt19937_64& rng, int kind);
/// Random set of small integers.
Value random_int_set(std::mt19937_64& rng, std::size_t max_size = 6);
/// Random relation from small integers to symbols.
Value random_relation(std::mt19937_64& rng, std::size_t max_size = 6);
/// Random set of symbols.
Value random_symbol_set(std::mt19937_64& rng);
/// Random Value of any kind, sets included.
Value random_value(std::mt19937_64& rng);

/// Distinct non-deadlocked states met on random walks from the initial
/// state, in discovery order.
std::vector<MachineState> sample_reachable(const Semantics& sem, std::size_t count, std::uint64_t seed,
                                           std::size_t max_walk = 200);

}  // namespace peb::testing
