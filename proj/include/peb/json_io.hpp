// SPDX-License-Identifier: Apache-2.0
//
// JSON encodings shared by the CLI and the trace writer. Integers map to
// numbers, booleans to booleans, symbols to strings, pairs to two-element
// arrays and sets to {"set": [...]}.

#pragma once

#include <json.hpp>

#include "peb/parser.hpp"
#include "peb/semantics.hpp"

namespace peb {

nlohmann::json to_json(const Value& v);
nlohmann::json to_json(const CheckedModel& model, const MachineState& s);
nlohmann::json to_json(const Diagnostic& d);

}  // namespace peb
