// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "peb/semantics.hpp"

namespace peb {

enum class QueryKind { ExpectedAtEnd, ProbAtEnd, ProbReachWithin };

const char* to_string(QueryKind k);

struct Query {
  QueryKind kind = QueryKind::ExpectedAtEnd;
  ExprPtr expr;             // resolved against the model; no parameters
  std::uint64_t within = 0; // ProbReachWithin only
  std::string text;         // as given by the user, or the property name
};

/// Thrown for queries that do not parse, resolve or type-check.
class QueryError : public std::runtime_error {
 public:
  QueryError(const std::string& message, std::vector<Diagnostic> diagnostics = {})
      : std::runtime_error(message), diagnostics_(std::move(diagnostics)) {}
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// `text` names a property of the model or is an expression over constants
/// and variables. Predicates become ProbAtEnd, or ProbReachWithin when
/// `within` is given; integer expressions become ExpectedAtEnd.
Query make_query(const CheckedModel& model, const std::string& text,
                 std::optional<std::uint64_t> within = std::nullopt);

/// Query expression in state `s`, with booleans mapped to 1 and 0.
double state_value(const Semantics& sem, const Query& q, const MachineState& s);

/// Exact counterpart of state_value.
Rational state_value_exact(const Semantics& sem, const Query& q, const MachineState& s);

/// Truth of the query predicate in `s` (ProbAtEnd / ProbReachWithin).
bool state_holds(const Semantics& sem, const Query& q, const MachineState& s);

}  // namespace peb
