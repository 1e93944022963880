// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "peb/ast.hpp"

namespace peb {

struct ParseResult {
  std::optional<Model> model;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return model.has_value(); }
};

/// Parses the textual `.peb` format: any number of CONTEXT blocks (at most
/// one) and MACHINE blocks (at most one), in any order.
ParseResult parse_model(std::string_view source, const std::string& file_name = "<input>");

/// Merges separately parsed context and machine files.
ParseResult merge_models(std::vector<Model> parts);

struct ExprParseResult {
  ExprPtr expr;
  std::vector<Diagnostic> diagnostics;
};

/// Parses a standalone expression (queries, stop predicates, overrides).
ExprParseResult parse_expression(std::string_view text, const std::string& file_name = "<expr>");

std::string pretty_print(const Model& model);
std::string pretty_print(const Expr& expr);

/// Replaces the initializer of context constant `name` with `value`.
/// Returns false when no such constant exists.
bool override_constant(Model& model, const std::string& name, ExprPtr value);

/// What an identifier means in the global scope of a checked model.
struct NameInfo {
  RefKind kind = RefKind::None;
  std::uint32_t index = 0;
  BuiltinSet builtin = BuiltinSet::Nat;
  Value literal;
  Type type;
};

/// A model that passed every static check, with resolved expression trees and
/// evaluated constants and initial values.
struct CheckedModel {
  Model model;

  std::vector<std::string> constant_names;
  std::vector<Type> constant_types;
  std::vector<Value> constants;

  std::vector<std::string> variable_names;
  std::vector<Type> variable_types;
  std::vector<ExprPtr> variable_domains;  // right-hand sides of `x : A`
  std::vector<ExprPtr> monitors;          // non-typing invariants
  std::vector<Value> initial_values;

  std::vector<std::pair<std::string, Value>> deferred_sets;
  std::unordered_map<std::string, NameInfo> names;

  const Machine& machine() const { return *model.machine; }
  const std::vector<Event>& events() const { return model.machine->events; }
  std::optional<std::size_t> variable_index(const std::string& name) const;
  std::optional<std::size_t> event_index(const std::string& name) const;
  /// By name, or by 1-based position for unnamed properties.
  const Property* property(const std::string& name) const;
};

struct CheckResult {
  std::shared_ptr<const CheckedModel> model;  // null when errors were found
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return model != nullptr; }
};

/// Static well-formedness: resolution, typing invariants, initialisation,
/// DTMC obligations (integer weights, enumerated probabilities in (0,1]
/// summing to exactly 1) and the single-assignment rule. Reports every
/// violation rather than stopping at the first.
CheckResult check_model(const Model& model);

/// Resolves an expression against the constants and variables of `model`
/// (no parameters). Returns null and appends diagnostics on failure.
ExprPtr resolve_expression(const CheckedModel& model, const ExprPtr& expr,
                           std::vector<Diagnostic>& diagnostics);

/// Resolves against an explicit name table (used for ad-hoc evaluation).
ExprPtr resolve_with_names(const ExprPtr& expr, const std::unordered_map<std::string, NameInfo>& names,
                           std::vector<Diagnostic>& diagnostics);

}  // namespace peb
