// SPDX-License-Identifier: Apache-2.0

#include "peb/json_io.hpp"

namespace peb {

nlohmann::json to_json(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Int: return v.as_int();
    case ValueKind::Bool: return v.as_bool();
    case ValueKind::Sym: return v.as_sym().name();
    case ValueKind::Pair: return nlohmann::json::array({to_json(v.first()), to_json(v.second())});
    case ValueKind::Set: {
      auto elems = nlohmann::json::array();
      for (const auto& x : v.elements()) elems.push_back(to_json(x));
      return {{"set", elems}};
    }
  }
  return nullptr;
}

nlohmann::json to_json(const CheckedModel& model, const MachineState& s) {
  auto obj = nlohmann::json::object();
  for (std::size_t i = 0; i < s.values.size(); ++i) obj[model.variable_names[i]] = to_json(s.values[i]);
  return obj;
}

nlohmann::json to_json(const Diagnostic& d) {
  nlohmann::json j = {{"severity", d.severity == Severity::Error ? "error" : "warning"},
                      {"message", d.message}};
  if (d.span.line) {
    j["file"] = d.span.file_name();
    j["line"] = d.span.line;
    j["column"] = d.span.column;
  }
  return j;
}

}  // namespace peb
