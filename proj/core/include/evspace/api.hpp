#pragma once

// Request handling shared by the CLI and the HTTP service, so both surfaces
// produce byte-identical machine output for the same input.
//
// Envelope: {"status": <wire status>, "value": <number, Ok only>,
//            "detail": <text, when non-empty>, "warning": true (when set),
//            "data": {...}}

#include <string>

#include <nlohmann/json.hpp>

#include "evspace/method_registry.hpp"
#include "evspace/project_model.hpp"
#include "evspace/sensitivity.hpp"

namespace evspace {

/// Fixed notation, 6 significant digits.
std::string format_display(double value);
/// Shortest text that reads back to the same double.
std::string format_machine(double value);

struct ApiResponse {
  int http_status = 200;
  nlohmann::json body;
};

nlohmann::json envelope(const CalcResult& result,
                        nlohmann::json data = nlohmann::json::object());
/// Envelope for successful non-evaluation operations (no value).
nlohmann::json ok_envelope(nlohmann::json data);
ApiResponse error_response(const Error& error);
int http_status_for(Status status);

/// Every wire status name, in enumeration order.
nlohmann::json status_vocabulary();

nlohmann::json command_to_json(const CommandBinding& binding);
nlohmann::json commands_json(const MethodRegistry& registry);
nlohmann::json sweep_to_json(const SweepResult& result);

/// Numbers bind number parameters; strings name fields of `table`.
/// Throws ArityError / TypeError.
Bindings bindings_from_json(const MethodDefinition& method, const nlohmann::json& bindings,
                            const CashFlowTable* table);

/// {name, params: [{name, kind}], source, description}
ApiResponse api_define(MethodRegistry& registry, const nlohmann::json& request);
/// {method, bindings}
ApiResponse api_evaluate(const MethodRegistry& registry, const CashFlowTable* table,
                         const nlohmann::json& request);
/// {method, bindings, vary, deltas: [..] or "lo:hi:steps"}
ApiResponse api_sensitivity(const MethodRegistry& registry, const CashFlowTable* table,
                            const nlohmann::json& request);

}  // namespace evspace
