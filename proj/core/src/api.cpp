#include "evspace/api.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace evspace {

using nlohmann::json;

std::string format_display(double value) {
  if (value == 0.0 || !std::isfinite(value)) {
    return value == 0.0 ? "0" : std::to_string(value);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5e", value);
  const char* e = std::strchr(buf, 'e');
  const int exponent = e ? std::atoi(e + 1) : 0;
  const int decimals = exponent >= 5 ? 0 : 5 - exponent;
  std::vector<char> out(static_cast<std::size_t>(std::max(exponent, 0)) + decimals + 8);
  std::snprintf(out.data(), out.size(), "%.*f", decimals, value);
  return out.data();
}

std::string format_machine(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

json envelope(const CalcResult& result, json data) {
  json env;
  env["status"] = status_name(result.status());
  if (result.is_ok()) env["value"] = *result;
  if (!result.detail().empty()) env["detail"] = result.detail();
  if (result.warning()) env["warning"] = true;
  env["data"] = std::move(data);
  return env;
}

json ok_envelope(json data) {
  json env;
  env["status"] = status_name(Status::Ok);
  env["data"] = std::move(data);
  return env;
}

int http_status_for(Status status) {
  switch (status) {
    case Status::Ok:
      return 200;
    case Status::UnknownEvent:
      return 404;
    case Status::DuplicateName:
    case Status::BuiltInProtected:
      return 409;
    case Status::IoError:
      return 500;
    default:
      return 400;
  }
}

ApiResponse error_response(const Error& error) {
  return {http_status_for(error.status()), envelope(error.as_result())};
}

json status_vocabulary() {
  json names = json::array();
  for (Status s : kAllStatuses) names.push_back(status_name(s));
  return names;
}

json command_to_json(const CommandBinding& binding) {
  const MethodDefinition& m = *binding.method;
  json params = json::array();
  for (const auto& p : m.params) params.push_back({{"name", p.name}, {"kind", to_string(p.kind)}});
  return {{"name", m.name},
          {"caption", binding.caption},
          {"enabled", binding.enabled},
          {"builtin", m.builtin},
          {"params", params},
          {"source", m.source},
          {"description", m.description}};
}

json commands_json(const MethodRegistry& registry) {
  json out = json::array();
  for (const auto& c : registry.list_commands()) out.push_back(command_to_json(c));
  return out;
}

namespace {

std::string_view mode_name(ScaleMode mode) {
  switch (mode) {
    case ScaleMode::Multiply:
      return "multiply";
    case ScaleMode::ScaleField:
      return "scale-field";
    case ScaleMode::Auto:
      break;
  }
  return "auto";
}

const json& require(const json& request, const char* key) {
  if (!request.is_object() || !request.contains(key)) {
    throw Error(Status::SyntaxError, std::string("request lacks '") + key + "'");
  }
  return request[key];
}

std::string require_string(const json& request, const char* key) {
  const json& v = require(request, key);
  if (!v.is_string()) throw Error(Status::TypeError, std::string("'") + key + "' must be text");
  return v.get<std::string>();
}

}  // namespace

json sweep_to_json(const SweepResult& result) {
  json rows = json::array();
  for (const auto& row : result.rows) {
    json r;
    r["delta"] = row.delta;
    r["varied"] = row.varied ? json(*row.varied) : json(nullptr);
    r["status"] = status_name(row.result.status());
    if (row.result.is_ok()) r["value"] = *row.result;
    if (!row.result.detail().empty()) r["detail"] = row.result.detail();
    rows.push_back(std::move(r));
  }
  json out;
  out["mode"] = mode_name(result.mode);
  out["rows"] = std::move(rows);
  out["base_row"] = result.base_row ? json(*result.base_row) : json(nullptr);
  const auto crossing = crossover_estimate(result);
  out["crossover"] = crossing ? json(*crossing) : json(nullptr);
  return out;
}

Bindings bindings_from_json(const MethodDefinition& method, const json& bindings,
                            const CashFlowTable* table) {
  if (!bindings.is_object()) throw Error(Status::TypeError, "bindings must be an object");
  Bindings out;
  for (const auto& [name, value] : bindings.items()) {
    const Param* p = method.param(name);
    if (p == nullptr) {
      throw Error(Status::ArityError, method.name + " has no parameter '" + name + "'");
    }
    if (p->kind == ParamKind::Number) {
      if (!value.is_number()) {
        throw Error(Status::TypeError, "parameter '" + name + "' expects a number");
      }
      out.emplace(name, value.get<double>());
    } else {
      if (!value.is_string()) {
        throw Error(Status::TypeError, "parameter '" + name + "' expects a field name");
      }
      out.emplace(name, FieldRef{table, value.get<std::string>()});
    }
  }
  for (const auto& p : method.params) {
    if (out.count(p.name) == 0) {
      throw Error(Status::ArityError, method.name + ": parameter '" + p.name + "' is not bound");
    }
  }
  return out;
}

ApiResponse api_define(MethodRegistry& registry, const json& request) {
  try {
    std::vector<Param> params;
    const json& ps = require(request, "params");
    if (!ps.is_array()) throw Error(Status::TypeError, "'params' must be an array");
    for (const auto& p : ps) {
      if (!p.is_object() || !p.contains("name") || !p["name"].is_string() ||
          !p.contains("kind") || !p["kind"].is_string()) {
        throw Error(Status::SyntaxError, "each param needs text 'name' and 'kind'");
      }
      params.push_back({p["name"].get<std::string>(),
                        param_kind_from_string(p["kind"].get<std::string>())});
    }
    std::string description;
    if (request.contains("description")) {
      if (!request["description"].is_string()) {
        throw Error(Status::TypeError, "'description' must be text");
      }
      description = request["description"].get<std::string>();
    }
    CommandBinding binding =
        registry.define_method(require_string(request, "name"), std::move(params),
                               require_string(request, "source"), std::move(description));
    return {201, ok_envelope(command_to_json(binding))};
  } catch (const Error& e) {
    return error_response(e);
  }
}

ApiResponse api_evaluate(const MethodRegistry& registry, const CashFlowTable* table,
                         const json& request) {
  try {
    const std::string name = require_string(request, "method");
    auto method = registry.find(name);
    if (!method) throw Error(Status::UnknownEvent, "no method named '" + name + "'");
    const json bindings = request.value("bindings", json::object());
    Bindings b = bindings_from_json(*method, bindings, table);
    return {200, envelope(invoke_method(*method, b), {{"method", name}})};
  } catch (const Error& e) {
    return error_response(e);
  }
}

ApiResponse api_sensitivity(const MethodRegistry& registry, const CashFlowTable* table,
                            const json& request) {
  try {
    SweepSpec spec;
    spec.method = require_string(request, "method");
    auto method = registry.find(spec.method);
    if (!method) throw Error(Status::UnknownEvent, "no method named '" + spec.method + "'");
    spec.vary = require_string(request, "vary");
    if (method->param(spec.vary) == nullptr) {
      throw Error(Status::ArityError,
                  "'" + spec.vary + "' is not a parameter of " + spec.method);
    }
    spec.fixed = bindings_from_json(*method, request.value("bindings", json::object()), table);
    const json& deltas = require(request, "deltas");
    if (deltas.is_string()) {
      spec.deltas = parse_delta_range(deltas.get<std::string>());
    } else if (deltas.is_array()) {
      for (const auto& d : deltas) {
        if (!d.is_number()) throw Error(Status::TypeError, "deltas must be numbers");
        spec.deltas.push_back(d.get<double>());
      }
    } else {
      throw Error(Status::TypeError, "'deltas' must be an array or \"lo:hi:steps\"");
    }
    SweepResult result = sweep(*method, spec);
    json data = sweep_to_json(result);
    data["method"] = spec.method;
    data["vary"] = spec.vary;
    return {200, ok_envelope(std::move(data))};
  } catch (const Error& e) {
    return error_response(e);
  }
}

}  // namespace evspace
