#include "evspace/sensitivity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "evspace/api.hpp"

namespace evspace {

SweepResult sweep(const MethodRegistry& registry, const SweepSpec& spec) {
  auto method = registry.find(spec.method);
  if (!method) throw Error(Status::UnknownEvent, "no method named '" + spec.method + "'");
  return sweep(*method, spec);
}

SweepResult sweep(const MethodDefinition& method, const SweepSpec& spec) {
  const Param* varied = method.param(spec.vary);
  if (varied == nullptr) {
    throw Error(Status::ArityError,
                "'" + spec.vary + "' is not a parameter of " + method.name);
  }
  for (const auto& p : method.params) {
    auto it = spec.fixed.find(p.name);
    if (it == spec.fixed.end()) {
      throw Error(Status::ArityError, "parameter '" + p.name + "' is not bound");
    }
    const bool is_number = std::holds_alternative<double>(it->second);
    if (is_number != (p.kind == ParamKind::Number)) {
      throw Error(Status::TypeError, "parameter '" + p.name + "' expects a " +
                                         std::string(to_string(p.kind)));
    }
  }
  if (spec.fixed.size() != method.params.size()) {
    throw Error(Status::ArityError, "bindings name parameters " + method.name + " does not have");
  }
  if (spec.deltas.empty()) throw Error(Status::DomainError, "no deltas to sweep");
  for (double d : spec.deltas) {
    if (!std::isfinite(d) || d <= -1.0) {
      throw Error(Status::DomainError, "every delta must be finite and greater than -1");
    }
  }

  const ScaleMode natural =
      varied->kind == ParamKind::Number ? ScaleMode::Multiply : ScaleMode::ScaleField;
  if (spec.scale_mode != ScaleMode::Auto && spec.scale_mode != natural) {
    throw Error(Status::TypeError, "scale mode does not match the kind of '" + spec.vary + "'");
  }

  std::vector<double> deltas = spec.deltas;
  std::stable_sort(deltas.begin(), deltas.end());

  SweepResult result;
  result.mode = natural;
  for (double d : deltas) {
    SweepRow row;
    row.delta = d;
    Bindings bindings = spec.fixed;
    const Binding& base = spec.fixed.find(spec.vary)->second;
    std::optional<CashFlowTable> scaled_table;
    if (natural == ScaleMode::Multiply) {
      const double v = std::get<double>(base) * (1.0 + d);
      row.varied = v;
      bindings[spec.vary] = v;
      row.result = invoke_method(method, bindings);
    } else {
      const FieldRef& ref = std::get<FieldRef>(base);
      const std::vector<double>* values = ref.table ? ref.table->field(ref.name) : nullptr;
      if (values == nullptr) {
        row.result = CalcResult::fail(Status::FieldNotFound,
                                      "appointed field '" + ref.name + "' is not in existence");
      } else if (d == 0.0) {
        row.varied = std::accumulate(values->begin(), values->end(), 0.0);
        row.result = invoke_method(method, bindings);
      } else {
        std::vector<double> scaled(*values);
        for (double& v : scaled) v *= 1.0 + d;
        row.varied = std::accumulate(scaled.begin(), scaled.end(), 0.0);
        scaled_table.emplace(*ref.table);
        scaled_table->replace_field(ref.name, std::move(scaled));
        bindings[spec.vary] = FieldRef{&*scaled_table, ref.name};
        row.result = invoke_method(method, bindings);
      }
    }
    if (d == 0.0 && !result.base_row) result.base_row = result.rows.size();
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::optional<double> crossover_estimate(const SweepResult& result) {
  const SweepRow* prev = nullptr;
  for (const auto& row : result.rows) {
    if (!row.result.is_ok()) continue;
    const double v = *row.result;
    if (prev != nullptr) {
      const double pv = *prev->result;
      if (pv == 0.0) return prev->delta;
      if (v == 0.0) return row.delta;
      if ((pv < 0.0) != (v < 0.0)) {
        return prev->delta + (0.0 - pv) * (row.delta - prev->delta) / (v - pv);
      }
    }
    prev = &row;
  }
  return std::nullopt;
}

std::string sweep_table(const SweepResult& result) {
  std::string out = "delta,value,status\n";
  for (const auto& row : result.rows) {
    out += format_machine(row.delta);
    out += ',';
    if (row.result.is_ok()) out += format_machine(*row.result);
    out += ',';
    out += status_name(row.result.status());
    out += '\n';
  }
  return out;
}

namespace {

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw Error(Status::SyntaxError, "'" + std::string(text) + "' is not a number");
  }
  return v;
}

}  // namespace

std::vector<double> parse_delta_range(std::string_view text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(':', c1 + 1);
  if (c1 == std::string_view::npos || c2 == std::string_view::npos) {
    throw Error(Status::SyntaxError, "deltas must look like lo:hi:steps");
  }
  const double lo = parse_double(text.substr(0, c1));
  const double hi = parse_double(text.substr(c1 + 1, c2 - c1 - 1));
  const auto steps_text = text.substr(c2 + 1);
  long steps = 0;
  auto [ptr, ec] = std::from_chars(steps_text.data(), steps_text.data() + steps_text.size(), steps);
  if (steps_text.empty() || ec != std::errc{} || ptr != steps_text.data() + steps_text.size() ||
      steps < 1 || steps > 100000) {
    throw Error(Status::SyntaxError, "steps must be an integer between 1 and 100000");
  }
  if (lo > hi) throw Error(Status::SyntaxError, "deltas lo must not exceed hi");
  std::vector<double> deltas;
  deltas.reserve(static_cast<std::size_t>(steps));
  for (long k = 0; k < steps; ++k) {
    deltas.push_back(steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) /
                                               static_cast<double>(steps - 1));
  }
  return deltas;
}

}  // namespace evspace
