#pragma once

// Uncertainty analysis: re-evaluate a method while one parameter is scaled
// by (1 + delta) for each requested delta.

#include <optional>
#include <string>
#include <vector>

#include "evspace/method_registry.hpp"

namespace evspace {

enum class ScaleMode {
  Auto,        // follow the varied parameter's kind
  Multiply,    // number parameter: value * (1 + d)
  ScaleField,  // field parameter: every period value * (1 + d)
};

struct SweepSpec {
  std::string method;
  Bindings fixed;
  std::string vary;
  std::vector<double> deltas;
  ScaleMode scale_mode = ScaleMode::Auto;
};

struct SweepRow {
  double delta = 0.0;
  // Scaled number, or the sum of the scaled field. Empty when the varied
  // field could not be resolved.
  std::optional<double> varied;
  CalcResult result = CalcResult::ok(0.0);
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ascending delta
  std::optional<std::size_t> base_row;
  ScaleMode mode = ScaleMode::Multiply;
};

/// Per-row failures are recorded in the row. Throws UnknownEvent (method),
/// ArityError (vary or bindings do not match the parameters), TypeError
/// (binding or scale mode of the wrong kind), DomainError (no deltas, or a
/// delta <= -1).
SweepResult sweep(const MethodRegistry& registry, const SweepSpec& spec);
SweepResult sweep(const MethodDefinition& method, const SweepSpec& spec);

/// Delta at which the indicator crosses zero, by linear interpolation
/// between consecutive Ok rows.
std::optional<double> crossover_estimate(const SweepResult& result);

/// "delta,value,status" lines with a header; values at full precision.
std::string sweep_table(const SweepResult& result);

/// deltas lo:hi:steps as an inclusive, evenly spaced list. Throws SyntaxError.
std::vector<double> parse_delta_range(std::string_view text);

}  // namespace evspace
