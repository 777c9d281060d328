#pragma once

// Cash-flow tables of a project under feasibility study, and the field-level
// basic events (select, count, sum, divide) that make up field_average.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evspace/event_algebra.hpp"
#include "evspace/status.hpp"

namespace evspace {

inline constexpr int kProjectFormatVersion = 1;

/// Period-indexed named fields. Period 0 is the first construction year;
/// values are in 10^4 yuan at constant prices unless metadata says otherwise.
class CashFlowTable {
 public:
  CashFlowTable(std::string project_name, std::size_t periods);

  /// Throws TypeError if `values` does not have exactly periods() entries,
  /// SyntaxError for an empty name, DuplicateName if the field exists.
  void add_field(std::string name, std::vector<double> values);
  /// Replaces an existing field's values (same length rule).
  void replace_field(std::string_view name, std::vector<double> values);

  const std::string& project_name() const { return project_name_; }
  std::size_t periods() const { return periods_; }
  const std::map<std::string, std::vector<double>, std::less<>>& fields() const { return fields_; }
  std::map<std::string, std::string, std::less<>>& metadata() { return metadata_; }
  const std::map<std::string, std::string, std::less<>>& metadata() const { return metadata_; }

  /// nullptr when the field does not exist.
  const std::vector<double>* field(std::string_view name) const;

  friend bool operator==(const CashFlowTable&, const CashFlowTable&) = default;

 private:
  std::string project_name_;
  std::size_t periods_;
  std::map<std::string, std::vector<double>, std::less<>> fields_;
  std::map<std::string, std::string, std::less<>> metadata_;
};

struct FieldRef {
  const CashFlowTable* table;
  std::string name;
};

/// Parses a project document. Throws SyntaxError (not a document, missing
/// keys) or TypeError (non-numeric cell, ragged field); details name the
/// offending field and period.
CashFlowTable load_table(std::string_view document);
CashFlowTable table_from_json(const nlohmann::json& doc);

/// Comma-separated import: header row of field names, one row per period.
CashFlowTable load_csv(std::string_view text, std::string project_name);

/// Canonical document: sorted keys, two-space indent, trailing newline.
std::string save_table(const CashFlowTable& table);
nlohmann::json table_to_json(const CashFlowTable& table);

/// Throws Error(FieldNotFound).
std::span<const double> select_field(const FieldRef& ref);

CalcResult field_count(std::span<const double> values);
CalcResult field_sum(std::span<const double> values);
/// Sum of raw API-supplied cells; any non-number cell is a TypeError.
CalcResult field_sum_raw(const nlohmann::json& raw);

/// The field-average event, executed as select + count + sum + divide.
CalcResult field_average(const FieldRef& ref);

/// Event space holding the four field basics and the composite
/// "field_average" built from them.
const EventSpace& field_event_space();

}  // namespace evspace
