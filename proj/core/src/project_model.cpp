#include "evspace/project_model.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace evspace {

using nlohmann::json;

CashFlowTable::CashFlowTable(std::string project_name, std::size_t periods)
    : project_name_(std::move(project_name)), periods_(periods) {}

void CashFlowTable::add_field(std::string name, std::vector<double> values) {
  if (name.empty()) throw Error(Status::SyntaxError, "field name must not be empty");
  if (fields_.count(name) > 0) {
    throw Error(Status::DuplicateName, "field '" + name + "' defined twice");
  }
  if (values.size() != periods_) {
    throw Error(Status::TypeError, "field '" + name + "' has " + std::to_string(values.size()) +
                                       " values, expected " + std::to_string(periods_));
  }
  fields_.emplace(std::move(name), std::move(values));
}

void CashFlowTable::replace_field(std::string_view name, std::vector<double> values) {
  auto it = fields_.find(name);
  if (it == fields_.end()) {
    throw Error(Status::FieldNotFound, "field '" + std::string(name) + "' does not exist");
  }
  if (values.size() != periods_) {
    throw Error(Status::TypeError, "field '" + std::string(name) + "' needs " +
                                       std::to_string(periods_) + " values");
  }
  it->second = std::move(values);
}

const std::vector<double>* CashFlowTable::field(std::string_view name) const {
  auto it = fields_.find(name);
  return it == fields_.end() ? nullptr : &it->second;
}

CashFlowTable table_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(Status::SyntaxError, "project document must be an object");
  for (const char* key : {"project_name", "periods", "fields"}) {
    if (!doc.contains(key)) {
      throw Error(Status::SyntaxError, std::string("project document lacks '") + key + "'");
    }
  }
  if (doc.contains("format_version") && doc["format_version"] != kProjectFormatVersion) {
    throw Error(Status::SyntaxError, "unsupported project format_version");
  }
  if (!doc["project_name"].is_string()) {
    throw Error(Status::TypeError, "project_name must be text");
  }
  const json& periods = doc["periods"];
  if (!periods.is_number_integer() || periods.get<long long>() < 0) {
    throw Error(Status::TypeError, "periods must be a non-negative integer");
  }
  if (!doc["fields"].is_object()) throw Error(Status::TypeError, "fields must be an object");

  CashFlowTable table(doc["project_name"].get<std::string>(), periods.get<std::size_t>());
  for (const auto& [name, cells] : doc["fields"].items()) {
    if (!cells.is_array()) {
      throw Error(Status::TypeError, "field '" + name + "' must be an array of numbers");
    }
    std::vector<double> values;
    values.reserve(cells.size());
    for (std::size_t t = 0; t < cells.size(); ++t) {
      if (!cells[t].is_number()) {
        throw Error(Status::TypeError, "field '" + name + "', period " + std::to_string(t) +
                                           ": cell is not a number");
      }
      values.push_back(cells[t].get<double>());
    }
    table.add_field(name, std::move(values));
  }
  if (doc.contains("metadata")) {
    if (!doc["metadata"].is_object()) throw Error(Status::TypeError, "metadata must be an object");
    for (const auto& [key, value] : doc["metadata"].items()) {
      if (!value.is_string()) {
        throw Error(Status::TypeError, "metadata '" + key + "' must be text");
      }
      table.metadata()[key] = value.get<std::string>();
    }
  }
  return table;
}

CashFlowTable load_table(std::string_view document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(Status::SyntaxError, "project document is not valid JSON");
  }
  return table_from_json(doc);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

CashFlowTable load_csv(std::string_view text, std::string project_name) {
  std::stringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    if (!trim(line).empty()) header = split_csv_row(line);
  }
  if (header.empty()) throw Error(Status::SyntaxError, "CSV has no header row");

  std::vector<std::vector<double>> columns(header.size());
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_csv_row(line);
    if (cells.size() != header.size()) {
      throw Error(Status::TypeError, "CSV row " + std::to_string(row) + " has " +
                                         std::to_string(cells.size()) + " cells, expected " +
                                         std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      double v = 0.0;
      const char* first = cell.data();
      if (!cell.empty() && cell.front() == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() ||
          !std::isfinite(v)) {
        throw Error(Status::TypeError, "CSV row " + std::to_string(row) + ", column '" +
                                           header[c] + "': '" + cells[c] + "' is not a number");
      }
      columns[c].push_back(v);
    }
  }
  CashFlowTable table(std::move(project_name), row);
  for (std::size_t c = 0; c < header.size(); ++c) {
    table.add_field(header[c], std::move(columns[c]));
  }
  return table;
}

json table_to_json(const CashFlowTable& table) {
  json doc;
  doc["format_version"] = kProjectFormatVersion;
  doc["project_name"] = table.project_name();
  doc["periods"] = table.periods();
  doc["fields"] = json::object();
  for (const auto& [name, values] : table.fields()) doc["fields"][name] = values;
  doc["metadata"] = json::object();
  for (const auto& [k, v] : table.metadata()) doc["metadata"][k] = v;
  return doc;
}

std::string save_table(const CashFlowTable& table) {
  return table_to_json(table).dump(2) + "\n";
}

std::span<const double> select_field(const FieldRef& ref) {
  const std::vector<double>* values = ref.table ? ref.table->field(ref.name) : nullptr;
  if (values == nullptr) {
    throw Error(Status::FieldNotFound,
                "appointed field '" + ref.name + "' is not in existence");
  }
  return *values;
}

CalcResult field_count(std::span<const double> values) {
  if (values.empty()) {
    return CalcResult::fail(Status::EmptyField, "the number of the field data is zero");
  }
  return CalcResult::ok(static_cast<double>(values.size()));
}

CalcResult field_sum(std::span<const double> values) {
  double sum = 0.0;
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (!std::isfinite(values[t])) {
      return CalcResult::fail(Status::TypeError, "the addition cannot be operated: period " +
                                                     std::to_string(t) + " is not a number");
    }
    sum += values[t];
  }
  return CalcResult::ok(sum);
}

CalcResult field_sum_raw(const json& raw) {
  if (!raw.is_array()) {
    return CalcResult::fail(Status::TypeError, "the addition cannot be operated: not a list");
  }
  std::vector<double> values;
  values.reserve(raw.size());
  for (std::size_t t = 0; t < raw.size(); ++t) {
    if (!raw[t].is_number()) {
      return CalcResult::fail(Status::TypeError, "the addition cannot be operated: element " +
                                                     std::to_string(t) + " is " +
                                                     raw[t].type_name());
    }
    values.push_back(raw[t].get<double>());
  }
  return field_sum(values);
}

const EventSpace& field_event_space() {
  static const EventSpace space = [] {
    EventSpace s;
    auto select = s.add_basic("select_field", [](ExecContext& ctx) {
      try {
        auto values = select_field(FieldRef{ctx.table, ctx.field});
        ctx.selection.assign(values.begin(), values.end());
      } catch (const Error& e) {
        return e.as_result();
      }
      return CalcResult::ok(0.0);
    });
    auto count = s.add_basic("count_field", [](ExecContext& ctx) {
      CalcResult n = field_count(ctx.selection);
      if (n.is_ok()) ctx.bindings["count"] = *n;
      return n;
    });
    auto sum = s.add_basic("sum_field", [](ExecContext& ctx) {
      CalcResult total = field_sum(ctx.selection);
      if (total.is_ok()) ctx.accumulator = *total;
      return total;
    });
    auto divide = s.add_basic("divide", [](ExecContext& ctx) {
      auto it = ctx.bindings.find("count");
      if (it == ctx.bindings.end() || it->second == 0.0) {
        return CalcResult::fail(Status::DivideByZero, "divide by a zero count");
      }
      ctx.accumulator /= it->second;
      return CalcResult::ok(ctx.accumulator);
    });
    s.define("field_average", seq(select, seq(count, seq(sum, divide))));
    return s;
  }();
  return space;
}

CalcResult field_average(const FieldRef& ref) {
  const EventSpace& space = field_event_space();
  ExecContext ctx;
  ctx.table = ref.table;
  ctx.field = ref.name;
  return execute(space.ref("field_average"), ctx, space);
}

}  // namespace evspace
