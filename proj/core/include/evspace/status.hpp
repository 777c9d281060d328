#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace evspace {

// Single source for the status vocabulary. The wire name is what the HTTP
// envelope and the machine-format CLI output carry.
#define EVSPACE_STATUS_LIST(X)          \
  X(Ok, "ok")                           \
  X(SyntaxError, "SyntaxError")         \
  X(UnknownSymbol, "UnknownSymbol")     \
  X(ArityError, "ArityError")           \
  X(DivideByZero, "DivideByZero")       \
  X(DomainError, "DomainError")         \
  X(FieldNotFound, "FieldNotFound")     \
  X(EmptyField, "EmptyField")           \
  X(TypeError, "TypeError")             \
  X(NoConvergence, "NoConvergence")     \
  X(NoSignChange, "NoSignChange")       \
  X(NeverRecovered, "NeverRecovered")   \
  X(CrossSpace, "CrossSpace")           \
  X(UnknownEvent, "UnknownEvent")       \
  X(CyclicDefinition, "CyclicDefinition") \
  X(DuplicateName, "DuplicateName")     \
  X(BuiltInProtected, "BuiltInProtected") \
  X(IoError, "IoError")

enum class Status {
#define EVSPACE_STATUS_ENUM(name, wire) name,
  EVSPACE_STATUS_LIST(EVSPACE_STATUS_ENUM)
#undef EVSPACE_STATUS_ENUM
};

inline constexpr std::array kAllStatuses = {
#define EVSPACE_STATUS_ENTRY(name, wire) Status::name,
    EVSPACE_STATUS_LIST(EVSPACE_STATUS_ENTRY)
#undef EVSPACE_STATUS_ENTRY
};

constexpr std::string_view status_name(Status s) {
  switch (s) {
#define EVSPACE_STATUS_CASE(name, wire) \
  case Status::name:                    \
    return wire;
    EVSPACE_STATUS_LIST(EVSPACE_STATUS_CASE)
#undef EVSPACE_STATUS_CASE
  }
  return "unknown";
}

std::optional<Status> status_from_name(std::string_view name);

/// Value-or-status outcome of any evaluation.
///
/// An Ok result always holds a finite value. Every non-Ok result carries a
/// non-empty detail message. `warning` marks an Ok result computed under a
/// known caveat (e.g. IRR on a non-conventional flow); `detail` then says why.
class CalcResult {
 public:
  static CalcResult ok(double value);
  static CalcResult ok_with_warning(double value, std::string detail);
  static CalcResult fail(Status status, std::string detail);

  bool is_ok() const { return status_ == Status::Ok; }
  Status status() const { return status_; }
  const std::optional<double>& value() const { return value_; }
  // Precondition: is_ok().
  double operator*() const { return *value_; }
  const std::string& detail() const { return detail_; }
  bool warning() const { return warning_; }

  friend bool operator==(const CalcResult&, const CalcResult&) = default;

 private:
  CalcResult(Status s, std::optional<double> v, std::string d, bool w)
      : status_(s), value_(v), detail_(std::move(d)), warning_(w) {}

  Status status_;
  std::optional<double> value_;
  std::string detail_;
  bool warning_ = false;
};

/// Thrown for definition-time failures (bad source, unknown events, name
/// collisions, malformed documents). Evaluation failures are CalcResults.
class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& detail)
      : std::runtime_error(detail), status_(status) {}

  Status status() const { return status_; }
  CalcResult as_result() const { return CalcResult::fail(status_, what()); }

 private:
  Status status_;
};

}  // namespace evspace
