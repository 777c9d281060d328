#include "evspace/status.hpp"

namespace evspace {

std::optional<Status> status_from_name(std::string_view name) {
  for (Status s : kAllStatuses) {
    if (status_name(s) == name) return s;
  }
  return std::nullopt;
}

CalcResult CalcResult::ok(double value) {
  if (!std::isfinite(value)) {
    return fail(Status::DomainError, "result is not a finite number");
  }
  return CalcResult(Status::Ok, value, {}, false);
}

CalcResult CalcResult::ok_with_warning(double value, std::string detail) {
  if (!std::isfinite(value)) {
    return fail(Status::DomainError, "result is not a finite number");
  }
  return CalcResult(Status::Ok, value, std::move(detail), true);
}

CalcResult CalcResult::fail(Status status, std::string detail) {
  if (status == Status::Ok) {
    throw std::logic_error("CalcResult::fail called with Status::Ok");
  }
  if (detail.empty()) detail = std::string(status_name(status));
  return CalcResult(status, std::nullopt, std::move(detail), false);
}

}  // namespace evspace
