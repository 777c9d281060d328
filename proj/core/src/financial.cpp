#include "evspace/financial.hpp"

#include <cmath>
#include <numeric>

namespace evspace {

double discount_factor(double rate, unsigned t) {
  return std::pow(1.0 + rate, -static_cast<double>(t));
}

namespace {

// Precondition: non-empty, rate > -1.
double npv_unchecked(std::span<const double> ncf, double rate) {
  double sum = 0.0;
  for (std::size_t t = 0; t < ncf.size(); ++t) {
    sum += ncf[t] * discount_factor(rate, static_cast<unsigned>(t));
  }
  return sum;
}

}  // namespace

CalcResult npv(std::span<const double> ncf, double rate) {
  if (ncf.empty()) return CalcResult::fail(Status::EmptyField, "NPV of an empty cash flow");
  if (!(rate > -1.0)) {
    return CalcResult::fail(Status::DomainError, "discount rate must be greater than -1");
  }
  return CalcResult::ok(npv_unchecked(ncf, rate));
}

int sign_changes(std::span<const double> ncf) {
  int changes = 0;
  int last = 0;
  for (double v : ncf) {
    const int s = (v > 0.0) - (v < 0.0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

CalcResult irr(std::span<const double> ncf, const IrrConfig& cfg) {
  if (ncf.empty()) return CalcResult::fail(Status::EmptyField, "IRR of an empty cash flow");
  if (!(cfg.bracket_lo < cfg.bracket_hi) || cfg.bracket_lo <= -1.0 || !(cfg.tol > 0.0)) {
    return CalcResult::fail(Status::DomainError, "invalid IRR bracket or tolerance");
  }
  const auto f = [&](double rate) { return npv_unchecked(ncf, rate); };
  const auto finish = [&](double root) {
    if (sign_changes(ncf) > 1) {
      return CalcResult::ok_with_warning(
          root, "non-conventional cash flow: smallest root in the bracket returned");
    }
    return CalcResult::ok(root);
  };

  const double step = (cfg.bracket_hi - cfg.bracket_lo) / kIrrScanIntervals;
  double lo = cfg.bracket_lo;
  double f_lo = f(lo);
  if (f_lo == 0.0) return finish(lo);
  for (int k = 1; k <= kIrrScanIntervals; ++k) {
    const double hi = k == kIrrScanIntervals ? cfg.bracket_hi : cfg.bracket_lo + step * k;
    const double f_hi = f(hi);
    if (f_hi == 0.0) return finish(hi);
    if ((f_lo < 0.0) != (f_hi < 0.0)) {
      double a = lo;
      double b = hi;
      double f_a = f_lo;
      for (int iter = 0; iter < cfg.max_iter; ++iter) {
        const double mid = a + (b - a) / 2.0;
        const double f_mid = f(mid);
        if (std::fabs(f_mid) <= cfg.tol) return finish(mid);
        if (mid == a || mid == b) break;
        if ((f_mid < 0.0) == (f_a < 0.0)) {
          a = mid;
          f_a = f_mid;
        } else {
          b = mid;
        }
      }
      return CalcResult::fail(Status::NoConvergence,
                              "IRR bisection did not reach |NPV| <= tolerance");
    }
    lo = hi;
    f_lo = f_hi;
  }
  return CalcResult::fail(Status::NoSignChange,
                          "NPV keeps one sign over the IRR bracket; no rate makes it zero");
}

CalcResult payback_static(std::span<const double> ncf) {
  if (ncf.empty()) return CalcResult::fail(Status::EmptyField, "payback of an empty cash flow");
  double cumulative = ncf[0];
  if (cumulative >= 0.0) return CalcResult::ok(0.0);
  for (std::size_t t = 1; t < ncf.size(); ++t) {
    const double previous = cumulative;
    cumulative += ncf[t];
    if (cumulative >= 0.0) {
      return CalcResult::ok(static_cast<double>(t - 1) + std::fabs(previous) / ncf[t]);
    }
  }
  return CalcResult::fail(Status::NeverRecovered,
                          "cumulative net cash flow never becomes non-negative");
}

CalcResult ipr(double annual_profit, double total_investment) {
  if (total_investment == 0.0) {
    return CalcResult::fail(Status::DivideByZero, "total investment is zero");
  }
  return CalcResult::ok(annual_profit / total_investment);
}

namespace {

const Series* as_series(const Value& v) { return std::get_if<Series>(&v); }
const double* as_number(const Value& v) { return std::get_if<double>(&v); }

CalcResult type_error(const std::string& fn, const std::string& what) {
  return CalcResult::fail(Status::TypeError, fn + ": " + what);
}

}  // namespace

void register_financial_functions(FunctionTable& table) {
  table.add({"NPV", 2, 2, [](std::span<const Value> args) {
               const Series* ncf = as_series(args[0]);
               const double* rate = as_number(args[1]);
               if (!ncf) return type_error("NPV", "first argument must be a field");
               if (!rate) return type_error("NPV", "rate must be a number");
               return npv(*ncf, *rate);
             }});
  table.add({"IRR", 1, 1, [](std::span<const Value> args) {
               const Series* ncf = as_series(args[0]);
               if (!ncf) return type_error("IRR", "argument must be a field");
               return irr(*ncf);
             }});
  table.add({"IPT", 1, 1, [](std::span<const Value> args) {
               const Series* ncf = as_series(args[0]);
               if (!ncf) return type_error("IPT", "argument must be a field");
               return payback_static(*ncf);
             }});
  table.add({"IPR", 2, 2, [](std::span<const Value> args) {
               double profit = 0.0;
               double investment = 0.0;
               if (const Series* s = as_series(args[0])) {
                 if (s->empty()) {
                   return CalcResult::fail(Status::EmptyField, "IPR: profit field is empty");
                 }
                 profit = std::accumulate(s->begin(), s->end(), 0.0) /
                          static_cast<double>(s->size());
               } else {
                 profit = std::get<double>(args[0]);
               }
               if (const Series* s = as_series(args[1])) {
                 investment = std::accumulate(s->begin(), s->end(), 0.0);
               } else {
                 investment = std::get<double>(args[1]);
               }
               return ipr(profit, investment);
             }});
}

}  // namespace evspace
