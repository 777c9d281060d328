#pragma once

// Discounted cash flow indicators: NPV, IRR, static payback (IPT) and
// investment profit ratio (IPR). Cash flows are indexed by period from 0.

#include <span>

#include "evspace/expr_vm.hpp"
#include "evspace/status.hpp"

namespace evspace {

struct IrrConfig {
  double bracket_lo = -0.99;
  double bracket_hi = 10.0;
  double tol = 1e-9;  // on |NPV|, monetary units
  int max_iter = 200;
};

inline constexpr int kIrrScanIntervals = 64;

/// (1 + rate)^(-t).
double discount_factor(double rate, unsigned t);

/// sum ncf[t] * (1 + rate)^(-t). EmptyField for an empty series, DomainError
/// for rate <= -1.
CalcResult npv(std::span<const double> ncf, double rate);

/// Scans the bracket in kIrrScanIntervals equal steps and bisects the first
/// sign change. With several sign changes in the flow the smallest root is
/// returned and the result carries a warning.
CalcResult irr(std::span<const double> ncf, const IrrConfig& cfg = {});

/// Static payback period in periods, interpolated inside the turnaround year.
CalcResult payback_static(std::span<const double> ncf);

/// annual_profit / total_investment.
CalcResult ipr(double annual_profit, double total_investment);

/// Number of sign changes in the series, ignoring zeros.
int sign_changes(std::span<const double> ncf);

/// Registers NPV, IRR, IPT and IPR for use from the method language.
void register_financial_functions(FunctionTable& table);

}  // namespace evspace
