#include <cmath>
#include <random>

#include "doctest.h"
#include "evspace/financial.hpp"
#include "evspace/method_registry.hpp"
#include "support/generators.hpp"

using namespace evspace;
using V = std::vector<double>;

TEST_CASE("discount_factor") {
  CHECK(discount_factor(0.0, 7) == 1.0);
  CHECK(discount_factor(0.10, 1) == doctest::Approx(1 / 1.1).epsilon(1e-15));
  CHECK(discount_factor(0.10, 2) == doctest::Approx(1 / 1.21).epsilon(1e-15));
}

TEST_CASE("npv") {
  CHECK(std::fabs(*npv(V{-100, 110}, 0.10)) < 1e-12);
  CHECK(*npv(V{-100, 110}, 0.0) == 10.0);
  CHECK(std::fabs(*npv(V{-100, 0, 121}, 0.10)) < 1e-12);
  CHECK(npv(V{}, 0.1).status() == Status::EmptyField);
  CHECK(npv(V{1}, -1.0).status() == Status::DomainError);
}

TEST_CASE("irr") {
  CHECK(*irr(V{-100, 110}) == doctest::Approx(0.10).epsilon(1e-9));

  // Independent route: -100 + 60x + 60x^2 = 0 with x = 1/(1+i).
  const double x = (-60.0 + std::sqrt(60.0 * 60.0 + 4.0 * 60.0 * 100.0)) / (2.0 * 60.0);
  const double expected = 1.0 / x - 1.0;
  CalcResult r = irr(V{-100, 60, 60});
  REQUIRE(r.is_ok());
  CHECK(std::fabs(*r - 0.1307) <= 1e-3);
  CHECK(std::fabs(*r - expected) <= 1e-9);
  CHECK_FALSE(r.warning());

  CHECK(irr(V{100, 110}).status() == Status::NoSignChange);
  CHECK(irr(V{}).status() == Status::EmptyField);

  IrrConfig starved;
  starved.max_iter = 2;
  CHECK(irr(V{-100, 60, 60}, starved).status() == Status::NoConvergence);
}

TEST_CASE("irr on a non-conventional flow returns the smallest root with a warning") {
  // -100 + 260x - 165x^2 with x = 1/(1+i): NPV is zero at i = 10% and 50%.
  CalcResult r = irr(V{-100, 260, -165});
  REQUIRE(r.is_ok());
  CHECK(*r == doctest::Approx(0.10).epsilon(1e-8));
  CHECK(r.warning());
  CHECK_FALSE(r.detail().empty());
}

TEST_CASE("payback_static") {
  CHECK(*payback_static(V{-100, 40, 40, 40}) == 2.5);
  CHECK(*payback_static(V{5, 1, 1}) == 0.0);
  CHECK(payback_static(V{-100, 10, 10}).status() == Status::NeverRecovered);
  CHECK(*payback_static(V{-100, 50, 50}) == 2.0);
}

TEST_CASE("ipr") {
  CHECK(*ipr(20, 100) == 0.20);
  CHECK(*ipr(0, 100) == 0.0);
  CHECK(ipr(20, 0).status() == Status::DivideByZero);
}

TEST_CASE("npv is linear and decreasing in the rate for conventional flows") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> scale(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const V flow = evspace::testing::conventional_flow(rng);
    const double a = scale(rng);
    V scaled(flow);
    for (double& v : scaled) v *= a;
    const double base = *npv(flow, 0.08);
    CHECK(std::fabs(*npv(scaled, 0.08) - a * base) <= 1e-12 * std::fabs(a * base) + 1e-12);

    // Monotone in the rate only when every outflow sits at period 0.
    if (flow[1] < 0) continue;
    double previous = *npv(flow, -0.9);
    for (int k = 1; k < 50; ++k) {
      const double rate = -0.9 + k * 0.2;
      const double value = *npv(flow, rate);
      CHECK(value < previous);
      previous = value;
    }
  }
}

TEST_CASE("financial functions are callable from the method language") {
  const V flow{-100, 40, 40, 40};
  const Environment env{{"ncf", Series(flow)}, {"p", 20.0}, {"inv", 100.0}};
  const auto vm = [&](const char* src) {
    return eval_suffix(compile(src, standard_functions()), env);
  };
  CHECK(*vm("NPV(ncf, 10%)") == *npv(flow, 0.10));
  CHECK(*vm("IRR(ncf)") == *irr(flow));
  CHECK(*vm("IPT(ncf)") == *payback_static(flow));
  CHECK(*vm("IPR(p, inv)") == *ipr(20, 100));
  CHECK(vm("NPV(p, 10%)").status() == Status::TypeError);
  CHECK(vm("IRR(p)").status() == Status::TypeError);
}
