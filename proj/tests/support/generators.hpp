#pragma once

// Seeded random generators shared by unit and acceptance tests.

#include <charconv>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace evspace::testing {

inline std::string num_text(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

/// Random well-formed infix source over variables x, y, z and every
/// function of the opcode table.
class ExpressionGenerator {
 public:
  explicit ExpressionGenerator(std::uint64_t seed) : rng_(seed) {}

  std::string generate(int max_depth) { return node(max_depth); }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::string literal() {
    switch (pick(4)) {
      case 0:
        return std::to_string(pick(20) + 1);
      case 1:
        return num_text(std::uniform_real_distribution<double>(0.01, 50.0)(rng_));
      case 2:
        return num_text(std::round(std::uniform_real_distribution<double>(0.0, 1000.0)(rng_)) / 100.0);
      default:
        return std::to_string(pick(9) + 1) + "e" + std::to_string(pick(5) - 2);
    }
  }

  std::string leaf() {
    if (pick(3) == 0) {
      static const char* vars[] = {"x", "y", "z"};
      return vars[pick(3)];
    }
    return literal();
  }

  std::string node(int depth) {
    if (depth <= 0 || pick(5) == 0) return leaf();
    const int d = depth - 1;
    switch (pick(8)) {
      case 0:
      case 1: {
        static const char* ops[] = {" + ", " - ", " * ", " / ", "+", "-", "*", "/"};
        return node(d) + ops[pick(8)] + node(d);
      }
      case 2:
        return "(" + node(d) + ")";
      case 3:
        return "-" + node(d);
      case 4:
        return node(d) + "%";
      case 5: {
        static const char* unary[] = {"abs", "cbrt", "exp", "log", "log10", "sqrt", "cubic"};
        return std::string(unary[pick(7)]) + "(" + node(d) + ")";
      }
      case 6:
        return "pow(" + node(d) + ", " + num_text(pick(7) - 2) + ")";
      default: {
        std::string s = "poly(" + node(d);
        const int coeffs = pick(4) + 1;
        for (int i = 0; i < coeffs; ++i) s += ", " + node(d - 1);
        return s + ")";
      }
    }
  }

  std::mt19937_64 rng_;
};

/// Conventional flow: one or more negative periods, then positive periods,
/// with a positive total.
inline std::vector<double> conventional_flow(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> neg_len(1, 3);
  std::uniform_int_distribution<int> pos_len(1, 15);
  std::uniform_real_distribution<double> outflow(10.0, 1000.0);
  std::vector<double> flow;
  const int n_neg = neg_len(rng);
  double invested = 0.0;
  for (int i = 0; i < n_neg; ++i) {
    flow.push_back(-outflow(rng));
    invested -= flow.back();
  }
  const int n_pos = pos_len(rng);
  // Inflows sum to (1.05 .. 3) times the outflow so the total is positive.
  const double total_in = invested * std::uniform_real_distribution<double>(1.05, 3.0)(rng);
  std::vector<double> weights(n_pos);
  double wsum = 0.0;
  for (double& w : weights) {
    w = std::uniform_real_distribution<double>(0.2, 1.0)(rng);
    wsum += w;
  }
  for (double w : weights) flow.push_back(total_in * w / wsum);
  return flow;
}

}  // namespace evspace::testing
