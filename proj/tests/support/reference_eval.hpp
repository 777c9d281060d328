#pragma once

// Direct recursive-descent evaluator over infix source. It shares no code
// with the tokenizer / suffix compiler / stack machine and is used only as a
// test oracle. Arithmetic primitives mirror the VM's (x*x*x for cubic,
// Horner for poly) so that agreement is bit-for-bit when parsing agrees.

#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evspace::testing {

struct RefError : std::runtime_error {
  enum class Kind { Syntax, Unbound, DivideByZero, Domain };
  RefError(Kind k, const std::string& m) : std::runtime_error(m), kind(k) {}
  Kind kind;
};

class ReferenceEvaluator {
 public:
  ReferenceEvaluator(std::string_view src, const std::map<std::string, double>& env)
      : s_(src), env_(env) {}

  double run() {
    double v = expr();
    space();
    if (pos_ != s_.size()) fail("trailing input");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& m) { throw RefError(RefError::Kind::Syntax, m); }

  void space() {
    while (pos_ < s_.size() && s_[pos_] == ' ') ++pos_;
  }
  bool eat(char c) {
    space();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static double finite(double v) {
    if (!std::isfinite(v)) throw RefError(RefError::Kind::Domain, "non-finite");
    return v;
  }

  double expr() {
    double v = term();
    while (true) {
      if (eat('+')) {
        v = finite(v + term());
      } else if (eat('-')) {
        v = finite(v - term());
      } else {
        return v;
      }
    }
  }

  double term() {
    double v = postfix();
    while (true) {
      if (eat('*')) {
        v = finite(v * postfix());
      } else if (eat('/')) {
        double d = postfix();
        if (d == 0.0) throw RefError(RefError::Kind::DivideByZero, "x/0");
        v = finite(v / d);
      } else {
        return v;
      }
    }
  }

  double postfix() {
    double v = unary();
    while (eat('%')) v = v / 100.0;
    return v;
  }

  double unary() {
    if (eat('-')) return 0.0 - unary();
    if (eat('+')) return unary();
    return primary();
  }

  double primary() {
    space();
    if (eat('(')) {
      double v = expr();
      if (!eat(')')) fail("missing )");
      return v;
    }
    if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc{}) fail("bad number");
      pos_ = static_cast<std::size_t>(p - s_.data());
      return v;
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (start == pos_) fail("expected operand");
    std::string name(s_.substr(start, pos_ - start));
    if (eat('(')) {
      std::vector<double> args{expr()};
      while (eat(',')) args.push_back(expr());
      if (!eat(')')) fail("missing ) after arguments");
      return call(name, args);
    }
    auto it = env_.find(name);
    if (it == env_.end()) throw RefError(RefError::Kind::Unbound, name);
    return it->second;
  }

  double call(const std::string& f, const std::vector<double>& a) {
    const auto need = [&](std::size_t n) {
      if (a.size() != n) fail(f + " arity");
    };
    const auto domain = [](bool bad) {
      if (bad) throw RefError(RefError::Kind::Domain, "domain");
    };
    if (f == "abs") return need(1), std::fabs(a[0]);
    if (f == "cbrt") return need(1), std::cbrt(a[0]);
    if (f == "exp") return need(1), finite(std::exp(a[0]));
    if (f == "log") return need(1), domain(a[0] <= 0), std::log(a[0]);
    if (f == "log10") return need(1), domain(a[0] <= 0), std::log10(a[0]);
    if (f == "pow") return need(2), finite(std::pow(a[0], a[1]));
    if (f == "sqrt") return need(1), domain(a[0] < 0), std::sqrt(a[0]);
    if (f == "cubic") return need(1), finite(a[0] * a[0] * a[0]);
    if (f == "poly") {
      if (a.size() < 2) fail("poly arity");
      double r = a.back();
      for (std::size_t i = a.size() - 1; i-- > 1;) r = r * a[0] + a[i];
      return finite(r);
    }
    fail("unknown function " + f);
  }

  std::string_view s_;
  const std::map<std::string, double>& env_;
  std::size_t pos_ = 0;
};

inline double reference_eval(std::string_view src, const std::map<std::string, double>& env = {}) {
  return ReferenceEvaluator(src, env).run();
}

}  // namespace evspace::testing
