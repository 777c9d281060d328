#pragma once

// Infix method language -> suffix (postfix) token stream -> stack machine.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "evspace/status.hpp"

namespace evspace {

// Numeric codes are fixed; unlisted values are reserved and never assigned.
enum class OpCode : std::uint8_t {
  LBracket = 1,
  RBracket = 2,
  Mult = 3,
  Divide = 4,
  Subtract = 5,
  Plus = 6,
  Percent = 7,
  Absolute = 101,
  CubeRoot = 105,
  Exp = 109,
  Log = 112,  // natural logarithm
  Log10 = 113,
  Power = 116,
  SqRoot = 119,
  Cubic = 122,  // x^3
  Poly = 124,   // poly(x, c0, ..., cN) = sum c_i x^i
};

struct OpInfo {
  OpCode code;
  std::string_view symbol;
  int arity;  // -1: variadic (Poly, at least two arguments)
  bool is_function;
};

inline constexpr std::array<OpInfo, 16> kOpTable = {{
    {OpCode::LBracket, "(", 0, false},
    {OpCode::RBracket, ")", 0, false},
    {OpCode::Mult, "*", 2, false},
    {OpCode::Divide, "/", 2, false},
    {OpCode::Subtract, "-", 2, false},
    {OpCode::Plus, "+", 2, false},
    {OpCode::Percent, "%", 1, false},
    {OpCode::Absolute, "abs", 1, true},
    {OpCode::CubeRoot, "cbrt", 1, true},
    {OpCode::Exp, "exp", 1, true},
    {OpCode::Log, "log", 1, true},
    {OpCode::Log10, "log10", 1, true},
    {OpCode::Power, "pow", 2, true},
    {OpCode::SqRoot, "sqrt", 1, true},
    {OpCode::Cubic, "cubic", 1, true},
    {OpCode::Poly, "poly", -1, true},
}};

const OpInfo& op_info(OpCode code);
const OpInfo* find_function_op(std::string_view name);

/// A field's values travel through the VM as a series.
using Series = std::vector<double>;
using Value = std::variant<double, Series>;
using Environment = std::map<std::string, Value, std::less<>>;

/// A named function callable from the method language (NPV, IRR, ...).
struct Function {
  std::string name;
  std::size_t min_args;
  std::size_t max_args;
  std::function<CalcResult(std::span<const Value>)> impl;
};

class FunctionTable {
 public:
  /// Throws DuplicateName if the name is taken (opcode names included).
  void add(Function fn);
  std::shared_ptr<const Function> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  std::vector<std::string> names() const;

  static const FunctionTable& empty();

 private:
  std::map<std::string, std::shared_ptr<const Function>, std::less<>> fns_;
};

struct Token {
  enum class Kind { Number, Identifier, Op, Comma, ArgCountMarker, Call };

  Kind kind = Kind::Number;
  double number = 0.0;
  std::string name;           // Identifier, Call
  OpCode op = OpCode::Plus;   // Op
  std::size_t count = 0;      // ArgCountMarker
  std::shared_ptr<const Function> fn;  // Call

  static Token num(double v);
  static Token ident(std::string n);
  static Token make_op(OpCode c);
  static Token comma();
  static Token arg_count(std::size_t n);
  static Token call(std::shared_ptr<const Function> f);

  bool operator==(const Token& o) const;
};

std::string to_string(const Token& t);

/// Compiled postfix form. Immutable once built; evaluate it concurrently
/// with distinct environments.
struct SuffixExpression {
  std::vector<Token> items;
  std::set<std::string, std::less<>> free_vars;
};

/// Longest-match lexer. Unary minus becomes "(0 - x)".
/// Throws SyntaxError (illegal character, malformed number) and
/// UnknownSymbol (call of an unknown function).
std::vector<Token> tokenize(std::string_view source,
                            const FunctionTable& functions = FunctionTable::empty());

/// Operator-precedence conversion. Throws SyntaxError, ArityError.
SuffixExpression to_suffix(const std::vector<Token>& tokens);

/// to_suffix(tokenize(source)).
SuffixExpression compile(std::string_view source,
                         const FunctionTable& functions = FunctionTable::empty());

/// True if a simulated run never underflows and ends with one value.
bool is_stack_balanced(const SuffixExpression& expr);

CalcResult eval_suffix(const SuffixExpression& expr, const Environment& env = {});

}  // namespace evspace
