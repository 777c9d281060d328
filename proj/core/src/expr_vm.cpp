#include "evspace/expr_vm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace evspace {

const OpInfo& op_info(OpCode code) {
  for (const auto& info : kOpTable) {
    if (info.code == code) return info;
  }
  throw std::logic_error("unknown opcode");
}

const OpInfo* find_function_op(std::string_view name) {
  for (const auto& info : kOpTable) {
    if (info.is_function && info.symbol == name) return &info;
  }
  return nullptr;
}

void FunctionTable::add(Function fn) {
  if (find_function_op(fn.name) != nullptr || fns_.count(fn.name) > 0) {
    throw Error(Status::DuplicateName, "function '" + fn.name + "' already exists");
  }
  auto name = fn.name;
  fns_.emplace(std::move(name), std::make_shared<const Function>(std::move(fn)));
}

std::shared_ptr<const Function> FunctionTable::find(std::string_view name) const {
  auto it = fns_.find(name);
  return it == fns_.end() ? nullptr : it->second;
}

std::vector<std::string> FunctionTable::names() const {
  std::vector<std::string> out;
  for (const auto& [name, fn] : fns_) out.push_back(name);
  return out;
}

const FunctionTable& FunctionTable::empty() {
  static const FunctionTable table;
  return table;
}

Token Token::num(double v) {
  Token t;
  t.kind = Kind::Number;
  t.number = v;
  return t;
}

Token Token::ident(std::string n) {
  Token t;
  t.kind = Kind::Identifier;
  t.name = std::move(n);
  return t;
}

Token Token::make_op(OpCode c) {
  Token t;
  t.kind = Kind::Op;
  t.op = c;
  return t;
}

Token Token::comma() {
  Token t;
  t.kind = Kind::Comma;
  return t;
}

Token Token::arg_count(std::size_t n) {
  Token t;
  t.kind = Kind::ArgCountMarker;
  t.count = n;
  return t;
}

Token Token::call(std::shared_ptr<const Function> f) {
  Token t;
  t.kind = Kind::Call;
  t.name = f->name;
  t.fn = std::move(f);
  return t;
}

bool Token::operator==(const Token& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Number:
      return number == o.number;
    case Kind::Identifier:
    case Kind::Call:
      return name == o.name;
    case Kind::Op:
      return op == o.op;
    case Kind::Comma:
      return true;
    case Kind::ArgCountMarker:
      return count == o.count;
  }
  return false;
}

std::string to_string(const Token& t) {
  switch (t.kind) {
    case Token::Kind::Number: {
      std::ostringstream os;
      os << t.number;
      return os.str();
    }
    case Token::Kind::Identifier:
      return t.name;
    case Token::Kind::Call:
      return t.name + "()";
    case Token::Kind::Op:
      return std::string(op_info(t.op).symbol);
    case Token::Kind::Comma:
      return ",";
    case Token::Kind::ArgCountMarker:
      return "#" + std::to_string(t.count);
  }
  return "?";
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_binary(OpCode c) {
  return c == OpCode::Mult || c == OpCode::Divide || c == OpCode::Plus || c == OpCode::Subtract;
}

int precedence(OpCode c) {
  switch (c) {
    case OpCode::Percent:
      return 3;
    case OpCode::Mult:
    case OpCode::Divide:
      return 2;
    case OpCode::Plus:
    case OpCode::Subtract:
      return 1;
    default:
      return 0;
  }
}

class Lexer {
 public:
  Lexer(std::string_view src, const FunctionTable& fns) : src_(src), fns_(fns) {}

  std::vector<Token> run() {
    while (true) {
      skip_space();
      if (pos_ >= src_.size()) break;
      const char c = src_[pos_];
      if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
        emit_operand(Token::num(read_number()));
      } else if (ident_start(c)) {
        read_word();
      } else if (c == '(') {
        ++pos_;
        open();
      } else if (c == ')') {
        ++pos_;
        close();
      } else if (c == ',') {
        ++pos_;
        out_.push_back(Token::comma());
      } else if (c == '%') {
        ++pos_;
        out_.push_back(Token::make_op(OpCode::Percent));
      } else if (c == '*' || c == '/' || c == '+') {
        ++pos_;
        if (c == '+' && unary_position()) continue;
        out_.push_back(Token::make_op(c == '*'   ? OpCode::Mult
                                      : c == '/' ? OpCode::Divide
                                                 : OpCode::Plus));
      } else if (c == '-') {
        ++pos_;
        if (unary_position()) {
          open();
          out_.push_back(Token::num(0.0));
          out_.push_back(Token::make_op(OpCode::Subtract));
          pending_.push_back(depth_);
        } else {
          out_.push_back(Token::make_op(OpCode::Subtract));
        }
      } else {
        throw Error(Status::SyntaxError, "illegal character '" + std::string(1, c) +
                                             "' at position " + std::to_string(pos_));
      }
    }
    return std::move(out_);
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool unary_position() const {
    if (out_.empty()) return true;
    const Token& last = out_.back();
    if (last.kind == Token::Kind::Comma) return true;
    if (last.kind == Token::Kind::Op) {
      return last.op == OpCode::LBracket || is_binary(last.op);
    }
    return false;
  }

  void open() {
    out_.push_back(Token::make_op(OpCode::LBracket));
    ++depth_;
  }

  void close() {
    out_.push_back(Token::make_op(OpCode::RBracket));
    --depth_;
    operand_done();
  }

  void emit_operand(Token t) {
    out_.push_back(std::move(t));
    operand_done();
  }

  // Closes the synthetic brackets of unary minus whose operand just ended.
  void operand_done() {
    while (!pending_.empty() && pending_.back() == depth_) {
      pending_.pop_back();
      out_.push_back(Token::make_op(OpCode::RBracket));
      --depth_;
    }
  }

  double read_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ >= src_.size() || !is_digit(src_[pos_])) {
        throw malformed(start);
      }
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == '.' || ident_char(src_[pos_]))) {
      while (pos_ < src_.size() && (src_[pos_] == '.' || ident_char(src_[pos_]))) ++pos_;
      throw malformed(start);
    }
    double v = 0.0;
    const auto text = src_.substr(start, pos_ - start);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
      throw malformed(start);
    }
    return v;
  }

  Error malformed(std::size_t start) const {
    return Error(Status::SyntaxError, "malformed number '" +
                                          std::string(src_.substr(start, pos_ - start)) +
                                          "' at position " + std::to_string(start));
  }

  void read_word() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    std::string word(src_.substr(start, pos_ - start));
    std::size_t look = pos_;
    while (look < src_.size() && std::isspace(static_cast<unsigned char>(src_[look]))) ++look;
    const bool is_call = look < src_.size() && src_[look] == '(';
    if (!is_call) {
      emit_operand(Token::ident(std::move(word)));
      return;
    }
    if (const OpInfo* info = find_function_op(word)) {
      out_.push_back(Token::make_op(info->code));
    } else if (auto fn = fns_.find(word)) {
      out_.push_back(Token::call(std::move(fn)));
    } else {
      throw Error(Status::UnknownSymbol, "unknown function '" + word + "'");
    }
  }

  std::string_view src_;
  const FunctionTable& fns_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  std::vector<int> pending_;
  std::vector<Token> out_;
};

// Operator stack entry for the shunting-yard pass.
struct Pending {
  Token token;
  bool call_bracket = false;
  std::size_t args = 0;
};

std::string fn_name(const Token& t) {
  return t.kind == Token::Kind::Call ? t.name : std::string(op_info(t.op).symbol);
}

}  // namespace

std::vector<Token> tokenize(std::string_view source, const FunctionTable& functions) {
  return Lexer(source, functions).run();
}

SuffixExpression to_suffix(const std::vector<Token>& tokens) {
  if (tokens.empty()) throw Error(Status::SyntaxError, "empty expression");

  SuffixExpression out;
  std::vector<Pending> stack;
  bool expect_operand = true;
  bool after_function = false;

  const auto syntax = [](const std::string& msg) { return Error(Status::SyntaxError, msg); };

  const auto finish_call = [&](std::size_t argc) {
    Token fn = stack.back().token;
    stack.pop_back();
    const std::string name = fn_name(fn);
    if (fn.kind == Token::Kind::Call) {
      if (argc < fn.fn->min_args || argc > fn.fn->max_args) {
        throw Error(Status::ArityError, name + " takes " + std::to_string(fn.fn->min_args) +
                                            (fn.fn->min_args == fn.fn->max_args
                                                 ? ""
                                                 : ".." + std::to_string(fn.fn->max_args)) +
                                            " arguments, got " + std::to_string(argc));
      }
      out.items.push_back(Token::arg_count(argc));
      out.items.push_back(std::move(fn));
      return;
    }
    const OpInfo& info = op_info(fn.op);
    if (info.arity < 0) {
      if (argc < 2) {
        throw Error(Status::ArityError,
                    name + " needs x and at least one coefficient, got " + std::to_string(argc));
      }
      out.items.push_back(Token::arg_count(argc));
    } else if (argc != static_cast<std::size_t>(info.arity)) {
      throw Error(Status::ArityError, name + " takes " + std::to_string(info.arity) +
                                          " argument(s), got " + std::to_string(argc));
    }
    out.items.push_back(std::move(fn));
  };

  for (const Token& t : tokens) {
    const bool was_after_function = after_function;
    after_function = false;
    if (was_after_function && !(t.kind == Token::Kind::Op && t.op == OpCode::LBracket)) {
      throw syntax("function call must be followed by '('");
    }
    switch (t.kind) {
      case Token::Kind::Number:
      case Token::Kind::Identifier:
        if (!expect_operand) throw syntax("missing operator before '" + to_string(t) + "'");
        if (t.kind == Token::Kind::Identifier) out.free_vars.insert(t.name);
        out.items.push_back(t);
        expect_operand = false;
        break;
      case Token::Kind::ArgCountMarker:
        throw syntax("unexpected argument marker in infix input");
      case Token::Kind::Call:
        if (!expect_operand) throw syntax("missing operator before '" + t.name + "'");
        stack.push_back({t});
        after_function = true;
        break;
      case Token::Kind::Comma: {
        if (expect_operand) throw syntax("missing argument before ','");
        while (!stack.empty() && !(stack.back().token.kind == Token::Kind::Op &&
                                   stack.back().token.op == OpCode::LBracket)) {
          out.items.push_back(stack.back().token);
          stack.pop_back();
        }
        if (stack.empty() || !stack.back().call_bracket) throw syntax("',' outside a function call");
        ++stack.back().args;
        expect_operand = true;
        break;
      }
      case Token::Kind::Op: {
        const OpCode op = t.op;
        if (op_info(op).is_function) {
          if (!expect_operand) throw syntax("missing operator before '" + to_string(t) + "'");
          stack.push_back({t});
          after_function = true;
        } else if (op == OpCode::LBracket) {
          if (!expect_operand) throw syntax("missing operator before '('");
          stack.push_back({t, was_after_function, 0});
          expect_operand = true;
        } else if (op == OpCode::RBracket) {
          bool empty_call = false;
          if (expect_operand) {
            // Only "f()" may close right after '('.
            const bool call_open =
                !stack.empty() && stack.back().call_bracket && stack.back().args == 0;
            if (!call_open) throw syntax("missing operand before ')'");
            empty_call = true;
          }
          while (!stack.empty() && !(stack.back().token.kind == Token::Kind::Op &&
                                     stack.back().token.op == OpCode::LBracket)) {
            out.items.push_back(stack.back().token);
            stack.pop_back();
          }
          if (stack.empty()) throw syntax("unbalanced ')'");
          const Pending bracket = stack.back();
          stack.pop_back();
          if (bracket.call_bracket) {
            finish_call(empty_call ? 0 : bracket.args + 1);
          } else if (empty_call) {
            throw syntax("empty brackets");
          }
          expect_operand = false;
        } else if (op == OpCode::Percent) {
          if (expect_operand) throw syntax("'%' must follow an operand");
          out.items.push_back(t);
        } else {
          if (expect_operand) throw syntax("missing operand before '" + to_string(t) + "'");
          while (!stack.empty() && stack.back().token.kind == Token::Kind::Op &&
                 is_binary(stack.back().token.op) &&
                 precedence(stack.back().token.op) >= precedence(op)) {
            out.items.push_back(stack.back().token);
            stack.pop_back();
          }
          stack.push_back({t});
          expect_operand = true;
        }
        break;
      }
    }
  }
  if (after_function) throw syntax("function call must be followed by '('");
  if (expect_operand) throw syntax("unexpected end of expression");
  while (!stack.empty()) {
    if (stack.back().token.kind == Token::Kind::Op && stack.back().token.op == OpCode::LBracket) {
      throw syntax("unbalanced '('");
    }
    out.items.push_back(stack.back().token);
    stack.pop_back();
  }
  if (!is_stack_balanced(out)) {
    throw Error(Status::SyntaxError, "expression does not reduce to a single value");
  }
  return out;
}

SuffixExpression compile(std::string_view source, const FunctionTable& functions) {
  return to_suffix(tokenize(source, functions));
}

namespace {
constexpr std::size_t kNoMarker = static_cast<std::size_t>(-1);
}  // namespace

bool is_stack_balanced(const SuffixExpression& expr) {
  std::ptrdiff_t depth = 0;
  std::size_t marker = kNoMarker;
  for (const Token& t : expr.items) {
    switch (t.kind) {
      case Token::Kind::Number:
      case Token::Kind::Identifier:
        ++depth;
        break;
      case Token::Kind::ArgCountMarker:
        marker = t.count;
        break;
      case Token::Kind::Comma:
        return false;
      case Token::Kind::Call:
      case Token::Kind::Op: {
        std::ptrdiff_t consumed = 0;
        if (t.kind == Token::Kind::Call || op_info(t.op).arity < 0) {
          if (marker == kNoMarker) return false;
          consumed = static_cast<std::ptrdiff_t>(marker);
          marker = kNoMarker;
        } else {
          if (t.op == OpCode::LBracket || t.op == OpCode::RBracket) return false;
          consumed = op_info(t.op).arity;
        }
        if (depth < consumed) return false;
        depth = depth - consumed + 1;
        break;
      }
    }
  }
  return depth == 1 && marker == kNoMarker;
}

namespace {

CalcResult need_number(const Value& v, std::string_view what, double& out) {
  if (const double* d = std::get_if<double>(&v)) {
    out = *d;
    return CalcResult::ok(0.0);
  }
  return CalcResult::fail(Status::TypeError,
                          std::string(what) + " expects a number, got a field series");
}

CalcResult apply_op(OpCode op, std::span<const Value> args) {
  std::array<double, 2> x{};
  if (op != OpCode::Poly) {
    for (std::size_t i = 0; i < args.size(); ++i) {
      auto r = need_number(args[i], op_info(op).symbol, x[i]);
      if (!r.is_ok()) return r;
    }
  }
  const auto domain = [](const std::string& msg) {
    return CalcResult::fail(Status::DomainError, msg);
  };
  double r = 0.0;
  switch (op) {
    case OpCode::Plus:
      r = x[0] + x[1];
      break;
    case OpCode::Subtract:
      r = x[0] - x[1];
      break;
    case OpCode::Mult:
      r = x[0] * x[1];
      break;
    case OpCode::Divide:
      if (x[1] == 0.0) return CalcResult::fail(Status::DivideByZero, "division by zero");
      r = x[0] / x[1];
      break;
    case OpCode::Percent:
      r = x[0] / 100.0;
      break;
    case OpCode::Absolute:
      r = std::fabs(x[0]);
      break;
    case OpCode::CubeRoot:
      r = std::cbrt(x[0]);
      break;
    case OpCode::Exp:
      r = std::exp(x[0]);
      break;
    case OpCode::Log:
      if (x[0] <= 0.0) return domain("log of a non-positive number");
      r = std::log(x[0]);
      break;
    case OpCode::Log10:
      if (x[0] <= 0.0) return domain("log10 of a non-positive number");
      r = std::log10(x[0]);
      break;
    case OpCode::Power:
      r = std::pow(x[0], x[1]);
      break;
    case OpCode::SqRoot:
      if (x[0] < 0.0) return domain("sqrt of a negative number");
      r = std::sqrt(x[0]);
      break;
    case OpCode::Cubic:
      r = x[0] * x[0] * x[0];
      break;
    case OpCode::Poly: {
      std::vector<double> v(args.size());
      for (std::size_t i = 0; i < args.size(); ++i) {
        auto check = need_number(args[i], "poly", v[i]);
        if (!check.is_ok()) return check;
      }
      const double at = v[0];
      r = v.back();
      for (std::size_t i = v.size() - 1; i-- > 1;) r = r * at + v[i];
      break;
    }
    case OpCode::LBracket:
    case OpCode::RBracket:
      return CalcResult::fail(Status::SyntaxError, "bracket in suffix expression");
  }
  if (!std::isfinite(r)) {
    return domain(std::string(op_info(op).symbol) + " result is not a finite number");
  }
  return CalcResult::ok(r);
}

}  // namespace

CalcResult eval_suffix(const SuffixExpression& expr, const Environment& env) {
  std::vector<Value> stack;
  std::size_t marker = kNoMarker;
  const auto arity_error = [] {
    return CalcResult::fail(Status::ArityError, "operand stack underflow");
  };

  for (const Token& t : expr.items) {
    switch (t.kind) {
      case Token::Kind::Number:
        stack.emplace_back(t.number);
        break;
      case Token::Kind::Identifier: {
        auto it = env.find(t.name);
        if (it == env.end()) {
          return CalcResult::fail(Status::UnknownSymbol, "unbound name '" + t.name + "'");
        }
        stack.push_back(it->second);
        break;
      }
      case Token::Kind::ArgCountMarker:
        marker = t.count;
        break;
      case Token::Kind::Comma:
        return CalcResult::fail(Status::SyntaxError, "comma in suffix expression");
      case Token::Kind::Call:
      case Token::Kind::Op: {
        std::size_t n = 0;
        if (t.kind == Token::Kind::Call || op_info(t.op).arity < 0) {
          if (marker == kNoMarker) return arity_error();
          n = marker;
          marker = kNoMarker;
        } else {
          n = static_cast<std::size_t>(op_info(t.op).arity);
        }
        if (stack.size() < n) return arity_error();
        const std::span<const Value> args(stack.data() + (stack.size() - n), n);
        CalcResult r = t.kind == Token::Kind::Call ? t.fn->impl(args) : apply_op(t.op, args);
        if (!r.is_ok()) return r;
        stack.resize(stack.size() - n);
        stack.emplace_back(*r);
        break;
      }
    }
  }
  if (stack.size() != 1) return arity_error();
  double result = 0.0;
  auto check = need_number(stack.front(), "expression result", result);
  if (!check.is_ok()) return check;
  return CalcResult::ok(result);
}

}  // namespace evspace
