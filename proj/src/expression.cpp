#include "nlphase/expression.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace nlphase {

ParseError::ParseError(const std::string& message, std::size_t offset)
    : ConfigError(message + " at byte " + std::to_string(offset)), offset_(offset) {}

namespace {
constexpr int kStackLimit = 64;
}

class Expression::Parser {
public:
  Parser(std::string_view text, Expression& out) : text_(text), out_(out) {}

  void run() {
    parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    if (out_.program_.empty()) throw ParseError("empty expression", 0);
  }

private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void emit(Op op, double value = 0.0, int index = 0) {
    out_.program_.push_back({op, value, index});
    switch (op) {
      case Op::Const:
      case Op::Var: ++depth_; break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Pow: --depth_; break;
      default: break;
    }
    if (depth_ > out_.max_stack_) out_.max_stack_ = depth_;
    if (depth_ > kStackLimit) throw ParseError("expression nests too deeply", pos_);
  }

  void parse_sum() {
    parse_product();
    for (;;) {
      if (accept('+')) {
        parse_product();
        emit(Op::Add);
      } else if (accept('-')) {
        parse_product();
        emit(Op::Sub);
      } else {
        return;
      }
    }
  }

  void parse_product() {
    parse_unary();
    for (;;) {
      if (accept('*')) {
        parse_unary();
        emit(Op::Mul);
      } else if (accept('/')) {
        parse_unary();
        emit(Op::Div);
      } else {
        return;
      }
    }
  }

  void parse_unary() {
    if (accept('-')) {
      parse_unary();
      emit(Op::Neg);
    } else if (accept('+')) {
      parse_unary();
    } else {
      parse_power();
    }
  }

  void parse_power() {
    parse_primary();
    if (accept('^')) {
      parse_unary();
      emit(Op::Pow);
    }
  }

  void parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      parse_sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      parse_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      parse_identifier();
      return;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  void parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const auto* first = text_.data() + start;
    const auto* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ParseError("malformed number", start);
    emit(Op::Const, value);
  }

  void parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    if (name == "pi") return emit(Op::Const, std::numbers::pi);
    if (name == "e") return emit(Op::Const, std::numbers::e);

    if (name.size() >= 2 && name[0] == 'x') {
      int index = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec == std::errc() && ptr == name.data() + name.size() && index >= 1 && index <= kMaxVariables &&
          name[1] != '0') {
        out_.variables_used_ |= (1u << (index - 1));
        return emit(Op::Var, 0.0, index - 1);
      }
    }

    static constexpr std::array<std::pair<std::string_view, Op>, 7> kFunctions{{
        {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"log", Op::Log},
        {"sqrt", Op::Sqrt}, {"abs", Op::Abs}, {"sgn", Op::Sgn},
    }};
    for (const auto& [fname, op] : kFunctions) {
      if (name == fname) {
        if (!accept('(')) throw ParseError("expected '(' after function '" + std::string(name) + "'", pos_);
        parse_sum();
        if (!accept(')')) throw ParseError("expected ')'", pos_);
        return emit(op);
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  Expression& out_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.text_ = std::string(text);
  Parser(text, e).run();
  return e;
}

int Expression::arity() const {
  int n = 0;
  for (int k = 0; k < kMaxVariables; ++k)
    if (variables_used_ & (1u << k)) n = k + 1;
  return n;
}

double Expression::operator()(std::span<const double> x) const {
  std::array<double, kStackLimit + 1> stack;
  int top = -1;
  for (const Instr& in : program_) {
    switch (in.op) {
      case Op::Const: stack[++top] = in.value; break;
      case Op::Var:
        if (static_cast<std::size_t>(in.index) >= x.size())
          throw DomainError("expression '" + text_ + "' uses x" + std::to_string(in.index + 1) +
                            " but only " + std::to_string(x.size()) + " coordinates were given");
        stack[++top] = x[static_cast<std::size_t>(in.index)];
        break;
      case Op::Add: stack[top - 1] += stack[top]; --top; break;
      case Op::Sub: stack[top - 1] -= stack[top]; --top; break;
      case Op::Mul: stack[top - 1] *= stack[top]; --top; break;
      case Op::Div: stack[top - 1] /= stack[top]; --top; break;
      case Op::Pow: stack[top - 1] = std::pow(stack[top - 1], stack[top]); --top; break;
      case Op::Neg: stack[top] = -stack[top]; break;
      case Op::Sin: stack[top] = std::sin(stack[top]); break;
      case Op::Cos: stack[top] = std::cos(stack[top]); break;
      case Op::Exp: stack[top] = std::exp(stack[top]); break;
      case Op::Log: stack[top] = std::log(stack[top]); break;
      case Op::Sqrt: stack[top] = std::sqrt(stack[top]); break;
      case Op::Abs: stack[top] = std::abs(stack[top]); break;
      case Op::Sgn: stack[top] = (stack[top] > 0.0) - (stack[top] < 0.0); break;
    }
  }
  return stack[0];
}

}  // namespace nlphase
