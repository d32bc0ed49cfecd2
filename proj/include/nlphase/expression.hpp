#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nlphase/types.hpp"

namespace nlphase {

/// Syntax or name-resolution error in an expression, carrying the byte offset of the fault.
class ParseError : public ConfigError {
public:
  ParseError(const std::string& message, std::size_t offset);
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

/// Compiled scalar expression over the variables x1..x8.
///
/// Grammar: numeric literals, identifiers x1..x8, the constants pi and e, binary + - * / ^
/// (^ is right associative and binds tighter than unary minus), unary -, parentheses, and the
/// functions sin cos exp log sqrt abs sgn. Evaluation walks a postfix program on a fixed-size
/// stack, so a compiled expression is immutable and safe to evaluate from many threads.
class Expression {
public:
  static constexpr int kMaxVariables = 8;

  static Expression parse(std::string_view text);

  /// Evaluates with x[k] bound to x{k+1}. Variables beyond x.size() are an error.
  double operator()(std::span<const double> x) const;

  const std::string& text() const { return text_; }
  /// Bit k set iff x{k+1} appears in the expression.
  std::uint32_t variables_used() const { return variables_used_; }
  /// Highest variable index referenced (1-based), 0 for closed expressions.
  int arity() const;

private:
  enum class Op : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log, Sqrt, Abs, Sgn };
  struct Instr {
    Op op;
    double value = 0.0;
    int index = 0;
  };

  class Parser;

  std::string text_;
  std::vector<Instr> program_;
  std::uint32_t variables_used_ = 0;
  int max_stack_ = 0;
};

}  // namespace nlphase
