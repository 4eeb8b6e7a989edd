#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>

#include "ubve/errors.hpp"

namespace ubve {

/// Compiles a one-variable expression into a callable.
///
/// Grammar (whitespace ignored):
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | power
///   power  := atom ('^' unary)?
///   atom   := number | variable | func '(' expr ')' | '(' expr ')'
///   func   := exp | erf | sqrt
/// `variable` is the single name passed in (typically "x" or "t").
inline std::function<double(double)> compile_expression(const std::string& text,
                                                        const std::string& variable = "x") {
  using Fn = std::function<double(double)>;

  struct Parser {
    const std::string& s;
    const std::string& var;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
      throw InvalidArgument("expression '" + s + "': " + what + " at offset " +
                            std::to_string(pos));
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    Fn expr() {
      Fn lhs = term();
      for (;;) {
        if (eat('+')) {
          Fn rhs = term();
          lhs = [lhs, rhs](double v) { return lhs(v) + rhs(v); };
        } else if (eat('-')) {
          Fn rhs = term();
          lhs = [lhs, rhs](double v) { return lhs(v) - rhs(v); };
        } else {
          return lhs;
        }
      }
    }
    Fn term() {
      Fn lhs = unary();
      for (;;) {
        if (eat('*')) {
          Fn rhs = unary();
          lhs = [lhs, rhs](double v) { return lhs(v) * rhs(v); };
        } else if (eat('/')) {
          Fn rhs = unary();
          lhs = [lhs, rhs](double v) { return lhs(v) / rhs(v); };
        } else {
          return lhs;
        }
      }
    }
    Fn unary() {
      if (eat('-')) {
        Fn arg = unary();
        return [arg](double v) { return -arg(v); };
      }
      return power();
    }
    Fn power() {
      Fn base = atom();
      if (eat('^')) {
        Fn ex = unary();
        return [base, ex](double v) { return std::pow(base(v), ex(v)); };
      }
      return base;
    }
    Fn atom() {
      skip();
      if (pos >= s.size()) fail("unexpected end");
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const char* begin = s.c_str() + pos;
        char* end = nullptr;
        const double value = std::strtod(begin, &end);
        if (end == begin) fail("bad number");
        pos += static_cast<std::size_t>(end - begin);
        return [value](double) { return value; };
      }
      if (eat('(')) {
        Fn inner = expr();
        if (!eat(')')) fail("expected ')'");
        return inner;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        std::size_t end = pos;
        while (end < s.size() && std::isalnum(static_cast<unsigned char>(s[end]))) ++end;
        const std::string name = s.substr(pos, end - pos);
        pos = end;
        if (name == var) return [](double v) { return v; };
        double (*fn)(double) = nullptr;
        if (name == "exp") fn = [](double a) { return std::exp(a); };
        else if (name == "erf") fn = [](double a) { return std::erf(a); };
        else if (name == "sqrt") fn = [](double a) { return std::sqrt(a); };
        else fail("unknown name '" + name + "'");
        if (!eat('(')) fail("expected '(' after " + name);
        Fn arg = expr();
        if (!eat(')')) fail("expected ')'");
        return [fn, arg](double v) { return fn(arg(v)); };
      }
      fail(std::string("unexpected character '") + c + "'");
    }
  };

  Parser p{text, variable};
  Fn fn = p.expr();
  p.skip();
  if (p.pos != text.size()) p.fail("trailing input");
  return fn;
}

}  // namespace ubve
