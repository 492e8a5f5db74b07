#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include "gpo/errors.hpp"
#include "gpo/problem.hpp"

namespace gpo {
namespace {

enum class Tok { Ident, Number, Plus, Minus, Star, Slash, Caret, LParen, RParen, Ge, Le, EqEq, End };

struct Token {
  Tok kind;
  std::string text;
  int column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    const char ch = line[i];
    const int col = static_cast<int>(i) + 1;
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    if (ch == '#') break;
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i + 1;
      while (j < line.size() &&
             (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_')) {
        ++j;
      }
      out.push_back({Tok::Ident, std::string(line.substr(i, j - i)), col});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      std::size_t j = i;
      while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      if (j < line.size() && line[j] == '.') {
        ++j;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
      }
      if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < line.size() && (line[k] == '+' || line[k] == '-')) ++k;
        if (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) {
          while (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) ++k;
          j = k;
        }
      }
      std::string text(line.substr(i, j - i));
      if (text == ".") throw ParseError("malformed number", line_no, col);
      out.push_back({Tok::Number, std::move(text), col});
      i = j;
      continue;
    }
    auto two = [&](char next) { return i + 1 < line.size() && line[i + 1] == next; };
    switch (ch) {
      case '+': out.push_back({Tok::Plus, "+", col}); break;
      case '-': out.push_back({Tok::Minus, "-", col}); break;
      case '*': out.push_back({Tok::Star, "*", col}); break;
      case '/': out.push_back({Tok::Slash, "/", col}); break;
      case '^': out.push_back({Tok::Caret, "^", col}); break;
      case '(': out.push_back({Tok::LParen, "(", col}); break;
      case ')': out.push_back({Tok::RParen, ")", col}); break;
      case '>':
        if (!two('=')) throw ParseError("expected '>='", line_no, col);
        out.push_back({Tok::Ge, ">=", col});
        ++i;
        break;
      case '<':
        if (!two('=')) throw ParseError("expected '<='", line_no, col);
        out.push_back({Tok::Le, "<=", col});
        ++i;
        break;
      case '=':
        if (!two('=')) throw ParseError("expected '=='", line_no, col);
        out.push_back({Tok::EqEq, "==", col});
        ++i;
        break;
      default:
        throw ParseError(std::string("unexpected character '") + ch + "'", line_no, col);
    }
    ++i;
  }
  out.push_back({Tok::End, "", static_cast<int>(line.size()) + 1});
  return out;
}

double parse_number(const Token& t, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(t.text.c_str(), &end);
  if (end != t.text.c_str() + t.text.size() || !std::isfinite(v)) {
    throw ParseError("malformed number '" + t.text + "'", line_no, t.column);
  }
  return v;
}

// Recursive descent over one line's tokens:
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('+' | '-') unary | power
//   power  := primary ('^' integer)?
//   primary:= number | ident | '(' expr ')'
class ExprParser {
 public:
  ExprParser(const std::vector<Token>& toks, std::size_t pos, int line_no,
             const std::map<std::string, std::size_t>& vars)
      : toks_(toks), pos_(pos), line_(line_no), vars_(vars) {}

  Polynomial expr() {
    Polynomial acc = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const bool minus = next().kind == Tok::Minus;
      Polynomial rhs = term();
      if (minus) {
        acc -= rhs;
      } else {
        acc += rhs;
      }
    }
    return acc;
  }

  std::size_t position() const { return pos_; }
  const Token& peek() const { return toks_[pos_]; }

 private:
  const Token& next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw ParseError(msg, line_, at.column);
  }

  Polynomial term() {
    Polynomial acc = unary();
    for (;;) {
      const Token& t = peek();
      if (t.kind == Tok::Star) {
        next();
        acc = acc * unary();
      } else if (t.kind == Tok::Slash) {
        next();
        const Token& at = peek();
        Polynomial divisor = unary();
        if (!divisor.is_constant()) fail("division by a non-constant expression", at);
        const double d = divisor.constant_term();
        if (d == 0.0) fail("division by zero", at);
        acc *= 1.0 / d;
      } else if (t.kind == Tok::Ident || t.kind == Tok::Number || t.kind == Tok::LParen) {
        fail("implicit multiplication is not allowed; use '*'", t);
      } else {
        return acc;
      }
    }
  }

  Polynomial unary() {
    if (peek().kind == Tok::Minus) {
      next();
      return -unary();
    }
    if (peek().kind == Tok::Plus) {
      next();
      return unary();
    }
    return power();
  }

  Polynomial power() {
    Polynomial base = primary();
    if (peek().kind != Tok::Caret) return base;
    next();
    const Token& e = peek();
    if (e.kind == Tok::Minus) fail("negative exponents are not allowed", e);
    if (e.kind != Tok::Number) fail("exponent must be a nonnegative integer literal", e);
    if (e.text.find_first_not_of("0123456789") != std::string::npos) {
      fail("fractional exponent '" + e.text + "' is not allowed", e);
    }
    next();
    int exponent = 0;
    auto [ptr, ec] = std::from_chars(e.text.data(), e.text.data() + e.text.size(), exponent);
    if (ec != std::errc() || exponent > 64) fail("exponent too large", e);
    if (peek().kind == Tok::Caret) fail("chained exponents are ambiguous; use parentheses", peek());
    return poly_pow(base, exponent);
  }

  Polynomial primary() {
    const std::size_t n = vars_.size();
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number:
        next();
        return Polynomial::constant(n, parse_number(t, line_));
      case Tok::Ident: {
        next();
        auto it = vars_.find(t.text);
        if (it == vars_.end()) fail("unknown variable '" + t.text + "'", t);
        return Polynomial::variable(n, it->second);
      }
      case Tok::LParen: {
        next();
        Polynomial inner = expr();
        if (peek().kind != Tok::RParen) fail("expected ')'", peek());
        next();
        return inner;
      }
      case Tok::End:
        fail("unexpected end of line in expression", t);
      default:
        fail("unexpected '" + t.text + "' in expression", t);
    }
  }

  const std::vector<Token>& toks_;
  std::size_t pos_;
  int line_;
  const std::map<std::string, std::size_t>& vars_;
};

double parse_constant(const std::vector<Token>& toks, std::size_t& pos, int line_no,
                      const std::map<std::string, std::size_t>& vars) {
  // A bound is a signed literal, optionally a rational a/b; parse it with the
  // expression grammar but stop before the next bare literal.
  const Token& start = toks[pos];
  std::size_t end = pos;
  if (toks[end].kind == Tok::Minus || toks[end].kind == Tok::Plus) ++end;
  if (toks[end].kind != Tok::Number) {
    throw ParseError("expected a numeric bound", line_no, toks[end].column);
  }
  ++end;
  if (toks[end].kind == Tok::Slash) {
    end += 1;
    if (toks[end].kind != Tok::Number) {
      throw ParseError("expected a number after '/'", line_no, toks[end].column);
    }
    ++end;
  }
  std::vector<Token> sub(toks.begin() + static_cast<std::ptrdiff_t>(pos),
                         toks.begin() + static_cast<std::ptrdiff_t>(end));
  sub.push_back({Tok::End, "", toks[end].column});
  ExprParser p(sub, 0, line_no, vars);
  Polynomial value = p.expr();
  if (!value.is_constant()) throw ParseError("bound must be constant", line_no, start.column);
  pos = end;
  return value.constant_term();
}

}  // namespace

Polynomial parse_polynomial(std::string_view text, std::span<const std::string> variables) {
  std::map<std::string, std::size_t> vars;
  for (std::size_t i = 0; i < variables.size(); ++i) vars.emplace(variables[i], i);
  auto toks = tokenize(text, 1);
  ExprParser p(toks, 0, 1, vars);
  Polynomial out = p.expr();
  if (p.peek().kind != Tok::End) {
    throw ParseError("unexpected '" + p.peek().text + "' after expression", 1, p.peek().column);
  }
  return out;
}

GpoProblem parse_problem(std::string_view text) {
  GpoProblem problem;
  std::map<std::string, std::size_t> vars;
  bool have_vars = false;
  bool have_objective = false;
  std::vector<double> lo, hi;
  std::vector<bool> bounded;
  bool any_box = false;

  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string_view line = text.substr(start, stop - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = stop + 1;
    ++line_no;

    const auto toks = tokenize(line, line_no);
    if (toks.front().kind == Tok::End) continue;
    const Token& kw = toks.front();
    if (kw.kind != Tok::Ident) {
      throw ParseError("expected a statement keyword", line_no, kw.column);
    }

    if (kw.text == "vars") {
      if (have_vars) throw ParseError("duplicate 'vars' declaration", line_no, kw.column);
      for (std::size_t i = 1; toks[i].kind != Tok::End; ++i) {
        if (toks[i].kind != Tok::Ident) {
          throw ParseError("expected a variable name", line_no, toks[i].column);
        }
        if (toks[i].text == "vars" || toks[i].text == "minimize" || toks[i].text == "st" ||
            toks[i].text == "box") {
          throw ParseError("reserved word used as variable name", line_no, toks[i].column);
        }
        if (!vars.emplace(toks[i].text, problem.variables.size()).second) {
          throw ParseError("duplicate variable '" + toks[i].text + "'", line_no, toks[i].column);
        }
        problem.variables.push_back(toks[i].text);
      }
      if (problem.variables.empty()) {
        throw ParseError("'vars' needs at least one name", line_no, toks[1].column);
      }
      have_vars = true;
      const std::size_t n = problem.variables.size();
      problem.objective = Polynomial(n);
      lo.assign(n, 0.0);
      hi.assign(n, 0.0);
      bounded.assign(n, false);
      continue;
    }

    if (!have_vars) {
      throw ParseError("'" + kw.text + "' before the 'vars' declaration", line_no, kw.column);
    }

    if (kw.text == "minimize") {
      if (have_objective) throw ParseError("duplicate objective", line_no, kw.column);
      ExprParser p(toks, 1, line_no, vars);
      problem.objective = p.expr();
      if (p.peek().kind != Tok::End) {
        throw ParseError("unexpected '" + p.peek().text + "' after objective", line_no,
                         p.peek().column);
      }
      have_objective = true;
    } else if (kw.text == "st") {
      ExprParser lhs_parser(toks, 1, line_no, vars);
      Polynomial lhs = lhs_parser.expr();
      const Token& op = lhs_parser.peek();
      if (op.kind != Tok::Ge && op.kind != Tok::Le && op.kind != Tok::EqEq) {
        throw ParseError("expected '>=', '<=' or '==' in constraint", line_no, op.column);
      }
      ExprParser rhs_parser(toks, lhs_parser.position() + 1, line_no, vars);
      Polynomial rhs = rhs_parser.expr();
      if (rhs_parser.peek().kind != Tok::End) {
        throw ParseError("unexpected '" + rhs_parser.peek().text + "' after constraint",
                         line_no, rhs_parser.peek().column);
      }
      if (op.kind == Tok::Ge) {
        problem.inequalities.push_back(lhs - rhs);
      } else if (op.kind == Tok::Le) {
        problem.inequalities.push_back(rhs - lhs);
      } else {
        problem.equalities.push_back(lhs - rhs);
      }
    } else if (kw.text == "box") {
      std::size_t pos = 1;
      std::optional<std::size_t> target;
      if (toks[pos].kind == Tok::Ident) {
        auto it = vars.find(toks[pos].text);
        if (it == vars.end()) {
          throw ParseError("unknown variable '" + toks[pos].text + "'", line_no, toks[pos].column);
        }
        target = it->second;
        ++pos;
      }
      const int lo_col = toks[pos].column;
      const double a = parse_constant(toks, pos, line_no, vars);
      const double b = parse_constant(toks, pos, line_no, vars);
      if (toks[pos].kind != Tok::End) {
        throw ParseError("unexpected '" + toks[pos].text + "' after box bounds", line_no,
                         toks[pos].column);
      }
      if (!(a < b)) throw ParseError("box requires lo < hi", line_no, lo_col);
      for (std::size_t i = 0; i < problem.variables.size(); ++i) {
        if (target && *target != i) continue;
        lo[i] = a;
        hi[i] = b;
        bounded[i] = true;
      }
      any_box = true;
    } else {
      throw ParseError("unknown statement '" + kw.text + "'", line_no, kw.column);
    }
  }

  if (!have_vars) throw ParseError("missing 'vars' declaration", line_no, 1);
  if (!have_objective) throw ParseError("missing 'minimize' objective", line_no, 1);
  if (any_box) {
    for (std::size_t i = 0; i < bounded.size(); ++i) {
      if (!bounded[i]) {
        throw ParseError("box does not bound variable '" + problem.variables[i] + "'", line_no, 1);
      }
    }
    problem.box = HyperRectangle(lo, hi);
  }
  return problem;
}

}  // namespace gpo
