#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmt/error.hpp"
#include "cmt/format.hpp"
#include "cmt/matrix.hpp"
#include "cmt/poly.hpp"

namespace cmt {

/// Maximum residual constant term accepted when moving an equilibrium to the
/// origin. Looser than the arithmetic prune since user points are approximate.
inline constexpr double equilibrium_tolerance = 1e-9;

struct SystemSpec {
  std::vector<std::string> variables;
  std::vector<std::pair<std::string, double>> parameters;
  PolyMap field;
  std::optional<std::vector<double>> equilibrium;
  /// Row-major basis override: columns are centre directions then stable.
  std::optional<Matrix> basis;

  std::size_t dimension() const noexcept { return variables.size(); }

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

namespace detail {

struct Token {
  enum class Kind { ident, number, op, end } kind = Kind::end;
  std::string text;
  double value = 0.0;
  std::size_t column = 0;
};

class Lexer {
 public:
  Lexer(std::string_view text, std::size_t line, std::size_t column0)
      : text_(text), line_(line), column0_(column0) {
    tokenize();
  }

  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  Token next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::end; }
  std::size_t line() const { return line_; }

  bool accept_op(char c) {
    if (peek().kind == Token::Kind::op && peek().text[0] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const Token& at, const std::string& what) const {
    throw ParseError(line_, at.column, what);
  }

 private:
  void tokenize() {
    std::size_t i = 0;
    while (i < text_.size()) {
      const char ch = text_[i];
      const std::size_t col = column0_ + i;
      if (std::isspace(static_cast<unsigned char>(ch))) {
        ++i;
      } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
        std::size_t j = i;
        while (j < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_'))
          ++j;
        tokens_.push_back({Token::Kind::ident, std::string(text_.substr(i, j - i)), 0.0, col});
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
        std::size_t j = i;
        while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
        if (j < text_.size() && text_[j] == '.') {
          ++j;
          while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
        }
        if (j < text_.size() && (text_[j] == 'e' || text_[j] == 'E')) {
          std::size_t k = j + 1;
          if (k < text_.size() && (text_[k] == '+' || text_[k] == '-')) ++k;
          if (k < text_.size() && std::isdigit(static_cast<unsigned char>(text_[k]))) {
            while (k < text_.size() && std::isdigit(static_cast<unsigned char>(text_[k]))) ++k;
            j = k;
          }
        }
        const std::string lit(text_.substr(i, j - i));
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(lit.data(), lit.data() + lit.size(), v);
        if (ec != std::errc() || ptr != lit.data() + lit.size())
          throw ParseError(line_, col, "malformed number '" + lit + "'");
        tokens_.push_back({Token::Kind::number, lit, v, col});
        i = j;
      } else if (std::string_view("+-*/^()=").find(ch) != std::string_view::npos) {
        tokens_.push_back({Token::Kind::op, std::string(1, ch), 0.0, col});
        ++i;
      } else {
        throw ParseError(line_, col, std::string("unexpected character '") + ch + "'");
      }
    }
    tokens_.push_back({Token::Kind::end, "", 0.0, column0_ + text_.size()});
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t column0_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

/// Recursive-descent expression parser producing a polynomial directly.
class ExpressionParser {
 public:
  ExpressionParser(Lexer& lex, const std::vector<std::string>& vars,
                   const std::vector<std::pair<std::string, double>>& params)
      : lex_(lex), vars_(vars), params_(params) {}

  Polynomial parse_expression() {
    Polynomial acc = parse_term();
    for (;;) {
      if (lex_.accept_op('+')) {
        acc += parse_term();
      } else if (lex_.accept_op('-')) {
        acc -= parse_term();
      } else {
        return acc;
      }
    }
  }

 private:
  std::size_t nvars() const { return vars_.size(); }

  Polynomial parse_term() {
    Polynomial acc = parse_unary();
    for (;;) {
      if (lex_.accept_op('*')) {
        acc = acc * parse_unary();
      } else if (lex_.peek().kind == Token::Kind::op && lex_.peek().text == "/") {
        const Token slash = lex_.next();
        const Polynomial divisor = parse_unary();
        if (divisor.degree() > 0)
          lex_.fail(slash, "non-polynomial construct: division by an expression containing variables");
        const double d = divisor.coefficient(Monomial(nvars()));
        if (d == 0.0) lex_.fail(slash, "division by zero");
        acc *= 1.0 / d;
      } else {
        return acc;
      }
    }
  }

  Polynomial parse_unary() {
    if (lex_.accept_op('-')) return -parse_unary();
    if (lex_.accept_op('+')) return parse_unary();
    return parse_power();
  }

  Polynomial parse_power() {
    Polynomial base = parse_primary();
    if (lex_.peek().kind == Token::Kind::op && lex_.peek().text == "^") {
      const Token caret = lex_.next();
      const Token exp = lex_.next();
      if (exp.kind == Token::Kind::op && exp.text == "-")
        lex_.fail(exp, "non-polynomial construct: negative exponent");
      if (exp.kind != Token::Kind::number)
        lex_.fail(exp, "exponent must be a non-negative integer literal");
      if (exp.value != std::floor(exp.value) || exp.value > 64)
        lex_.fail(exp, "exponent must be a non-negative integer literal");
      (void)caret;
      return power(base, static_cast<int>(exp.value));
    }
    return base;
  }

  Polynomial parse_primary() {
    const Token tok = lex_.next();
    switch (tok.kind) {
      case Token::Kind::number:
        return Polynomial::constant(nvars(), tok.value);
      case Token::Kind::ident: {
        if (lex_.peek().kind == Token::Kind::op && lex_.peek().text == "(")
          lex_.fail(tok, "non-polynomial construct: function call '" + tok.text + "'");
        for (std::size_t i = 0; i < vars_.size(); ++i)
          if (vars_[i] == tok.text) return Polynomial::variable(nvars(), i);
        for (const auto& [name, value] : params_)
          if (name == tok.text) return Polynomial::constant(nvars(), value);
        lex_.fail(tok, "undeclared identifier '" + tok.text + "'");
      }
      case Token::Kind::op:
        if (tok.text == "(") {
          Polynomial inner = parse_expression();
          if (!lex_.accept_op(')')) lex_.fail(lex_.peek(), "expected ')'");
          return inner;
        }
        lex_.fail(tok, "unexpected '" + tok.text + "'");
      case Token::Kind::end:
        lex_.fail(tok, "unexpected end of expression");
    }
    lex_.fail(tok, "unexpected token");
  }

  Lexer& lex_;
  const std::vector<std::string>& vars_;
  const std::vector<std::pair<std::string, double>>& params_;
};

struct Statement {
  std::string text;
  std::size_t line;
  std::size_t column;  // 1-based column of text[0]
};

inline std::vector<Statement> split_statements(std::string_view text) {
  std::vector<Statement> out;
  std::size_t line = 1;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(start, end - start);
    if (auto hash = row.find('#'); hash != std::string_view::npos) row = row.substr(0, hash);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    std::size_t piece = 0;
    while (piece <= row.size()) {
      std::size_t semi = row.find(';', piece);
      if (semi == std::string_view::npos) semi = row.size();
      std::string_view stmt = row.substr(piece, semi - piece);
      std::size_t lead = 0;
      while (lead < stmt.size() && std::isspace(static_cast<unsigned char>(stmt[lead]))) ++lead;
      if (lead < stmt.size())
        out.push_back({std::string(stmt.substr(lead)), line, piece + lead + 1});
      piece = semi + 1;
    }
    ++line;
    start = end + 1;
  }
  return out;
}

inline bool is_keyword(const std::string& s) {
  return s == "vars" || s == "param" || s == "equilibrium" || s == "basis";
}

/// `[sign] (number | parameter)` entries of `equilibrium` and `basis` lines.
inline std::vector<double> parse_value_list(
    Lexer& lex, const std::vector<std::pair<std::string, double>>& params) {
  std::vector<double> values;
  while (!lex.at_end()) {
    double sign = 1.0;
    while (lex.peek().kind == Token::Kind::op &&
           (lex.peek().text == "-" || lex.peek().text == "+")) {
      if (lex.next().text == "-") sign = -sign;
    }
    const Token tok = lex.next();
    if (tok.kind == Token::Kind::number) {
      values.push_back(sign * tok.value);
    } else if (tok.kind == Token::Kind::ident) {
      bool found = false;
      for (const auto& [name, value] : params)
        if (name == tok.text) {
          values.push_back(sign * value);
          found = true;
          break;
        }
      if (!found) lex.fail(tok, "undeclared parameter '" + tok.text + "'");
    } else {
      lex.fail(tok, "expected a number or parameter name");
    }
  }
  return values;
}

}  // namespace detail

/// Parses the line-oriented system format:
///
///   vars x y z
///   param l = 2
///   equilibrium 0 0 0        (optional)
///   basis 1 0 0 0 1 0 0 0 1  (optional, row-major n*n)
///   dx/dt = l*y + x^2
///
/// `#` starts a comment and `;` separates statements on one line.
inline SystemSpec parse_system(std::string_view text) {
  using detail::Lexer;
  using detail::Token;
  const auto statements = detail::split_statements(text);

  SystemSpec spec;
  bool have_vars = false;
  std::set<std::string> names;

  // First pass: declarations, so equations may precede parameters.
  for (const auto& st : statements) {
    Lexer lex(st.text, st.line, st.column);
    const Token head = lex.peek();
    if (head.kind != Token::Kind::ident) continue;
    if (head.text == "vars") {
      lex.next();
      if (have_vars) lex.fail(head, "duplicate 'vars' declaration");
      have_vars = true;
      while (!lex.at_end()) {
        const Token v = lex.next();
        if (v.kind != Token::Kind::ident) lex.fail(v, "expected a variable name");
        if (detail::is_keyword(v.text)) lex.fail(v, "'" + v.text + "' is reserved");
        if (!names.insert(v.text).second) lex.fail(v, "duplicate name '" + v.text + "'");
        spec.variables.push_back(v.text);
      }
      if (spec.variables.empty()) lex.fail(head, "'vars' needs at least one name");
    } else if (head.text == "param") {
      lex.next();
      const Token name = lex.next();
      if (name.kind != Token::Kind::ident) lex.fail(name, "expected a parameter name");
      if (detail::is_keyword(name.text)) lex.fail(name, "'" + name.text + "' is reserved");
      if (!names.insert(name.text).second) lex.fail(name, "duplicate name '" + name.text + "'");
      if (!lex.accept_op('=')) lex.fail(lex.peek(), "expected '='");
      // Parameter values are constant expressions over earlier parameters.
      static const std::vector<std::string> no_vars;
      detail::ExpressionParser ep(lex, no_vars, spec.parameters);
      const Polynomial value = ep.parse_expression();
      if (!lex.at_end()) lex.fail(lex.peek(), "unexpected trailing input");
      spec.parameters.emplace_back(name.text, value.coefficient(Monomial(0)));
    }
  }
  if (!have_vars) throw ParseError(1, 1, "missing 'vars' declaration");
  for (const auto& [name, value] : spec.parameters)
    for (const auto& v : spec.variables)
      if (v == name) throw ParseError(1, 1, "name '" + name + "' is both variable and parameter");

  const std::size_t n = spec.variables.size();
  std::vector<std::optional<Polynomial>> rhs(n);

  for (const auto& st : statements) {
    Lexer lex(st.text, st.line, st.column);
    const Token head = lex.next();
    if (head.kind != Token::Kind::ident) lex.fail(head, "expected a statement");
    if (head.text == "vars" || head.text == "param") continue;
    if (head.text == "equilibrium") {
      if (spec.equilibrium) lex.fail(head, "duplicate 'equilibrium'");
      auto values = detail::parse_value_list(lex, spec.parameters);
      if (values.size() != n)
        lex.fail(head, "equilibrium needs " + std::to_string(n) + " values, got " +
                           std::to_string(values.size()));
      spec.equilibrium = std::move(values);
      continue;
    }
    if (head.text == "basis") {
      if (spec.basis) lex.fail(head, "duplicate 'basis'");
      auto values = detail::parse_value_list(lex, spec.parameters);
      if (values.size() != n * n)
        lex.fail(head, "basis needs " + std::to_string(n * n) + " values, got " +
                           std::to_string(values.size()));
      spec.basis = Matrix::from_row_major(n, n, values);
      continue;
    }
    // d<var>/dt = expression
    if (head.text.size() < 2 || head.text[0] != 'd')
      lex.fail(head, "unknown statement '" + head.text + "'");
    const std::string var = head.text.substr(1);
    std::size_t index = n;
    for (std::size_t i = 0; i < n; ++i)
      if (spec.variables[i] == var) index = i;
    if (index == n) lex.fail(head, "derivative of undeclared variable '" + var + "'");
    if (!lex.accept_op('/')) lex.fail(lex.peek(), "expected '/dt'");
    const Token dt = lex.next();
    if (dt.kind != Token::Kind::ident || dt.text != "dt") lex.fail(dt, "expected 'dt'");
    if (!lex.accept_op('=')) lex.fail(lex.peek(), "expected '='");
    if (rhs[index]) lex.fail(head, "duplicate equation for '" + var + "'");
    detail::ExpressionParser ep(lex, spec.variables, spec.parameters);
    rhs[index] = ep.parse_expression();
    if (!lex.at_end()) lex.fail(lex.peek(), "unexpected trailing input");
  }

  std::vector<Polynomial> components;
  std::string missing;
  for (std::size_t i = 0; i < n; ++i) {
    if (!rhs[i]) {
      missing += (missing.empty() ? "" : ", ") + spec.variables[i];
    } else {
      components.push_back(std::move(*rhs[i]));
    }
  }
  if (!missing.empty()) throw ParseError(1, 1, "missing equations for: " + missing);
  spec.field = PolyMap(std::move(components));
  return spec;
}

/// Canonical text form accepted back by parse_system.
inline std::string render_system(const SystemSpec& spec) {
  std::string out = "vars";
  for (const auto& v : spec.variables) out += " " + v;
  out += "\n";
  for (const auto& [name, value] : spec.parameters)
    out += "param " + name + " = " + format_shortest(value) + "\n";
  if (spec.equilibrium) {
    out += "equilibrium";
    for (double v : *spec.equilibrium) out += " " + format_shortest(v);
    out += "\n";
  }
  if (spec.basis) {
    out += "basis";
    for (double v : spec.basis->values()) out += " " + format_shortest(v);
    out += "\n";
  }
  for (std::size_t i = 0; i < spec.variables.size(); ++i)
    out += "d" + spec.variables[i] + "/dt = " + render(spec.field[i], spec.variables) + "\n";
  return out;
}

/// Re-expands every component about `point` (x -> x + point), no checks.
inline PolyMap translate_field(const PolyMap& field, std::span<const double> point) {
  if (point.size() != field.nvars())
    throw Error("sysdsl", ErrorKind::dimension_mismatch,
                "shift point has " + std::to_string(point.size()) + " entries for " +
                    std::to_string(field.nvars()) + " variables");
  std::vector<Polynomial> images;
  for (std::size_t i = 0; i < point.size(); ++i)
    images.push_back(Polynomial::variable(point.size(), i) +
                     Polynomial::constant(point.size(), point[i]));
  return compose(field, images);
}

/// Moves the equilibrium `point` to the origin. Throws not_equilibrium with
/// the per-component residuals if any constant term exceeds the tolerance;
/// otherwise the residual constants are removed.
inline SystemSpec shift_equilibrium(const SystemSpec& spec, std::span<const double> point) {
  if (point.size() != spec.dimension())
    throw Error("sysdsl", ErrorKind::dimension_mismatch,
                "equilibrium has " + std::to_string(point.size()) + " entries for " +
                    std::to_string(spec.dimension()) + " variables");
  PolyMap shifted = translate_field(spec.field, point);
  const Monomial origin(spec.dimension());
  std::string residuals;
  bool bad = false;
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    const double r = shifted[i].coefficient(origin);
    if (std::abs(r) > equilibrium_tolerance) bad = true;
    residuals += (i ? ", " : "") + spec.variables[i] + ": " + format_shortest(r);
  }
  if (bad)
    throw Error("sysdsl", ErrorKind::not_equilibrium,
                "point is not an equilibrium; residuals " + residuals);
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i].set_term(origin, 0.0);

  SystemSpec out = spec;
  out.field = std::move(shifted);
  out.equilibrium.reset();
  return out;
}

}  // namespace cmt
