#pragma once

// Noncommutative rational expressions in matrix variables Z1, Z2, ...
//
//   expr   := term (('+' | '-') term)*
//   term   := factor ('*' factor)*
//   factor := '-' factor | 'inv' '(' expr ')' | '(' expr ')' | atom
//   atom   := 'Z' digits | a | bi | i | '(' a ('+'|'-') bi ')'
//
// '*' is mandatory. A complex literal a+bi is a single constant only when it
// is the whole content of a parenthesised group. No simplification is done:
// the tree is what was written.

#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "ncpick/linalg.hpp"

namespace ncpick::ncrat {

struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, SourceSpan span) : Error(what), span_(span) {}
  SourceSpan span() const { return span_; }

 private:
  SourceSpan span_;
};

class SingularInverse : public Error {
 public:
  SingularInverse(const std::string& what, SourceSpan span) : Error(what), span_(span) {}
  SourceSpan span() const { return span_; }

 private:
  SourceSpan span_;
};

class UnboundVariable : public Error {
 public:
  UnboundVariable(const std::string& what, SourceSpan span) : Error(what), span_(span) {}
  SourceSpan span() const { return span_; }

 private:
  SourceSpan span_;
};

enum class Kind { Var, Const, Add, Neg, Mul, Inv };

class Expr {
 public:
  static Expr var(int index, SourceSpan span = {}) {
    if (index < 1) throw InvalidArgument("Expr::var: variable index must be >= 1");
    Expr e(Kind::Var, span);
    e.node_->index = index;
    return e;
  }
  static Expr constant(cplx value, SourceSpan span = {}) {
    Expr e(Kind::Const, span);
    e.node_->value = value;
    return e;
  }
  static Expr add(std::vector<Expr> terms, SourceSpan span = {}) { return nary(Kind::Add, std::move(terms), span); }
  static Expr mul(std::vector<Expr> factors, SourceSpan span = {}) { return nary(Kind::Mul, std::move(factors), span); }
  static Expr neg(Expr child, SourceSpan span = {}) { return unary(Kind::Neg, std::move(child), span); }
  static Expr inv(Expr child, SourceSpan span = {}) { return unary(Kind::Inv, std::move(child), span); }

  Kind kind() const { return node_->kind; }
  int index() const { return node_->index; }
  cplx value() const { return node_->value; }
  const std::vector<Expr>& children() const { return node_->children; }
  const Expr& child() const { return node_->children.front(); }
  SourceSpan span() const { return node_->span; }

  int depth() const {
    int d = 0;
    for (const auto& c : children()) d = std::max(d, c.depth());
    return d + 1;
  }

  /// Structural equality; spans are ignored.
  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Kind::Var:
        return a.index() == b.index();
      case Kind::Const:
        return a.value() == b.value();
      default:
        if (a.children().size() != b.children().size()) return false;
        for (size_t k = 0; k < a.children().size(); ++k)
          if (!(a.children()[k] == b.children()[k])) return false;
        return true;
    }
  }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  struct Node {
    Kind kind;
    int index = 0;
    cplx value{};
    std::vector<Expr> children;
    SourceSpan span;
  };

  Expr(Kind kind, SourceSpan span) : node_(std::make_shared<Node>()) {
    node_->kind = kind;
    node_->span = span;
  }
  static Expr nary(Kind kind, std::vector<Expr> children, SourceSpan span) {
    if (children.size() < 2) throw InvalidArgument("Expr: Add and Mul need at least two children");
    Expr e(kind, span);
    e.node_->children = std::move(children);
    return e;
  }
  static Expr unary(Kind kind, Expr child, SourceSpan span) {
    Expr e(kind, span);
    e.node_->children.push_back(std::move(child));
    return e;
  }

  std::shared_ptr<Node> node_;
};

namespace detail {

enum class Tok { Number, Imag, Var, Inv, Plus, Minus, Star, LParen, RParen, End };

struct Token {
  Tok type;
  SourceSpan span;
  double number = 0.0;
  int index = 0;
};

inline bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char c = text[pos];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
      continue;
    }
    const std::size_t start = pos;
    auto single = [&](Tok t) {
      out.push_back({t, {start, start + 1}});
      ++pos;
    };
    switch (c) {
      case '+': single(Tok::Plus); continue;
      case '-': single(Tok::Minus); continue;
      case '*': single(Tok::Star); continue;
      case '(': single(Tok::LParen); continue;
      case ')': single(Tok::RParen); continue;
      default: break;
    }
    if (is_digit(c) || (c == '.' && pos + 1 < text.size() && is_digit(text[pos + 1]))) {
      while (pos < text.size() && is_digit(text[pos])) ++pos;
      if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && is_digit(text[pos])) ++pos;
      }
      if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        std::size_t p = pos + 1;
        if (p < text.size() && (text[p] == '+' || text[p] == '-')) ++p;
        if (p < text.size() && is_digit(text[p])) {
          while (p < text.size() && is_digit(text[p])) ++p;
          pos = p;
        }
      }
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + pos, value);
      if (ec != std::errc() || ptr != text.data() + pos)
        throw ParseError("invalid number literal", {start, pos});
      bool imag = pos < text.size() && text[pos] == 'i' && !(pos + 1 < text.size() && is_alnum(text[pos + 1]));
      if (imag) ++pos;
      Token t{imag ? Tok::Imag : Tok::Number, {start, pos}};
      t.number = value;
      out.push_back(t);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (pos < text.size() && is_alnum(text[pos])) ++pos;
      std::string_view word = text.substr(start, pos - start);
      if (word == "inv") {
        out.push_back({Tok::Inv, {start, pos}});
      } else if (word == "i") {
        Token t{Tok::Imag, {start, pos}};
        t.number = 1.0;
        out.push_back(t);
      } else if (word.size() > 1 && word[0] == 'Z' &&
                 word.substr(1).find_first_not_of("0123456789") == std::string_view::npos) {
        int idx = 0;
        auto [ptr, ec] = std::from_chars(word.data() + 1, word.data() + word.size(), idx);
        if (ec != std::errc() || idx < 1) throw ParseError("variable index must be >= 1", {start, pos});
        Token t{Tok::Var, {start, pos}};
        t.index = idx;
        out.push_back(t);
      } else {
        throw ParseError("unknown token '" + std::string(word) + "'", {start, pos});
      }
      continue;
    }
    throw ParseError(std::string("unknown token '") + c + "'", {start, start + 1});
  }
  out.push_back({Tok::End, {text.size(), text.size()}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(lex(text)) {}

  Expr parse_all() {
    Expr e = parse_expr();
    if (peek().type == Tok::RParen) throw ParseError("unbalanced parentheses: unmatched ')'", peek().span);
    if (peek().type != Tok::End) throw ParseError("syntax error: unexpected token (operators are mandatory)", peek().span);
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  Expr parse_expr() {
    const std::size_t start = peek().span.start;
    std::vector<Expr> terms{parse_term()};
    while (peek().type == Tok::Plus || peek().type == Tok::Minus) {
      const Token op = next();
      Expr t = parse_term();
      if (op.type == Tok::Minus) t = Expr::neg(t, {op.span.start, t.span().end});
      terms.push_back(std::move(t));
    }
    if (terms.size() == 1) return terms.front();
    const std::size_t end = terms.back().span().end;
    return Expr::add(std::move(terms), {start, end});
  }

  Expr parse_term() {
    const std::size_t start = peek().span.start;
    std::vector<Expr> factors{parse_factor()};
    while (peek().type == Tok::Star) {
      next();
      factors.push_back(parse_factor());
    }
    if (factors.size() == 1) return factors.front();
    const std::size_t end = factors.back().span().end;
    return Expr::mul(std::move(factors), {start, end});
  }

  Expr parse_factor() {
    const Token& t = peek();
    switch (t.type) {
      case Tok::Minus: {
        const Token op = next();
        Expr inner = parse_factor();
        return Expr::neg(inner, {op.span.start, inner.span().end});
      }
      case Tok::Inv: {
        const Token kw = next();
        if (peek().type != Tok::LParen) throw ParseError("syntax error: expected '(' after inv", peek().span);
        next();
        Expr inner = parse_expr();
        const Token close = expect_close();
        return Expr::inv(inner, {kw.span.start, close.span.end});
      }
      case Tok::LParen: {
        if (is_packed_complex()) {
          const Token open = next();
          const Token re = next();
          const Token sign = next();
          const Token im = next();
          const Token close = next();
          double b = sign.type == Tok::Minus ? -im.number : im.number;
          return Expr::constant(cplx(re.number, b), {open.span.start, close.span.end});
        }
        next();
        Expr inner = parse_expr();
        expect_close();
        return inner;
      }
      case Tok::Var: {
        const Token v = next();
        return Expr::var(v.index, v.span);
      }
      case Tok::Number: {
        const Token v = next();
        return Expr::constant(cplx(v.number, 0.0), v.span);
      }
      case Tok::Imag: {
        const Token v = next();
        return Expr::constant(cplx(0.0, v.number), v.span);
      }
      case Tok::End:
        throw ParseError("syntax error: unexpected end of input", t.span);
      case Tok::RParen:
        throw ParseError("unbalanced parentheses: unmatched ')'", t.span);
      default:
        throw ParseError("syntax error: expected an operand", t.span);
    }
  }

  /// '(' a [+-] bi ')' written without whitespace.
  bool is_packed_complex() const {
    const Tok want[] = {Tok::LParen, Tok::Number, Tok::Plus, Tok::Imag, Tok::RParen};
    for (std::size_t k = 0; k < 5; ++k) {
      Tok got = peek(k).type;
      if (k == 2 ? (got != Tok::Plus && got != Tok::Minus) : got != want[k]) return false;
      if (k > 0 && peek(k - 1).span.end != peek(k).span.start) return false;
    }
    return true;
  }

  Token expect_close() {
    if (peek().type == Tok::RParen) return next();
    if (peek().type == Tok::End) throw ParseError("unbalanced parentheses: expected ')'", peek().span);
    throw ParseError("syntax error: expected ')'", peek().span);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

inline std::string format_real(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("format: non-finite constant");
  if (x == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

/// Literal for a constant with non-negative real part; Re < 0 falls back to a negated literal.
inline std::string format_const(cplx c) {
  double re = c.real(), im = c.imag();
  if (re < 0.0) {
    std::string inner = format_const(-c);
    return "(-" + inner + ")";
  }
  if (im == 0.0) return format_real(re);
  if (re == 0.0 && im > 0.0) return format_real(im) + "i";
  return "(" + format_real(re) + (im < 0 ? "-" : "+") + format_real(std::abs(im)) + "i)";
}

std::string format_expr(const Expr& e);

inline std::string paren(const std::string& s) { return "(" + s + ")"; }

inline std::string format_atomic(const Expr& e) {
  switch (e.kind()) {
    case Kind::Var:
      return "Z" + std::to_string(e.index());
    case Kind::Const:
      return format_const(e.value());
    case Kind::Inv:
      return "inv(" + format_expr(e.child()) + ")";
    default:
      return paren(format_expr(e));
  }
}

/// Operand of a prefix '-': anything but an atom is parenthesised.
inline std::string format_neg_operand(const Expr& e) { return format_atomic(e); }

inline std::string format_term(const Expr& e) {
  if (e.kind() == Kind::Mul) {
    std::string out;
    for (size_t k = 0; k < e.children().size(); ++k) {
      const Expr& c = e.children()[k];
      if (k) out += "*";
      if (c.kind() == Kind::Neg)
        out += k == 0 ? "-" + format_neg_operand(c.child()) : paren("-" + format_neg_operand(c.child()));
      else
        out += format_atomic(c);
    }
    return out;
  }
  if (e.kind() == Kind::Neg) return "-" + format_neg_operand(e.child());
  return format_atomic(e);
}

inline std::string format_expr(const Expr& e) {
  if (e.kind() != Kind::Add) return format_term(e);
  std::string out;
  for (size_t k = 0; k < e.children().size(); ++k) {
    const Expr& c = e.children()[k];
    if (k == 0) {
      out += c.kind() == Kind::Add ? paren(format_expr(c)) : format_term(c);
    } else if (c.kind() == Kind::Neg) {
      const Expr& x = c.child();
      bool wrap = x.kind() == Kind::Add || x.kind() == Kind::Neg;
      out += " - " + (wrap ? paren(format_expr(x)) : format_term(x));
    } else {
      out += " + " + (c.kind() == Kind::Add ? paren(format_expr(c)) : format_term(c));
    }
  }
  return out;
}

}  // namespace detail

inline Expr parse(std::string_view text) { return detail::Parser(text).parse_all(); }

/// Canonical text; parse(format(e)) == e for every tree the parser can produce.
inline std::string format(const Expr& e) { return detail::format_expr(e); }

/// Literal evaluation on n x n matrices; constants are c I_n.
inline Mat eval(const Expr& e, const std::vector<Mat>& vars, Eigen::Index n = -1) {
  if (n < 0) n = vars.empty() ? 1 : vars.front().rows();
  for (const auto& v : vars)
    if (v.rows() != n || v.cols() != n) throw InvalidArgument("ncrat::eval: variables must all be n x n");
  switch (e.kind()) {
    case Kind::Var:
      if (e.index() > static_cast<int>(vars.size()))
        throw UnboundVariable("unbound variable Z" + std::to_string(e.index()), e.span());
      return vars[static_cast<size_t>(e.index() - 1)];
    case Kind::Const:
      return e.value() * Mat::Identity(n, n);
    case Kind::Add: {
      Mat out = Mat::Zero(n, n);
      for (const auto& c : e.children()) out += eval(c, vars, n);
      return out;
    }
    case Kind::Neg:
      return -eval(e.child(), vars, n);
    case Kind::Mul: {
      Mat out = eval(e.children().front(), vars, n);
      for (size_t k = 1; k < e.children().size(); ++k) out = out * eval(e.children()[k], vars, n);
      return out;
    }
    case Kind::Inv: {
      Mat x = eval(e.child(), vars, n);
      double smax = linalg::op_norm(x);
      double smin = linalg::min_singular(x);
      if (!(smin > kSingularGuard * smax) || smax == 0.0) {
        std::ostringstream os;
        os << "singular inverse at [" << e.span().start << "," << e.span().end << ") (sigma_min = " << smin << ")";
        throw SingularInverse(os.str(), e.span());
      }
      return x.partialPivLu().inverse();
    }
  }
  throw InvalidArgument("ncrat::eval: corrupt expression");
}

/// Highest variable index referenced.
inline int max_variable(const Expr& e) {
  if (e.kind() == Kind::Var) return e.index();
  int m = 0;
  for (const auto& c : e.children()) m = std::max(m, max_variable(c));
  return m;
}

}  // namespace ncpick::ncrat
