#include "feff/parse.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <optional>
#include <string>

namespace feff::expr {
namespace {

enum class Tok { End, Integer, Decimal, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen };

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= src_.size()) return t;
    const std::size_t start = pos_;
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() &&
                                                        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      bool decimal = false;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      if (pos_ < src_.size() && src_[pos_] == '.') {
        decimal = true;
        advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t look = pos_ + 1;
        if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
        if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
          decimal = true;
          while (pos_ < look) advance();
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        }
      }
      t.kind = decimal ? Tok::Decimal : Tok::Integer;
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      t.kind = Tok::Ident;
    } else {
      advance();
      switch (c) {
        case '+': t.kind = Tok::Plus; break;
        case '-': t.kind = Tok::Minus; break;
        case '*': t.kind = Tok::Star; break;
        case '/': t.kind = Tok::Slash; break;
        case '^': t.kind = Tok::Caret; break;
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
      }
    }
    t.text = src_.substr(start, pos_ - start);
    return t;
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + std::string(t.text) + "'";
}

class Parser {
 public:
  Parser(std::string_view src, Pool& pool) : lex_(src), pool_(pool) {
    cur_ = lex_.next();
    peek_ = lex_.next();
  }

  Expr parse_all() {
    Expr e = expr();
    if (cur_.kind != Tok::End) throw ParseError("unexpected " + describe(cur_), cur_.line, cur_.column);
    return e;
  }

 private:
  void shift() {
    cur_ = peek_;
    peek_ = lex_.next();
  }

  Expr expr() {
    Expr lhs = term();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      const Tok op = cur_.kind;
      shift();
      Expr rhs = term();
      lhs = op == Tok::Plus ? lhs + rhs : lhs - rhs;
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = factor();
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      const Tok op = cur_.kind;
      shift();
      Expr rhs = factor();
      lhs = op == Tok::Star ? lhs * rhs : lhs / rhs;
    }
    return lhs;
  }

  Expr factor() {
    if (cur_.kind == Tok::Minus) {
      shift();
      return -power();
    }
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (cur_.kind == Tok::Caret) {
      shift();
      if (cur_.kind != Tok::Integer)
        throw ParseError("exponent must be a non-negative integer literal, got " + describe(cur_), cur_.line,
                         cur_.column);
      const int k = to_int(cur_);
      shift();
      return pow(base, k);
    }
    return base;
  }

  int to_int(const Token& t) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc()) throw ParseError("integer literal out of range", t.line, t.column);
    return v;
  }

  std::int64_t to_i64(const Token& t) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc()) throw ParseError("integer literal out of range", t.line, t.column);
    return v;
  }

  Expr atom() {
    const Token t = cur_;
    switch (t.kind) {
      case Tok::Integer: {
        shift();
        const std::int64_t num = to_i64(t);
        if (cur_.kind == Tok::Slash && peek_.kind == Tok::Integer) {
          shift();
          const Token d = cur_;
          const std::int64_t den = to_i64(d);
          if (den == 0) throw ParseError("zero denominator in rational literal", d.line, d.column);
          shift();
          return pool_.rational(num, den);
        }
        return pool_.constant(num);
      }
      case Tok::Decimal: {
        shift();
        const std::string text(t.text);
        return pool_.decimal(std::strtod(text.c_str(), nullptr));
      }
      case Tok::Ident: {
        shift();
        if (auto op = function(t.text)) {
          if (cur_.kind != Tok::LParen)
            throw ParseError("expected '(' after " + std::string(t.text), cur_.line, cur_.column);
          shift();
          Expr arg = expr();
          expect_rparen();
          return pool_.unary(*op, arg);
        }
        const int idx = pool_.coord_index(t.text);
        if (idx < 0) throw ParseError("undeclared identifier '" + std::string(t.text) + "'", t.line, t.column);
        return pool_.var(idx);
      }
      case Tok::LParen: {
        shift();
        Expr inner = expr();
        expect_rparen();
        return inner;
      }
      default:
        throw ParseError("unexpected " + describe(t), t.line, t.column);
    }
  }

  void expect_rparen() {
    if (cur_.kind != Tok::RParen) throw ParseError("expected ')', got " + describe(cur_), cur_.line, cur_.column);
    shift();
  }

  static std::optional<Op> function(std::string_view name) {
    if (name == "sin") return Op::Sin;
    if (name == "cos") return Op::Cos;
    if (name == "tan") return Op::Tan;
    if (name == "exp") return Op::Exp;
    if (name == "log") return Op::Log;
    if (name == "sqrt") return Op::Sqrt;
    if (name == "sinh") return Op::Sinh;
    if (name == "cosh") return Op::Cosh;
    return std::nullopt;
  }

  Lexer lex_;
  Pool& pool_;
  Token cur_;
  Token peek_;
};

}  // namespace

Expr parse(std::string_view source, Pool& pool) { return Parser(source, pool).parse_all(); }

}  // namespace feff::expr
