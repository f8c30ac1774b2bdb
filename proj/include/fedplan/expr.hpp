#pragma once

#include <cctype>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fedplan/catalog.hpp"
#include "fedplan/errors.hpp"

namespace fedplan {

/// Node of the logical expression grammar: column references, literals,
/// catalog function calls, and boolean/comparison/arithmetic operators.
struct Expr {
  enum class Kind { Column, Literal, Call, Unary, Binary, IsNull, Star };

  Kind kind = Kind::Literal;
  std::string text;  // column name, upper-cased function name, operator, or literal spelling
  ScalarType literal_type = ScalarType::Null;
  bool negated = false;  // IS NOT NULL
  std::vector<Expr> args;

  friend bool operator==(const Expr&, const Expr&) = default;
};

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) { advance(); }

  Expr parse() {
    Expr e = parse_or();
    if (tok_.kind != Tok::End) fail("unexpected '" + tok_.text + "'");
    return e;
  }

 private:
  enum class Tok { End, Ident, Number, String, Op, LParen, RParen, Comma, Star };
  struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t pos = 0;
    bool is_float = false;
    bool quoted = false;
  };

  [[noreturn]] void fail(const std::string& why) const { throw ParseError("expression: " + why, tok_.pos); }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  void advance() {
    while (at_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[at_]))) ++at_;
    tok_ = Token{};
    tok_.pos = at_;
    if (at_ >= src_.size()) return;
    char c = src_[at_];
    if (ident_start(c)) {
      std::size_t start = at_;
      while (at_ < src_.size() && (ident_char(src_[at_]) ||
                                   (src_[at_] == '.' && at_ + 1 < src_.size() && ident_start(src_[at_ + 1]))))
        ++at_;
      tok_.kind = Tok::Ident;
      tok_.text = std::string(src_.substr(start, at_ - start));
      return;
    }
    if (c == '"') {
      std::size_t end = src_.find('"', at_ + 1);
      if (end == std::string_view::npos) fail("unterminated quoted identifier");
      tok_.kind = Tok::Ident;
      tok_.quoted = true;
      tok_.text = std::string(src_.substr(at_ + 1, end - at_ - 1));
      if (tok_.text.empty()) fail("empty quoted identifier");
      at_ = end + 1;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = at_;
      while (at_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[at_]))) ++at_;
      if (at_ < src_.size() && src_[at_] == '.') {
        tok_.is_float = true;
        ++at_;
        if (at_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[at_]))) fail("malformed number");
        while (at_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[at_]))) ++at_;
      }
      tok_.kind = Tok::Number;
      tok_.text = std::string(src_.substr(start, at_ - start));
      return;
    }
    if (c == '\'') {
      std::string value;
      ++at_;
      for (;;) {
        if (at_ >= src_.size()) fail("unterminated string literal");
        if (src_[at_] == '\'') {
          if (at_ + 1 < src_.size() && src_[at_ + 1] == '\'') {
            value += '\'';
            at_ += 2;
            continue;
          }
          ++at_;
          break;
        }
        value += src_[at_++];
      }
      tok_.kind = Tok::String;
      tok_.text = std::move(value);
      return;
    }
    auto two = src_.substr(at_, 2);
    if (two == "<=" || two == ">=" || two == "<>" || two == "!=") {
      tok_.kind = Tok::Op;
      tok_.text = two == "!=" ? "<>" : std::string(two);
      at_ += 2;
      return;
    }
    ++at_;
    switch (c) {
      case '(': tok_.kind = Tok::LParen; tok_.text = "("; return;
      case ')': tok_.kind = Tok::RParen; tok_.text = ")"; return;
      case ',': tok_.kind = Tok::Comma; tok_.text = ","; return;
      case '*': tok_.kind = Tok::Star; tok_.text = "*"; return;
      case '=': case '<': case '>': case '+': case '-': case '/':
        tok_.kind = Tok::Op;
        tok_.text = std::string(1, c);
        return;
      default:
        --at_;
        fail(std::string("unexpected character '") + c + "'");
    }
  }

  bool keyword(std::string_view kw) const {
    if (tok_.kind != Tok::Ident || tok_.quoted || tok_.text.size() != kw.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i)
      if (std::toupper(static_cast<unsigned char>(tok_.text[i])) != kw[i]) return false;
    return true;
  }

  static Expr binary(std::string op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Expr::Kind::Binary;
    e.text = std::move(op);
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

  Expr parse_or() {
    Expr lhs = parse_and();
    while (keyword("OR")) {
      advance();
      lhs = binary("OR", std::move(lhs), parse_and());
    }
    return lhs;
  }

  Expr parse_and() {
    Expr lhs = parse_not();
    while (keyword("AND")) {
      advance();
      lhs = binary("AND", std::move(lhs), parse_not());
    }
    return lhs;
  }

  Expr parse_not() {
    if (keyword("NOT")) {
      advance();
      Expr e;
      e.kind = Expr::Kind::Unary;
      e.text = "NOT";
      e.args.push_back(parse_not());
      return e;
    }
    return parse_comparison();
  }

  Expr parse_comparison() {
    Expr lhs = parse_additive();
    if (tok_.kind == Tok::Op && (tok_.text == "=" || tok_.text == "<>" || tok_.text == "<" || tok_.text == "<=" ||
                                 tok_.text == ">" || tok_.text == ">=")) {
      std::string op = tok_.text;
      advance();
      return binary(op, std::move(lhs), parse_additive());
    }
    if (keyword("IS")) {
      advance();
      Expr e;
      e.kind = Expr::Kind::IsNull;
      if (keyword("NOT")) {
        e.negated = true;
        advance();
      }
      if (!keyword("NULL")) fail("expected NULL after IS");
      advance();
      e.args.push_back(std::move(lhs));
      return e;
    }
    return lhs;
  }

  Expr parse_additive() {
    Expr lhs = parse_multiplicative();
    while (tok_.kind == Tok::Op && (tok_.text == "+" || tok_.text == "-")) {
      std::string op = tok_.text;
      advance();
      lhs = binary(op, std::move(lhs), parse_multiplicative());
    }
    return lhs;
  }

  Expr parse_multiplicative() {
    Expr lhs = parse_unary();
    while ((tok_.kind == Tok::Op && tok_.text == "/") || tok_.kind == Tok::Star) {
      std::string op = tok_.text;
      advance();
      lhs = binary(op, std::move(lhs), parse_unary());
    }
    return lhs;
  }

  Expr parse_unary() {
    if (tok_.kind == Tok::Op && tok_.text == "-") {
      advance();
      Expr e;
      e.kind = Expr::Kind::Unary;
      e.text = "-";
      e.args.push_back(parse_unary());
      return e;
    }
    return parse_primary();
  }

  Expr parse_primary() {
    Expr e;
    switch (tok_.kind) {
      case Tok::Number:
        e.kind = Expr::Kind::Literal;
        e.literal_type = tok_.is_float ? ScalarType::Float64 : ScalarType::Int64;
        e.text = tok_.text;
        advance();
        return e;
      case Tok::String:
        e.kind = Expr::Kind::Literal;
        e.literal_type = ScalarType::String;
        e.text = tok_.text;
        advance();
        return e;
      case Tok::LParen: {
        advance();
        Expr inner = parse_or();
        if (tok_.kind != Tok::RParen) fail("expected ')'");
        advance();
        return inner;
      }
      case Tok::Ident: {
        if (keyword("TRUE") || keyword("FALSE")) {
          e.kind = Expr::Kind::Literal;
          e.literal_type = ScalarType::Bool;
          e.text = keyword("TRUE") ? "TRUE" : "FALSE";
          advance();
          return e;
        }
        if (keyword("NULL")) {
          e.kind = Expr::Kind::Literal;
          e.literal_type = ScalarType::Null;
          e.text = "NULL";
          advance();
          return e;
        }
        if (keyword("AND") || keyword("OR") || keyword("NOT") || keyword("IS")) fail("unexpected keyword '" + tok_.text + "'");
        Token name = tok_;
        advance();
        if (tok_.kind == Tok::LParen && !name.quoted) {
          e.kind = Expr::Kind::Call;
          for (char c : name.text) e.text += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
          advance();
          if (tok_.kind != Tok::RParen) {
            for (;;) {
              if (tok_.kind == Tok::Star) {
                Expr star;
                star.kind = Expr::Kind::Star;
                star.text = "*";
                e.args.push_back(std::move(star));
                advance();
              } else {
                e.args.push_back(parse_or());
              }
              if (tok_.kind == Tok::Comma) {
                advance();
                continue;
              }
              break;
            }
          }
          if (tok_.kind != Tok::RParen) fail("expected ')' to close call to " + e.text);
          advance();
          return e;
        }
        e.kind = Expr::Kind::Column;
        e.text = name.text;
        return e;
      }
      default:
        fail(tok_.kind == Tok::End ? std::string("unexpected end of expression") : "unexpected '" + tok_.text + "'");
    }
  }

  std::string_view src_;
  std::size_t at_ = 0;
  Token tok_;
};

}  // namespace detail

inline Expr parse_expression(std::string_view text) { return detail::ExprParser(text).parse(); }

inline void collect_functions(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::Call) out.insert(e.text);
  for (const auto& a : e.args) collect_functions(a, out);
}

inline void collect_columns(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::Column) out.insert(e.text);
  for (const auto& a : e.args) collect_columns(a, out);
}

/// Where an expression appears; decides whether aggregate or ranking calls
/// are permitted at the top level.
enum class ExprContext { Scalar, AggregateItem, WindowItem };

namespace detail {

inline bool comparable(ScalarType a, ScalarType b) {
  if (a == ScalarType::Null || b == ScalarType::Null) return true;
  if (is_numeric(a) && is_numeric(b)) return true;
  if (a == b) return true;
  // timestamp literals are written as strings
  return (a == ScalarType::Timestamp && b == ScalarType::String) ||
         (a == ScalarType::String && b == ScalarType::Timestamp);
}

inline bool arg_matches(ArgKind kind, ScalarType t) {
  if (t == ScalarType::Null) return true;
  switch (kind) {
    case ArgKind::Any: return true;
    case ArgKind::String: return t == ScalarType::String;
    case ArgKind::Numeric: return is_numeric(t);
    case ArgKind::Json: return t == ScalarType::Json;
    case ArgKind::Timestamp: return t == ScalarType::Timestamp;
  }
  return false;
}

inline ScalarType check(const Expr& e, const Schema& schema, ExprContext ctx, bool top) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Column: {
      const Column* c = schema.find(e.text);
      if (!c) throw ValidationError("unknown column '" + e.text + "'");
      return c->type;
    }
    case K::Literal:
      return e.literal_type;
    case K::Star:
      throw ValidationError("'*' is only valid as the argument of COUNT");
    case K::IsNull:
      check(e.args[0], schema, ExprContext::Scalar, false);
      return ScalarType::Bool;
    case K::Unary: {
      ScalarType t = check(e.args[0], schema, ExprContext::Scalar, false);
      if (e.text == "NOT") {
        if (t != ScalarType::Bool && t != ScalarType::Null) throw ValidationError("type mismatch: NOT applied to " + std::string(to_string(t)));
        return ScalarType::Bool;
      }
      if (!is_numeric(t) && t != ScalarType::Null) throw ValidationError("type mismatch: unary '-' applied to " + std::string(to_string(t)));
      return t;
    }
    case K::Binary: {
      ScalarType l = check(e.args[0], schema, ExprContext::Scalar, false);
      ScalarType r = check(e.args[1], schema, ExprContext::Scalar, false);
      const std::string& op = e.text;
      auto mismatch = [&] {
        return ValidationError("type mismatch: " + std::string(to_string(l)) + " " + op + " " + std::string(to_string(r)));
      };
      if (op == "AND" || op == "OR") {
        auto ok = [](ScalarType t) { return t == ScalarType::Bool || t == ScalarType::Null; };
        if (!ok(l) || !ok(r)) throw mismatch();
        return ScalarType::Bool;
      }
      if (op == "+" || op == "-" || op == "*" || op == "/") {
        auto ok = [](ScalarType t) { return is_numeric(t) || t == ScalarType::Null; };
        if (!ok(l) || !ok(r)) throw mismatch();
        return (l == ScalarType::Float64 || r == ScalarType::Float64) ? ScalarType::Float64 : ScalarType::Int64;
      }
      if (!comparable(l, r)) throw mismatch();
      return ScalarType::Bool;
    }
    case K::Call: {
      const FunctionSignature* sig = LogicalFunctionCatalog::standard().find(e.text);
      if (!sig) throw ValidationError("function '" + e.text + "' is not in the logical function catalog");
      if (sig->cls == FunctionClass::Aggregate &&
          !(top && (ctx == ExprContext::AggregateItem || ctx == ExprContext::WindowItem)))
        throw ValidationError("aggregate function " + e.text + " not allowed here");
      if (sig->cls == FunctionClass::WindowOnly && !(top && ctx == ExprContext::WindowItem))
        throw ValidationError("window function " + e.text + " only allowed in a Window transform");
      std::size_t n = e.args.size();
      bool arity_ok = sig->variadic ? n >= sig->args.size() : n == sig->args.size();
      if (sig->accepts_star && n == 1 && e.args[0].kind == K::Star) return *sig->returns;
      if (!arity_ok) throw ValidationError("wrong number of arguments to " + e.text);
      ScalarType first = ScalarType::Null;
      for (std::size_t i = 0; i < n; ++i) {
        ScalarType t = check(e.args[i], schema, ExprContext::Scalar, false);
        ArgKind kind = i < sig->args.size() ? sig->args[i] : sig->args.back();
        if (!arg_matches(kind, t))
          throw ValidationError("type mismatch: argument " + std::to_string(i + 1) + " of " + e.text + " is " +
                                std::string(to_string(t)));
        if (i == 0) first = t;
      }
      return sig->returns ? *sig->returns : first;
    }
  }
  return ScalarType::Null;
}

}  // namespace detail

/// Type-checks `e` against `schema` and returns its result type.
inline ScalarType check_expression(const Expr& e, const Schema& schema, ExprContext ctx = ExprContext::Scalar) {
  return detail::check(e, schema, ctx, true);
}

/// Controls how an expression is printed as SQL.
struct RenderStyle {
  char identifier_quote = '"';
  std::function<std::string(const std::string&)> function_name = [](const std::string& n) { return n; };
};

inline std::string quote_identifier(std::string_view name, char quote) {
  std::string out(1, quote);
  for (char c : name) {
    if (c == quote) out += quote;
    out += c;
  }
  out += quote;
  return out;
}

namespace detail {

inline int precedence(const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Binary:
      if (e.text == "OR") return 1;
      if (e.text == "AND") return 2;
      if (e.text == "+" || e.text == "-") return 5;
      if (e.text == "*" || e.text == "/") return 6;
      return 4;
    case K::Unary: return e.text == "NOT" ? 3 : 7;
    case K::IsNull: return 4;
    default: return 8;
  }
}

inline std::string render(const Expr& e, const RenderStyle& style) {
  using K = Expr::Kind;
  auto child = [&](const Expr& c, int min_prec) {
    std::string s = render(c, style);
    return precedence(c) < min_prec ? "(" + s + ")" : s;
  };
  switch (e.kind) {
    case K::Column: return quote_identifier(e.text, style.identifier_quote);
    case K::Star: return "*";
    case K::Literal:
      if (e.literal_type == ScalarType::String) {
        std::string out = "'";
        for (char c : e.text) {
          if (c == '\'') out += '\'';
          out += c;
        }
        return out + "'";
      }
      return e.text;
    case K::IsNull: return child(e.args[0], 5) + (e.negated ? " IS NOT NULL" : " IS NULL");
    case K::Unary:
      return e.text == "NOT" ? "NOT " + child(e.args[0], 3) : "-" + child(e.args[0], 7);
    case K::Binary: {
      int p = precedence(e);
      // left-associative: the right operand needs parentheses at equal precedence
      return child(e.args[0], p) + " " + e.text + " " + child(e.args[1], p + 1);
    }
    case K::Call: {
      std::string out = style.function_name(e.text) + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += render(e.args[i], style);
      }
      return out + ")";
    }
  }
  return {};
}

}  // namespace detail

inline std::string render_expression(const Expr& e, const RenderStyle& style) { return detail::render(e, style); }

}  // namespace fedplan
