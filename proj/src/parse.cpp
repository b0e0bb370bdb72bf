// Recursive-descent front-end for the vector-field DSL.
//
//   expr    := ['+'|'-'] product { ('+'|'-') product }
//   product := power { ('*'|'/') power }     (divisor: nonzero constant)
//   power   := primary [ '^' digits ]
//   primary := number | 'x' digits | 'v' digits | 'eps'
//            | 'd/dx' digits | 'd/dv' digits | '(' expr ')'
//   number  := digits [ '/' digits ] | decimal [ ('e'|'E') ['+'|'-'] digits ]
//
// A basis symbol makes the product a vector field; a product may hold at most
// one. v_i is an alias for x_{d/2+i}.

#include <cctype>

#include "minorlab/symbolic.hpp"

namespace minorlab::symbolic {

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(what + " at byte " + std::to_string(offset)), kind_(kind), offset_(offset) {}

namespace {

struct Value {
  bool is_field = false;
  PolyExpr s;
  VectorField f;
};

class Parser {
 public:
  Parser(std::string_view text, std::size_t dim) : t_(text), d_(dim), s_(dim), f_(dim) {}

  Value parse() {
    Value v = expr();
    skip_ws();
    if (pos_ != t_.size()) syntax("unexpected character '" + std::string(1, t_[pos_]) + "'");
    return v;
  }

 private:
  std::string_view t_;
  std::size_t d_;
  std::size_t pos_ = 0;
  PolyExpr s_;     // zero scalar template
  VectorField f_;  // zero field template

  [[noreturn]] void syntax(const std::string& msg) { throw ParseError(ParseError::Kind::Syntax, pos_, msg); }
  [[noreturn]] void syntax_at(std::size_t at, const std::string& msg) {
    throw ParseError(ParseError::Kind::Syntax, at, msg);
  }

  void skip_ws() {
    while (pos_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < t_.size() && t_[pos_] == c;
  }
  bool starts_with(std::string_view s) { return t_.substr(pos_, s.size()) == s; }
  bool is_digit(std::size_t at) const {
    return at < t_.size() && std::isdigit(static_cast<unsigned char>(t_[at]));
  }

  std::string_view digits() {
    std::size_t b = pos_;
    while (is_digit(pos_)) ++pos_;
    return t_.substr(b, pos_ - b);
  }

  std::size_t index(std::size_t at) {
    auto ds = digits();
    if (ds.empty()) syntax("expected variable index");
    if (ds.size() > 6) throw ParseError(ParseError::Kind::DimensionMismatch, at, "variable index too large");
    return std::stoul(std::string(ds));
  }

  std::size_t coordinate(char kind, std::size_t idx, std::size_t at) {
    if (idx == 0) throw ParseError(ParseError::Kind::DimensionMismatch, at, "variable indices start at 1");
    if (kind == 'x') {
      if (idx > d_)
        throw ParseError(ParseError::Kind::DimensionMismatch, at,
                         "x" + std::to_string(idx) + " exceeds dimension " + std::to_string(d_));
      return idx - 1;
    }
    if (d_ % 2 != 0)
      throw ParseError(ParseError::Kind::DimensionMismatch, at, "v-variables need an even dimension");
    if (idx > d_ / 2)
      throw ParseError(ParseError::Kind::DimensionMismatch, at,
                       "v" + std::to_string(idx) + " exceeds n = " + std::to_string(d_ / 2));
    return d_ / 2 + idx - 1;
  }

  Value scalar(PolyExpr p) { return Value{false, std::move(p), f_}; }

  Value add(Value a, const Value& b, bool negate, std::size_t at) {
    if (a.is_field != b.is_field) {
      // A zero scalar mixes with anything.
      if (!a.is_field && a.s.is_zero()) return negate ? Value{true, s_, -b.f} : Value{true, s_, b.f};
      if (!b.is_field && b.s.is_zero()) return a;
      syntax_at(at, "cannot add a scalar and a vector field");
    }
    if (a.is_field) {
      if (negate) a.f -= b.f; else a.f += b.f;
    } else {
      if (negate) a.s -= b.s; else a.s += b.s;
    }
    return a;
  }

  Value expr() {
    skip_ws();
    bool neg = false;
    if (peek('+') || peek('-')) {
      neg = t_[pos_] == '-';
      ++pos_;
    }
    Value acc = product();
    if (neg) {
      if (acc.is_field) acc.f = -acc.f; else acc.s = -acc.s;
    }
    while (peek('+') || peek('-')) {
      bool minus = t_[pos_] == '-';
      std::size_t at = pos_++;
      Value rhs = product();
      acc = add(std::move(acc), rhs, minus, at);
    }
    return acc;
  }

  Value product() {
    Value acc = power();
    while (peek('*') || peek('/')) {
      bool divide = t_[pos_] == '/';
      std::size_t at = pos_++;
      Value rhs = power();
      if (divide) {
        std::optional<Rational> c;
        if (!rhs.is_field) c = rhs.s.constant_value();
        if (!c || sgn(*c) == 0) syntax_at(at, "division only by a nonzero constant");
        Rational inv = 1 / *c;
        if (acc.is_field) acc.f = inv * acc.f; else acc.s *= inv;
        continue;
      }
      if (acc.is_field && rhs.is_field) syntax_at(at, "product of two vector fields");
      if (acc.is_field)
        acc.f = rhs.s * acc.f;
      else if (rhs.is_field)
        acc = Value{true, s_, acc.s * rhs.f};
      else
        acc.s = acc.s * rhs.s;
    }
    return acc;
  }

  Value power() {
    Value base = primary();
    if (peek('^')) {
      std::size_t at = pos_++;
      skip_ws();
      if (pos_ < t_.size() && t_[pos_] == '-')
        throw ParseError(ParseError::Kind::NegativeExponent, pos_, "negative exponent");
      auto ds = digits();
      if (ds.empty()) syntax("expected a nonnegative integer exponent");
      if (ds.size() > 4) syntax_at(at, "exponent too large");
      if (base.is_field) syntax_at(at, "cannot raise a vector field to a power");
      base.s = base.s.pow(static_cast<std::uint32_t>(std::stoul(std::string(ds))));
    }
    return base;
  }

  Value number() {
    std::size_t b = pos_;
    digits();
    if (pos_ < t_.size() && t_[pos_] == '/' && is_digit(pos_ + 1)) {
      ++pos_;
      digits();
    } else {
      if (pos_ < t_.size() && t_[pos_] == '.') {
        ++pos_;
        digits();
      }
      if (pos_ + 1 < t_.size() && (t_[pos_] == 'e' || t_[pos_] == 'E')) {
        bool sign = t_[pos_ + 1] == '+' || t_[pos_ + 1] == '-';
        if (is_digit(pos_ + (sign ? 2 : 1))) {
          pos_ += sign ? 2 : 1;
          digits();
        }
      }
    }
    try {
      return scalar(PolyExpr::constant(d_, parse_rational(t_.substr(b, pos_ - b))));
    } catch (const std::invalid_argument& e) {
      syntax_at(b, e.what());
    }
  }

  Value primary() {
    skip_ws();
    if (pos_ >= t_.size()) syntax("unexpected end of input");
    std::size_t at = pos_;
    char c = t_[pos_];
    if (c == '(') {
      ++pos_;
      Value v = expr();
      if (!peek(')')) syntax("expected ')'");
      ++pos_;
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && is_digit(pos_ + 1))) return number();
    if (starts_with("d/dx") || starts_with("d/dv")) {
      char kind = t_[pos_ + 3];
      pos_ += 4;
      std::size_t j = coordinate(kind, index(at), at);
      return Value{true, s_, VectorField::basis(d_, j)};
    }
    if (starts_with("eps")) {
      pos_ += 3;
      return scalar(PolyExpr::eps(d_));
    }
    if (c == 'x' || c == 'v') {
      ++pos_;
      std::size_t j = coordinate(c, index(at), at);
      return scalar(PolyExpr::variable(d_, j));
    }
    syntax("unexpected character '" + std::string(1, c) + "'");
  }
};

}  // namespace

VectorField parse_field(std::string_view text, std::size_t dim) {
  if (dim == 0) throw DimensionError("dimension must be positive");
  Value v = Parser(text, dim).parse();
  if (v.is_field) return v.f;
  if (v.s.is_zero()) return VectorField(dim);
  throw ParseError(ParseError::Kind::Syntax, 0, "expression is a scalar, expected a vector field");
}

PolyExpr parse_scalar(std::string_view text, std::size_t dim) {
  if (dim == 0) throw DimensionError("dimension must be positive");
  Value v = Parser(text, dim).parse();
  if (v.is_field) throw ParseError(ParseError::Kind::Syntax, 0, "expression is a vector field, expected a scalar");
  return v.s;
}

}  // namespace minorlab::symbolic
