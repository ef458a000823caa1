#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcsgeo/errors.hpp"
#include "lcsgeo/rational.hpp"

namespace lcsgeo {

// ---------------------------------------------------------------------------
// Expression trees over chart coordinates.
//
// An Expr is an immutable tree: exact rational constants, coordinate
// references, +, -, *, /, unary minus, integer powers and the elementary
// functions sin/cos/exp/log/sqrt. Construction never simplifies; call
// simplify() explicitly. Evaluation is pure, so shared subtrees are safe to
// read concurrently.
// ---------------------------------------------------------------------------

enum class ExprKind { Constant, Coord, Neg, Add, Sub, Mul, Div, Pow, Func };
enum class FuncId { Sin, Cos, Exp, Log, Sqrt };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind{ExprKind::Constant};
  Rational value{};        // Constant
  int coord = -1;          // Coord: index into the declared symbol list
  std::string name;        // Coord: symbol name (kept for printing)
  long long exponent = 0;  // Pow
  FuncId func = FuncId::Sin;
  Expr a, b;               // children
};

inline Expr make_node(ExprNode n) {
  return std::make_shared<const ExprNode>(std::move(n));
}

inline Expr lit(long long v) {
  ExprNode n;
  n.kind = ExprKind::Constant;
  n.value = Rational(v);
  return make_node(std::move(n));
}

inline Expr rational_const(Rational r) {
  ExprNode n;
  n.kind = ExprKind::Constant;
  n.value = r;
  return make_node(std::move(n));
}

inline Expr symbol(int id, std::string name) {
  ExprNode n;
  n.kind = ExprKind::Coord;
  n.coord = id;
  n.name = std::move(name);
  return make_node(std::move(n));
}

inline Expr operator-(const Expr& x) {
  ExprNode n;
  n.kind = ExprKind::Neg;
  n.a = x;
  return make_node(std::move(n));
}

namespace detail {
inline Expr binary(ExprKind k, const Expr& a, const Expr& b) {
  ExprNode n;
  n.kind = k;
  n.a = a;
  n.b = b;
  return make_node(std::move(n));
}
} // namespace detail

inline Expr operator+(const Expr& a, const Expr& b) {
  return detail::binary(ExprKind::Add, a, b);
}
inline Expr operator-(const Expr& a, const Expr& b) {
  return detail::binary(ExprKind::Sub, a, b);
}
inline Expr operator*(const Expr& a, const Expr& b) {
  return detail::binary(ExprKind::Mul, a, b);
}
inline Expr operator/(const Expr& a, const Expr& b) {
  return detail::binary(ExprKind::Div, a, b);
}

inline Expr pow_int(const Expr& base, long long k) {
  ExprNode n;
  n.kind = ExprKind::Pow;
  n.a = base;
  n.exponent = k;
  return make_node(std::move(n));
}

inline Expr apply_func(FuncId f, const Expr& arg) {
  ExprNode n;
  n.kind = ExprKind::Func;
  n.func = f;
  n.a = arg;
  return make_node(std::move(n));
}

// --- predicates -------------------------------------------------------------

inline bool is_const(const Expr& e) { return e->kind == ExprKind::Constant; }
inline bool is_zero(const Expr& e) { return is_const(e) && e->value.is_zero(); }
inline bool is_one(const Expr& e) { return is_const(e) && e->value.is_one(); }
inline bool is_minus_one(const Expr& e) {
  return is_const(e) && e->value == Rational(-1);
}

inline bool same(const Expr& x, const Expr& y) {
  if (x.get() == y.get()) return true;
  if (x->kind != y->kind) return false;
  switch (x->kind) {
    case ExprKind::Constant: return x->value == y->value;
    case ExprKind::Coord: return x->coord == y->coord;
    case ExprKind::Neg: return same(x->a, y->a);
    case ExprKind::Pow:
      return x->exponent == y->exponent && same(x->a, y->a);
    case ExprKind::Func:
      return x->func == y->func && same(x->a, y->a);
    default:
      return same(x->a, y->a) && same(x->b, y->b);
  }
}

inline void mark_coords(const Expr& e, std::vector<char>& used) {
  switch (e->kind) {
    case ExprKind::Constant: return;
    case ExprKind::Coord:
      if (e->coord >= 0 && e->coord < static_cast<int>(used.size()))
        used[e->coord] = 1;
      return;
    case ExprKind::Neg:
    case ExprKind::Pow:
    case ExprKind::Func:
      mark_coords(e->a, used);
      return;
    default:
      mark_coords(e->a, used);
      mark_coords(e->b, used);
      return;
  }
}

// --- printing ---------------------------------------------------------------

inline const char* func_name(FuncId f) {
  switch (f) {
    case FuncId::Sin: return "sin";
    case FuncId::Cos: return "cos";
    case FuncId::Exp: return "exp";
    case FuncId::Log: return "log";
    case FuncId::Sqrt: return "sqrt";
  }
  return "?";
}

namespace detail {

// Precedence levels matching the grammar: 1 additive, 2 multiplicative,
// 3 unary minus, 4 power, 5 atom.
inline int precedence(const Expr& e) {
  switch (e->kind) {
    case ExprKind::Add:
    case ExprKind::Sub:
      return 1;
    case ExprKind::Mul:
    case ExprKind::Div:
      return 2;
    case ExprKind::Neg:
      return 3;
    case ExprKind::Pow:
      return 4;
    case ExprKind::Constant:
      if (e->value.num() < 0) return 3;
      if (!e->value.is_integer()) return 2; // prints as num/den
      return 5;
    default:
      return 5;
  }
}

inline void print_rec(const Expr& e, std::string& out);

inline void print_child(const Expr& c, int min_prec, std::string& out) {
  if (precedence(c) < min_prec) {
    out += '(';
    print_rec(c, out);
    out += ')';
  } else {
    print_rec(c, out);
  }
}

inline void print_rec(const Expr& e, std::string& out) {
  switch (e->kind) {
    case ExprKind::Constant:
      out += e->value.str();
      return;
    case ExprKind::Coord:
      out += e->name;
      return;
    case ExprKind::Neg:
      out += '-';
      print_child(e->a, 2, out);
      return;
    case ExprKind::Add:
      print_child(e->a, 1, out);
      out += " + ";
      print_child(e->b, 2, out);
      return;
    case ExprKind::Sub:
      print_child(e->a, 1, out);
      out += " - ";
      print_child(e->b, 2, out);
      return;
    case ExprKind::Mul:
      print_child(e->a, 2, out);
      out += '*';
      print_child(e->b, 3, out);
      return;
    case ExprKind::Div:
      print_child(e->a, 2, out);
      out += '/';
      print_child(e->b, 3, out);
      return;
    case ExprKind::Pow:
      print_child(e->a, 5, out);
      out += '^';
      out += std::to_string(e->exponent);
      return;
    case ExprKind::Func:
      out += func_name(e->func);
      out += '(';
      print_rec(e->a, out);
      out += ')';
      return;
  }
}

} // namespace detail

inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print_rec(e, out);
  return out;
}

// --- evaluation -------------------------------------------------------------

inline double eval(const Expr& e, std::span<const double> env) {
  switch (e->kind) {
    case ExprKind::Constant:
      return e->value.to_double();
    case ExprKind::Coord:
      if (e->coord < 0 || e->coord >= static_cast<int>(env.size()))
        throw DomainError("unbound coordinate '" + e->name + "'");
      return env[e->coord];
    case ExprKind::Neg:
      return -eval(e->a, env);
    case ExprKind::Add:
      return eval(e->a, env) + eval(e->b, env);
    case ExprKind::Sub:
      return eval(e->a, env) - eval(e->b, env);
    case ExprKind::Mul:
      return eval(e->a, env) * eval(e->b, env);
    case ExprKind::Div: {
      double den = eval(e->b, env);
      if (den == 0.0)
        throw DomainError("division by zero in '" + to_string(e) + "'");
      return eval(e->a, env) / den;
    }
    case ExprKind::Pow: {
      double base = eval(e->a, env);
      long long k = e->exponent;
      if (base == 0.0 && k < 0)
        throw DomainError("zero raised to negative power in '" + to_string(e) +
                          "'");
      bool invert = k < 0;
      unsigned long long m =
          invert ? static_cast<unsigned long long>(-(k + 1)) + 1ULL
                 : static_cast<unsigned long long>(k);
      double acc = 1.0;
      double cur = base;
      while (m > 0) {
        if (m & 1ULL) acc *= cur;
        cur *= cur;
        m >>= 1;
      }
      return invert ? 1.0 / acc : acc;
    }
    case ExprKind::Func: {
      double x = eval(e->a, env);
      switch (e->func) {
        case FuncId::Sin: return std::sin(x);
        case FuncId::Cos: return std::cos(x);
        case FuncId::Exp: return std::exp(x);
        case FuncId::Log:
          if (x <= 0.0)
            throw DomainError("log of non-positive value in '" + to_string(e) +
                              "'");
          return std::log(x);
        case FuncId::Sqrt:
          if (x < 0.0)
            throw DomainError("sqrt of negative value in '" + to_string(e) +
                              "'");
          return std::sqrt(x);
      }
      return 0.0;
    }
  }
  return 0.0;
}

// --- simplification ---------------------------------------------------------
//
// Local rewriting only: constant folding over exact rationals, additive and
// multiplicative identities, annihilators, double negation, power merging.
// No canonical forms; equality of expressions is decided by evaluation.

namespace detail {

inline std::pair<Expr, long long> as_base_exp(const Expr& e) {
  if (e->kind == ExprKind::Pow) return {e->a, e->exponent};
  return {e, 1};
}

inline std::optional<Expr> rewrite_once(const Expr& e);

inline Expr rewrite_loop(Expr e) {
  for (int guard = 0; guard < 64; ++guard) {
    auto next = rewrite_once(e);
    if (!next) return e;
    e = *next;
  }
  return e;
}

inline Expr rebuild(ExprKind k, const Expr& a, const Expr& b) {
  ExprNode n;
  n.kind = k;
  n.a = a;
  n.b = b;
  return rewrite_loop(make_node(std::move(n)));
}

inline std::optional<Expr> rewrite_once(const Expr& e) {
  const Expr& a = e->a;
  const Expr& b = e->b;
  switch (e->kind) {
    case ExprKind::Constant:
    case ExprKind::Coord:
      return std::nullopt;

    case ExprKind::Neg:
      if (is_const(a)) return rational_const(a->value.negated());
      if (a->kind == ExprKind::Neg) return a->a;
      return std::nullopt;

    case ExprKind::Add: {
      if (is_zero(a)) return b;
      if (is_zero(b)) return a;
      if (is_const(a) && is_const(b)) {
        if (auto r = Rational::add(a->value, b->value))
          return rational_const(*r);
      }
      if (b->kind == ExprKind::Neg) return rebuild(ExprKind::Sub, a, b->a);
      if (a->kind == ExprKind::Neg) return rebuild(ExprKind::Sub, b, a->a);
      if (same(a, b)) return rebuild(ExprKind::Mul, lit(2), a);
      return std::nullopt;
    }

    case ExprKind::Sub: {
      if (is_zero(b)) return a;
      if (is_zero(a)) return -b;
      if (is_const(a) && is_const(b)) {
        if (auto r = Rational::sub(a->value, b->value))
          return rational_const(*r);
      }
      if (b->kind == ExprKind::Neg) return rebuild(ExprKind::Add, a, b->a);
      if (same(a, b)) return lit(0);
      return std::nullopt;
    }

    case ExprKind::Mul: {
      if (is_zero(a) || is_zero(b)) return lit(0);
      if (is_one(a)) return b;
      if (is_one(b)) return a;
      if (is_minus_one(a)) return rewrite_loop(-b);
      if (is_minus_one(b)) return rewrite_loop(-a);
      if (is_const(a) && is_const(b)) {
        if (auto r = Rational::mul(a->value, b->value))
          return rational_const(*r);
      }
      if (a->kind == ExprKind::Neg)
        return rewrite_loop(-rebuild(ExprKind::Mul, a->a, b));
      if (b->kind == ExprKind::Neg)
        return rewrite_loop(-rebuild(ExprKind::Mul, a, b->a));
      {
        auto [ba, ka] = as_base_exp(a);
        auto [bb, kb] = as_base_exp(b);
        if (same(ba, bb) && !is_const(ba))
          return rewrite_loop(pow_int(ba, ka + kb));
      }
      // (u/v)*w -> u when w == v
      if (a->kind == ExprKind::Div && same(a->b, b)) return a->a;
      if (b->kind == ExprKind::Div && same(b->b, a)) return b->a;
      return std::nullopt;
    }

    case ExprKind::Div: {
      if (is_one(b)) return a;
      if (is_zero(a) && !is_zero(b)) return lit(0);
      if (is_const(a) && is_const(b)) {
        if (auto r = Rational::div(a->value, b->value))
          return rational_const(*r);
      }
      if (is_minus_one(b)) return rewrite_loop(-a);
      if (a->kind == ExprKind::Neg && b->kind == ExprKind::Neg)
        return rebuild(ExprKind::Div, a->a, b->a);
      if (a->kind == ExprKind::Neg)
        return rewrite_loop(-rebuild(ExprKind::Div, a->a, b));
      if (b->kind == ExprKind::Neg)
        return rewrite_loop(-rebuild(ExprKind::Div, a, b->a));
      if (same(a, b)) return lit(1); // valid on the (nonvanishing) domain
      {
        auto [ba, ka] = as_base_exp(a);
        auto [bb, kb] = as_base_exp(b);
        if (same(ba, bb) && !is_const(ba))
          return rewrite_loop(pow_int(ba, ka - kb));
      }
      // (u*v)/w cancellations
      if (a->kind == ExprKind::Mul) {
        if (same(a->a, b)) return a->b;
        if (same(a->b, b)) return a->a;
      }
      // u/(v*w) cancellations
      if (b->kind == ExprKind::Mul) {
        if (same(a, b->a)) return rebuild(ExprKind::Div, lit(1), b->b);
        if (same(a, b->b)) return rebuild(ExprKind::Div, lit(1), b->a);
      }
      return std::nullopt;
    }

    case ExprKind::Pow: {
      long long k = e->exponent;
      if (k == 0) return lit(1); // base nonzero on the evaluation domain
      if (k == 1) return a;
      if (is_const(a)) {
        if (auto r = Rational::pow(a->value, k)) return rational_const(*r);
      }
      if (a->kind == ExprKind::Pow)
        return rewrite_loop(pow_int(a->a, a->exponent * k));
      if (a->kind == ExprKind::Neg) {
        Expr p = rewrite_loop(pow_int(a->a, k));
        return (k % 2 == 0) ? p : rewrite_loop(-p);
      }
      return std::nullopt;
    }

    case ExprKind::Func:
      return std::nullopt;
  }
  return std::nullopt;
}

} // namespace detail

inline Expr simplify(const Expr& e) {
  switch (e->kind) {
    case ExprKind::Constant:
    case ExprKind::Coord:
      return e;
    case ExprKind::Neg:
      return detail::rewrite_loop(-simplify(e->a));
    case ExprKind::Pow:
      return detail::rewrite_loop(pow_int(simplify(e->a), e->exponent));
    case ExprKind::Func:
      return detail::rewrite_loop(apply_func(e->func, simplify(e->a)));
    default:
      return detail::rebuild(e->kind, simplify(e->a), simplify(e->b));
  }
}

// --- differentiation --------------------------------------------------------

namespace detail {

inline Expr diff_raw(const Expr& e, int var) {
  switch (e->kind) {
    case ExprKind::Constant:
      return lit(0);
    case ExprKind::Coord:
      return lit(e->coord == var ? 1 : 0);
    case ExprKind::Neg:
      return -diff_raw(e->a, var);
    case ExprKind::Add:
      return diff_raw(e->a, var) + diff_raw(e->b, var);
    case ExprKind::Sub:
      return diff_raw(e->a, var) - diff_raw(e->b, var);
    case ExprKind::Mul:
      return diff_raw(e->a, var) * e->b + e->a * diff_raw(e->b, var);
    case ExprKind::Div:
      return (diff_raw(e->a, var) * e->b - e->a * diff_raw(e->b, var)) /
             pow_int(e->b, 2);
    case ExprKind::Pow:
      return lit(e->exponent) * pow_int(e->a, e->exponent - 1) *
             diff_raw(e->a, var);
    case ExprKind::Func: {
      Expr inner = diff_raw(e->a, var);
      switch (e->func) {
        case FuncId::Sin: return apply_func(FuncId::Cos, e->a) * inner;
        case FuncId::Cos: return -(apply_func(FuncId::Sin, e->a) * inner);
        case FuncId::Exp: return apply_func(FuncId::Exp, e->a) * inner;
        case FuncId::Log: return inner / e->a;
        case FuncId::Sqrt:
          return inner / (lit(2) * apply_func(FuncId::Sqrt, e->a));
      }
      return lit(0);
    }
  }
  return lit(0);
}

} // namespace detail

/// Exact symbolic partial derivative with respect to the coordinate `var`.
inline Expr diff(const Expr& e, int var) {
  return simplify(detail::diff_raw(e, var));
}

/// Replace every reference to coordinate `id` by `replacement`.
inline Expr substitute(const Expr& e, int id, const Expr& replacement) {
  switch (e->kind) {
    case ExprKind::Constant:
      return e;
    case ExprKind::Coord:
      return e->coord == id ? replacement : e;
    case ExprKind::Neg:
      return -substitute(e->a, id, replacement);
    case ExprKind::Pow:
      return pow_int(substitute(e->a, id, replacement), e->exponent);
    case ExprKind::Func:
      return apply_func(e->func, substitute(e->a, id, replacement));
    default:
      return detail::binary(e->kind, substitute(e->a, id, replacement),
                            substitute(e->b, id, replacement));
  }
}

// --- parsing ----------------------------------------------------------------
//
// Grammar:
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := ["-"] atom ["^" integer]
//   atom   := number | ident | ident "(" expr ")" | "(" expr ")"
//
// "2/3" with both sides integer literals folds to an exact rational.

namespace detail {

struct Parser {
  std::string_view src;
  std::span<const std::string> symbols;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
      ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos); }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (true) {
      skip_ws();
      if (eat('+')) {
        lhs = lhs + parse_term();
      } else if (eat('-')) {
        lhs = lhs - parse_term();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    while (true) {
      skip_ws();
      if (eat('*')) {
        lhs = lhs * parse_factor();
      } else if (eat('/')) {
        Expr rhs = parse_factor();
        if (is_const(lhs) && lhs->value.is_integer() && is_const(rhs) &&
            rhs->value.is_integer() && rhs->value.num() != 0) {
          lhs = rational_const(Rational(lhs->value.num(), rhs->value.num()));
        } else {
          lhs = lhs / rhs;
        }
      } else {
        return lhs;
      }
    }
  }

  Expr parse_factor() {
    skip_ws();
    bool negate = false;
    if (eat('-')) negate = true;
    Expr atom = parse_atom();
    skip_ws();
    if (eat('^')) {
      long long k = parse_integer();
      atom = pow_int(atom, k);
    }
    return negate ? -atom : atom;
  }

  long long parse_integer() {
    skip_ws();
    bool neg = false;
    if (pos < src.size() && src[pos] == '-') {
      neg = true;
      ++pos;
    }
    if (pos >= src.size() || !std::isdigit(static_cast<unsigned char>(src[pos])))
      fail("expected integer exponent");
    long long v = 0;
    int digits = 0;
    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
      v = v * 10 + (src[pos] - '0');
      ++pos;
      if (++digits > 9) fail("exponent too large");
    }
    return neg ? -v : v;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos >= src.size()) fail("unexpected end of expression");
    char c = src[pos];
    if (c == '(') {
      ++pos;
      Expr inner = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr parse_number() {
    std::size_t start = pos;
    long long int_part = 0;
    int digits = 0;
    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
      int_part = int_part * 10 + (src[pos] - '0');
      ++pos;
      if (++digits > 17) {
        pos = start;
        fail("number literal too large");
      }
    }
    if (pos < src.size() && src[pos] == '.') {
      ++pos;
      long long frac = 0;
      long long scale = 1;
      int fdigits = 0;
      while (pos < src.size() &&
             std::isdigit(static_cast<unsigned char>(src[pos]))) {
        frac = frac * 10 + (src[pos] - '0');
        scale *= 10;
        ++pos;
        if (++fdigits > 15) {
          pos = start;
          fail("number literal too precise");
        }
      }
      if (fdigits == 0) fail("expected digits after decimal point");
      auto whole = Rational::mul(Rational(int_part), Rational(scale));
      if (!whole) fail("number literal overflows");
      auto sum = Rational::add(*whole, Rational(frac));
      if (!sum) fail("number literal overflows");
      return rational_const(Rational(sum->num(), scale * sum->den()));
    }
    return lit(int_part);
  }

  Expr parse_ident() {
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) ||
            src[pos] == '_'))
      ++pos;
    std::string name(src.substr(start, pos - start));

    static const std::pair<const char*, FuncId> funcs[] = {
        {"sin", FuncId::Sin},
        {"cos", FuncId::Cos},
        {"exp", FuncId::Exp},
        {"log", FuncId::Log},
        {"sqrt", FuncId::Sqrt},
    };
    for (auto& [fname, fid] : funcs) {
      if (name == fname) {
        skip_ws();
        if (!eat('(')) {
          pos = start;
          fail("function '" + name + "' requires an argument list");
        }
        Expr arg = parse_expr();
        if (!eat(')')) fail("expected ')' after function argument");
        return apply_func(fid, arg);
      }
    }
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (symbols[i] == name) return symbol(static_cast<int>(i), name);
    }
    pos = start;
    fail("unknown identifier '" + name + "'");
  }
};

} // namespace detail

/// Parse `src` over the declared symbol list. Unknown identifiers and syntax
/// errors throw ParseError with the byte offset.
inline Expr parse_expression(std::string_view src,
                             std::span<const std::string> symbols) {
  detail::Parser p{src, symbols};
  Expr e = p.parse_expr();
  p.skip_ws();
  if (p.pos != src.size())
    throw ParseError("trailing characters after expression", p.pos);
  return e;
}

} // namespace lcsgeo
