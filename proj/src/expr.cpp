#include "fuzzcalc/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

namespace fuzzcalc {

struct Expr::Node {
  Op op = Op::Var;
  double value = 0.0;
  ConstantShape constant = Triangular<double>{0.0, 0.0, 0.0};
  std::optional<Expr> lhs;
  std::optional<Expr> rhs;
  SourceSpan span;
};

Interval<double> constant_cut(const ConstantShape& shape, double alpha) {
  return std::visit(
      [alpha](const auto& s) -> Interval<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Triangular<double>>) return detail::triangular_cut(s, alpha);
        else if constexpr (std::is_same_v<T, Trapezoidal<double>>) return detail::trapezoidal_cut(s, alpha);
        else return detail::gaussian_cut(s, alpha);
      },
      shape);
}

FuzzyNumber constant_number(const ConstantShape& shape, const AlphaGrid& grid) {
  return std::visit(
      [&grid](const auto& s) -> FuzzyNumber {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Triangular<double>>) return make_triangular(s.left, s.peak, s.right, grid);
        else if constexpr (std::is_same_v<T, Trapezoidal<double>>) return make_trapezoidal(s.a, s.b, s.c, s.d, grid);
        else return make_gaussian(s.mu, s.sigma, s.alpha_min, grid);
      },
      shape);
}

namespace {

void check_shape(const ConstantShape& shape) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Triangular<double>>) {
          if (!(s.left <= s.peak && s.peak <= s.right))
            throw InvalidParameter("tri(a,b,c) requires a <= b <= c");
        } else if constexpr (std::is_same_v<T, Trapezoidal<double>>) {
          if (!(s.a <= s.b && s.b <= s.c && s.c <= s.d))
            throw InvalidParameter("trap(a,b,c,d) requires a <= b <= c <= d");
        } else {
          if (!(s.sigma > 0.0)) throw InvalidParameter("gauss(mu,sigma) requires sigma > 0");
          if (!(s.alpha_min > 0.0 && s.alpha_min < 1.0))
            throw InvalidParameter("gauss alpha_min must lie in (0,1)");
        }
      },
      shape);
}

}  // namespace

Expr Expr::var(SourceSpan span) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->span = span;
  return Expr(std::move(n));
}

Expr Expr::crisp(double value, SourceSpan span) {
  if (!std::isfinite(value)) throw InvalidParameter("crisp constant must be finite");
  auto n = std::make_shared<Node>();
  n->op = Op::CrispConst;
  n->value = value;
  n->span = span;
  return Expr(std::move(n));
}

Expr Expr::fuzzy(ConstantShape shape, SourceSpan span) {
  check_shape(shape);
  auto n = std::make_shared<Node>();
  n->op = Op::FuzzyConst;
  n->constant = shape;
  n->span = span;
  return Expr(std::move(n));
}

namespace {

std::shared_ptr<Expr::Node> binary(Op op, Expr lhs, Expr rhs, SourceSpan span) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->span = span;
  return n;
}

std::shared_ptr<Expr::Node> unary(Op op, Expr operand, SourceSpan span) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->lhs = std::move(operand);
  n->span = span;
  return n;
}

}  // namespace

Expr Expr::add(Expr lhs, Expr rhs, SourceSpan span) {
  return Expr(binary(Op::Add, std::move(lhs), std::move(rhs), span));
}

Expr Expr::sub(Expr lhs, Expr rhs, SourceSpan span) {
  return Expr(binary(Op::Sub, std::move(lhs), std::move(rhs), span));
}

Expr Expr::mul(Expr lhs, Expr rhs, SourceSpan span) {
  return Expr(binary(Op::Mul, std::move(lhs), std::move(rhs), span));
}

Expr Expr::scalar_mul(double k, Expr operand, SourceSpan span) {
  if (!std::isfinite(k)) throw InvalidParameter("scalar coefficient must be finite");
  auto n = unary(Op::ScalarMul, std::move(operand), span);
  n->value = k;
  return Expr(std::move(n));
}

Expr Expr::exp(Expr operand, SourceSpan span) { return Expr(unary(Op::Exp, std::move(operand), span)); }

Expr Expr::neg(Expr operand, SourceSpan span) { return Expr(unary(Op::Neg, std::move(operand), span)); }

Expr Expr::product(Expr lhs, Expr rhs, SourceSpan span) {
  if (lhs.op() == Op::CrispConst) return scalar_mul(lhs.value(), std::move(rhs), span);
  if (rhs.op() == Op::CrispConst) return scalar_mul(rhs.value(), std::move(lhs), span);
  return mul(std::move(lhs), std::move(rhs), span);
}

Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
const ConstantShape& Expr::constant() const { return node_->constant; }
const Expr& Expr::lhs() const { return *node_->lhs; }
const Expr& Expr::rhs() const { return *node_->rhs; }
SourceSpan Expr::span() const { return node_->span; }

bool Expr::contains_var() const {
  switch (op()) {
    case Op::Var: return true;
    case Op::FuzzyConst:
    case Op::CrispConst: return false;
    case Op::Add:
    case Op::Sub:
    case Op::Mul: return lhs().contains_var() || rhs().contains_var();
    default: return operand().contains_var();
  }
}

std::size_t Expr::node_count() const {
  switch (op()) {
    case Op::Var:
    case Op::FuzzyConst:
    case Op::CrispConst: return 1;
    case Op::Add:
    case Op::Sub:
    case Op::Mul: return 1 + lhs().node_count() + rhs().node_count();
    default: return 1 + operand().node_count();
  }
}

std::size_t Expr::depth() const {
  switch (op()) {
    case Op::Var:
    case Op::FuzzyConst:
    case Op::CrispConst: return 1;
    case Op::Add:
    case Op::Sub:
    case Op::Mul: return 1 + std::max(lhs().depth(), rhs().depth());
    default: return 1 + operand().depth();
  }
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Var: return true;
    case Op::CrispConst: return a.value() == b.value();
    case Op::FuzzyConst: return a.constant() == b.constant();
    case Op::Add:
    case Op::Sub:
    case Op::Mul: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    case Op::ScalarMul: return a.value() == b.value() && a.operand() == b.operand();
    case Op::Exp:
    case Op::Neg: return a.operand() == b.operand();
  }
  return false;
}

Expr tri(double a, double b, double c) { return Expr::fuzzy(Triangular<double>{a, b, c}); }
Expr trap(double a, double b, double c, double d) { return Expr::fuzzy(Trapezoidal<double>{a, b, c, d}); }
Expr gauss(double mu, double sigma, double alpha_min) { return Expr::fuzzy(Gaussian<double>{mu, sigma, alpha_min}); }

ParseError::ParseError(Kind kind, SourceSpan span, const std::string& message)
    : Error([&] {
        std::ostringstream os;
        switch (kind) {
          case Kind::Lexical: os << "lexical error"; break;
          case Kind::Syntax: os << "syntax error"; break;
          case Kind::UnknownIdentifier: os << "unknown identifier"; break;
          case Kind::InvalidConstant: os << "invalid constant"; break;
        }
        os << " at " << span.start << ".." << span.end << ": " << message;
        return os.str();
      }()),
      kind_(kind),
      span_(span),
      detail_(message) {}

// ---------------------------------------------------------------------------
// Lexer and recursive-descent parser.

namespace {

enum class Tok { End, Number, Ident, Plus, Minus, Star, Caret, LParen, RParen, Comma };

struct Token {
  Tok kind = Tok::End;
  SourceSpan span;
  std::string_view text;
  double number = 0.0;
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Number: return "number";
    case Tok::Ident: return "identifier";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Caret: return "'^'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
  }
  return "token";
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.span.start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < n && text[j] == '.') {
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < n && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < n && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) {
          while (k < n && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
          j = k;
        }
      }
      t.kind = Tok::Number;
      t.span.end = j;
      t.text = text.substr(i, j - i);
      const auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size() || !std::isfinite(t.number))
        throw ParseError(ParseError::Kind::Lexical, t.span, "malformed number '" + std::string(t.text) + "'");
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.span.end = j;
      t.text = text.substr(i, j - i);
      i = j;
    } else {
      switch (c) {
        case '+': t.kind = Tok::Plus; break;
        case '-': t.kind = Tok::Minus; break;
        case '*': t.kind = Tok::Star; break;
        case '^': t.kind = Tok::Caret; break;
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case ',': t.kind = Tok::Comma; break;
        default:
          throw ParseError(ParseError::Kind::Lexical, {i, i + 1},
                           std::string("unexpected character '") + c + "'");
      }
      t.span.end = i + 1;
      t.text = text.substr(i, 1);
      ++i;
    }
    out.push_back(t);
  }
  Token end;
  end.kind = Tok::End;
  end.span = {n, n};
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  Expr parse_all() {
    Expr e = expr();
    if (peek().kind != Tok::End) {
      if (peek().kind == Tok::RParen)
        throw ParseError(ParseError::Kind::Syntax, peek().span, "unbalanced ')'");
      throw ParseError(ParseError::Kind::Syntax, peek().span,
                       std::string("unexpected ") + describe(peek().kind) + " after expression");
    }
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  Token next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  Token expect(Tok kind, const char* context) {
    if (peek().kind != kind) {
      std::string msg = std::string("expected ") + describe(kind) + " " + context + ", found " + describe(peek().kind);
      throw ParseError(ParseError::Kind::Syntax, peek().span, msg);
    }
    return next();
  }

  static SourceSpan join(SourceSpan a, SourceSpan b) { return {std::min(a.start, b.start), std::max(a.end, b.end)}; }

  Expr expr() {
    Expr lhs = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const Tok op = next().kind;
      Expr rhs = term();
      const SourceSpan span = join(lhs.span(), rhs.span());
      lhs = op == Tok::Plus ? Expr::add(lhs, rhs, span) : Expr::sub(lhs, rhs, span);
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = factor();
    while (peek().kind == Tok::Star) {
      next();
      Expr rhs = factor();
      lhs = Expr::product(lhs, rhs, join(lhs.span(), rhs.span()));
    }
    return lhs;
  }

  Expr factor() {
    const Token& t = peek();
    if (t.kind == Tok::Minus) {
      const Token minus = next();
      // A sign glued to a numeral is part of the literal.
      if (peek().kind == Tok::Number && peek().span.start == minus.span.end) {
        const Token num = next();
        return with_power(Expr::crisp(-num.number, join(minus.span, num.span)));
      }
      Expr operand = factor();
      return Expr::neg(operand, join(minus.span, operand.span()));
    }
    if (t.kind == Tok::Ident && t.text == "exp") {
      const Token name = next();
      expect(Tok::LParen, "after 'exp'");
      Expr inner = expr();
      const Token close = expect(Tok::RParen, "to close 'exp('");
      return Expr::exp(inner, join(name.span, close.span));
    }
    return with_power(base());
  }

  Expr with_power(Expr b) {
    if (peek().kind != Tok::Caret) return b;
    const Token caret = next();
    const Token exponent = expect(Tok::Number, "after '^'");
    double ip = 0.0;
    if (std::modf(exponent.number, &ip) != 0.0 || exponent.number < 1.0 || exponent.number > 64.0)
      throw ParseError(ParseError::Kind::Syntax, exponent.span, "exponent must be an integer between 1 and 64");
    const SourceSpan span = join(b.span(), exponent.span);
    (void)caret;
    Expr result = b;
    for (int i = 1; i < static_cast<int>(ip); ++i) result = Expr::product(result, b, span);
    return result;
  }

  double signed_number(const char* context) {
    double sign = 1.0;
    if (peek().kind == Tok::Minus || peek().kind == Tok::Plus) sign = next().kind == Tok::Minus ? -1.0 : 1.0;
    return sign * expect(Tok::Number, context).number;
  }

  std::vector<double> arguments(const Token& name, std::size_t min_count, std::size_t max_count) {
    expect(Tok::LParen, "after constructor name");
    std::vector<double> args;
    args.push_back(signed_number("as constructor argument"));
    while (peek().kind == Tok::Comma) {
      next();
      args.push_back(signed_number("as constructor argument"));
    }
    const Token close = expect(Tok::RParen, "to close constructor arguments");
    if (args.size() < min_count || args.size() > max_count) {
      std::ostringstream os;
      os << "'" << name.text << "' takes " << min_count;
      if (max_count != min_count) os << " or " << max_count;
      os << " arguments, got " << args.size();
      throw ParseError(ParseError::Kind::Syntax, join(name.span, close.span), os.str());
    }
    last_close_ = close.span;
    return args;
  }

  Expr constant(const Token& name, ConstantShape shape) {
    const SourceSpan span = join(name.span, last_close_);
    try {
      return Expr::fuzzy(shape, span);
    } catch (const InvalidParameter& e) {
      throw ParseError(ParseError::Kind::InvalidConstant, span, e.what());
    }
  }

  Expr base() {
    const Token t = peek();
    switch (t.kind) {
      case Tok::Number:
        next();
        return Expr::crisp(t.number, t.span);
      case Tok::LParen: {
        next();
        Expr inner = expr();
        if (peek().kind != Tok::RParen)
          throw ParseError(ParseError::Kind::Syntax, t.span,
                           std::string("unbalanced '(': expected ')' before ") + describe(peek().kind));
        next();
        return inner;
      }
      case Tok::Ident: {
        next();
        if (t.text == "X") return Expr::var(t.span);
        if (t.text == "tri") {
          auto a = arguments(t, 3, 3);
          return constant(t, Triangular<double>{a[0], a[1], a[2]});
        }
        if (t.text == "trap") {
          auto a = arguments(t, 4, 4);
          return constant(t, Trapezoidal<double>{a[0], a[1], a[2], a[3]});
        }
        if (t.text == "gauss") {
          auto a = arguments(t, 2, 3);
          return constant(t, Gaussian<double>{a[0], a[1], a.size() == 3 ? a[2] : kDefaultGaussianAlphaMin});
        }
        throw ParseError(ParseError::Kind::UnknownIdentifier, t.span, "'" + std::string(t.text) + "'");
      }
      case Tok::End:
        if (pos_ > 0) {
          const Token& prev = tokens_[pos_ - 1];
          if (prev.kind == Tok::Plus || prev.kind == Tok::Minus || prev.kind == Tok::Star || prev.kind == Tok::Caret)
            throw ParseError(ParseError::Kind::Syntax, prev.span, std::string("dangling operator ") + describe(prev.kind));
        }
        throw ParseError(ParseError::Kind::Syntax, t.span, "unexpected end of input, expected an operand");
      default:
        throw ParseError(ParseError::Kind::Syntax, t.span,
                         std::string("dangling operator: expected an operand, found ") + describe(t.kind));
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  SourceSpan last_close_;
};

// Binding strength used by the formatter.
enum Prec { kSum = 1, kProduct = 2, kUnary = 3 };

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub: return kSum;
    case Op::Mul:
    case Op::ScalarMul: return kProduct;
    case Op::Neg: return kUnary;
    case Op::CrispConst: return e.value() < 0.0 || std::signbit(e.value()) ? kUnary : 4;
    default: return 4;
  }
}

void emit(const Expr& e, int min_prec, std::string& out);

void emit_child(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    emit(e, kSum, out);
    out += ')';
  } else {
    emit(e, min_prec, out);
  }
}

void emit(const Expr& e, int, std::string& out) {
  switch (e.op()) {
    case Op::Var: out += 'X'; break;
    case Op::CrispConst: out += format_number(e.value()); break;
    case Op::FuzzyConst:
      std::visit(
          [&out](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Triangular<double>>) {
              out += "tri(" + format_number(s.left) + "," + format_number(s.peak) + "," + format_number(s.right) + ")";
            } else if constexpr (std::is_same_v<T, Trapezoidal<double>>) {
              out += "trap(" + format_number(s.a) + "," + format_number(s.b) + "," + format_number(s.c) + "," +
                     format_number(s.d) + ")";
            } else {
              out += "gauss(" + format_number(s.mu) + "," + format_number(s.sigma);
              if (s.alpha_min != kDefaultGaussianAlphaMin) out += "," + format_number(s.alpha_min);
              out += ")";
            }
          },
          e.constant());
      break;
    case Op::Add:
    case Op::Sub:
      emit_child(e.lhs(), kSum, out);
      out += e.op() == Op::Add ? " + " : " - ";
      emit_child(e.rhs(), kProduct, out);
      break;
    case Op::Mul:
      emit_child(e.lhs(), kProduct, out);
      out += '*';
      emit_child(e.rhs(), kUnary, out);
      break;
    case Op::ScalarMul:
      out += format_number(e.value());
      out += '*';
      emit_child(e.operand(), kUnary, out);
      break;
    case Op::Exp:
      out += "exp(";
      emit(e.operand(), kSum, out);
      out += ')';
      break;
    case Op::Neg: {
      std::string inner;
      emit_child(e.operand(), kUnary, inner);
      out += '-';
      // "-4" would read back as a negative literal.
      if (!inner.empty() && (std::isdigit(static_cast<unsigned char>(inner[0])) || inner[0] == '.'))
        out += "(" + inner + ")";
      else
        out += inner;
      break;
    }
  }
}

}  // namespace

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

std::string format(const Expr& e) {
  std::string out;
  emit(e, kSum, out);
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Constant folding.

namespace {

// Value of a variable-free subtree when it has a closed form.
struct Folded {
  enum class Kind { Crisp, Shape } kind;
  double crisp = 0.0;
  ConstantShape shape = Triangular<double>{0.0, 0.0, 0.0};
};

std::optional<Trapezoidal<double>> trapezoid_of(const Folded& f) {
  if (f.kind == Folded::Kind::Crisp) return Trapezoidal<double>{f.crisp, f.crisp, f.crisp, f.crisp};
  if (auto t = std::get_if<Triangular<double>>(&f.shape)) return Trapezoidal<double>{t->left, t->peak, t->peak, t->right};
  if (auto t = std::get_if<Trapezoidal<double>>(&f.shape)) return *t;
  return std::nullopt;
}

Folded shape_result(const Trapezoidal<double>& t) {
  Folded f{Folded::Kind::Shape};
  if (t.b == t.c) f.shape = Triangular<double>{t.a, t.b, t.d};
  else f.shape = t;
  return f;
}

std::optional<Folded> scaled(double k, const Folded& v) {
  if (v.kind == Folded::Kind::Crisp) return Folded{Folded::Kind::Crisp, k * v.crisp};
  if (k == 0.0) return Folded{Folded::Kind::Crisp, 0.0};
  if (auto g = std::get_if<Gaussian<double>>(&v.shape)) {
    Folded f{Folded::Kind::Shape};
    f.shape = Gaussian<double>{k * g->mu, std::abs(k) * g->sigma, g->alpha_min};
    return f;
  }
  auto t = *trapezoid_of(v);
  if (k > 0.0) return shape_result({k * t.a, k * t.b, k * t.c, k * t.d});
  return shape_result({k * t.d, k * t.c, k * t.b, k * t.a});
}

std::optional<Folded> combined(Op op, const Folded& a, const Folded& b) {
  const bool add = op == Op::Add;
  if (a.kind == Folded::Kind::Crisp && b.kind == Folded::Kind::Crisp)
    return Folded{Folded::Kind::Crisp, add ? a.crisp + b.crisp : a.crisp - b.crisp};
  // Gaussian shifted by a crisp amount.
  auto shift = [](const Gaussian<double>& g, double c) {
    Folded f{Folded::Kind::Shape};
    f.shape = Gaussian<double>{g.mu + c, g.sigma, g.alpha_min};
    return f;
  };
  if (auto g = std::get_if<Gaussian<double>>(&a.shape); g && a.kind == Folded::Kind::Shape) {
    if (b.kind == Folded::Kind::Crisp) return shift(*g, add ? b.crisp : -b.crisp);
    return std::nullopt;
  }
  if (auto g = std::get_if<Gaussian<double>>(&b.shape); g && b.kind == Folded::Kind::Shape) {
    if (a.kind == Folded::Kind::Crisp) {
      if (add) return shift(*g, a.crisp);
      Folded f{Folded::Kind::Shape};
      f.shape = Gaussian<double>{a.crisp - g->mu, g->sigma, g->alpha_min};
      return f;
    }
    return std::nullopt;
  }
  auto ta = *trapezoid_of(a), tb = *trapezoid_of(b);
  if (add) return shape_result({ta.a + tb.a, ta.b + tb.b, ta.c + tb.c, ta.d + tb.d});
  return shape_result({ta.a - tb.d, ta.b - tb.c, ta.c - tb.b, ta.d - tb.a});
}

Expr to_expr(const Folded& f, SourceSpan span) {
  if (f.kind == Folded::Kind::Crisp) return Expr::crisp(f.crisp, span);
  return Expr::fuzzy(f.shape, span);
}

std::optional<Folded> as_folded(const Expr& e) {
  if (e.op() == Op::CrispConst) return Folded{Folded::Kind::Crisp, e.value()};
  if (e.op() == Op::FuzzyConst) {
    Folded f{Folded::Kind::Shape};
    f.shape = e.constant();
    return f;
  }
  return std::nullopt;
}

Expr fold(const Expr& e) {
  switch (e.op()) {
    case Op::Var:
    case Op::CrispConst:
    case Op::FuzzyConst: return e;
    case Op::Add:
    case Op::Sub: {
      Expr l = fold(e.lhs()), r = fold(e.rhs());
      auto fl = as_folded(l), fr = as_folded(r);
      if (fl && fr)
        if (auto v = combined(e.op(), *fl, *fr)) return to_expr(*v, e.span());
      return e.op() == Op::Add ? Expr::add(l, r, e.span()) : Expr::sub(l, r, e.span());
    }
    case Op::Mul: {
      Expr l = fold(e.lhs()), r = fold(e.rhs());
      auto fl = as_folded(l), fr = as_folded(r);
      if (fl && fl->kind == Folded::Kind::Crisp) {
        if (fr) return to_expr(*scaled(fl->crisp, *fr), e.span());
        return Expr::scalar_mul(fl->crisp, r, e.span());
      }
      if (fr && fr->kind == Folded::Kind::Crisp) {
        if (fl) return to_expr(*scaled(fr->crisp, *fl), e.span());
        return Expr::scalar_mul(fr->crisp, l, e.span());
      }
      return Expr::mul(l, r, e.span());
    }
    case Op::ScalarMul: {
      if (e.value() == 0.0) return Expr::crisp(0.0, e.span());
      Expr inner = fold(e.operand());
      if (auto f = as_folded(inner)) return to_expr(*scaled(e.value(), *f), e.span());
      return Expr::scalar_mul(e.value(), inner, e.span());
    }
    case Op::Neg: {
      Expr inner = fold(e.operand());
      if (auto f = as_folded(inner)) return to_expr(*scaled(-1.0, *f), e.span());
      return Expr::neg(inner, e.span());
    }
    case Op::Exp: {
      Expr inner = fold(e.operand());
      if (inner.op() == Op::CrispConst) {
        const double v = std::exp(inner.value());
        if (std::isfinite(v)) return Expr::crisp(v, e.span());
      }
      return Expr::exp(inner, e.span());
    }
  }
  return e;
}

}  // namespace

Expr fold_constants(const Expr& e) { return fold(e); }

}  // namespace fuzzcalc
