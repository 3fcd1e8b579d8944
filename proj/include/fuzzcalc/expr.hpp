#ifndef FUZZCALC_EXPR_HPP
#define FUZZCALC_EXPR_HPP

#include "fuzzcalc/core.hpp"

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

namespace fuzzcalc {

// Byte offsets [start, end) into the parsed text.
struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

// Fuzzy constants expressible in the DSL; each has a closed-form cut at any level.
using ConstantShape = std::variant<Triangular<double>, Trapezoidal<double>, Gaussian<double>>;

Interval<double> constant_cut(const ConstantShape& shape, double alpha);
FuzzyNumber constant_number(const ConstantShape& shape, const AlphaGrid& grid = AlphaGrid::uniform());

enum class Op { Var, FuzzyConst, CrispConst, Add, Sub, Mul, ScalarMul, Exp, Neg };

// Immutable expression tree over the single fuzzy variable X. Copies share nodes.
class Expr {
 public:
  struct Node;

  static Expr var(SourceSpan span = {});
  static Expr crisp(double value, SourceSpan span = {});
  static Expr fuzzy(ConstantShape shape, SourceSpan span = {});
  static Expr add(Expr lhs, Expr rhs, SourceSpan span = {});
  static Expr sub(Expr lhs, Expr rhs, SourceSpan span = {});
  static Expr mul(Expr lhs, Expr rhs, SourceSpan span = {});
  static Expr scalar_mul(double k, Expr operand, SourceSpan span = {});
  static Expr exp(Expr operand, SourceSpan span = {});
  static Expr neg(Expr operand, SourceSpan span = {});

  // Product with the parser's rule: a crisp literal on either side gives ScalarMul.
  static Expr product(Expr lhs, Expr rhs, SourceSpan span = {});

  Op op() const;
  // CrispConst value or ScalarMul coefficient.
  double value() const;
  const ConstantShape& constant() const;
  const Expr& lhs() const;
  const Expr& rhs() const;
  // Operand of ScalarMul, Exp and Neg.
  const Expr& operand() const { return lhs(); }
  SourceSpan span() const;

  bool contains_var() const;
  std::size_t node_count() const;
  std::size_t depth() const;

  // Structural equality; spans are ignored.
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

inline const Expr X = Expr::var();

inline Expr operator+(Expr a, Expr b) { return Expr::add(std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return Expr::sub(std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return Expr::product(std::move(a), std::move(b)); }
inline Expr operator*(double k, Expr a) { return Expr::scalar_mul(k, std::move(a)); }
inline Expr operator+(Expr a, double c) { return Expr::add(std::move(a), Expr::crisp(c)); }
inline Expr operator-(Expr a, double c) { return Expr::sub(std::move(a), Expr::crisp(c)); }
inline Expr operator-(Expr a) { return Expr::neg(std::move(a)); }
inline Expr exp(Expr a) { return Expr::exp(std::move(a)); }

Expr tri(double a, double b, double c);
Expr trap(double a, double b, double c, double d);
Expr gauss(double mu, double sigma, double alpha_min = kDefaultGaussianAlphaMin);

class ParseError : public Error {
 public:
  enum class Kind { Lexical, Syntax, UnknownIdentifier, InvalidConstant };

  ParseError(Kind kind, SourceSpan span, const std::string& message);

  Kind kind() const { return kind_; }
  SourceSpan span() const { return span_; }
  const std::string& detail() const { return detail_; }

 private:
  Kind kind_;
  SourceSpan span_;
  std::string detail_;
};

Expr parse(std::string_view text);

// Canonical text; parse(format(e)) == e for every tree the parser can produce.
std::string format(const Expr& e);

// Collapses variable-free subtrees whose value has a closed form (crisp numbers and
// triangular/trapezoidal/gaussian constants under the linear operations).
Expr fold_constants(const Expr& e);

// Shortest decimal that reads back to the same double.
std::string format_number(double v);

}  // namespace fuzzcalc

#endif  // FUZZCALC_EXPR_HPP
