#include <doctest.h>

#include <fuzzcalc/calculus.hpp>
#include <fuzzcalc/expr.hpp>

#include "support/expr_gen.hpp"

#include <cmath>
#include <random>

using namespace fuzzcalc;

namespace {

ParseError parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error for: " << text);
  return ParseError(ParseError::Kind::Syntax, {}, "");
}

}  // namespace

TEST_CASE("parse examples") {
  const Expr e = parse("X*X - 4*X");
  REQUIRE(e.op() == Op::Sub);
  CHECK(e.lhs().op() == Op::Mul);
  CHECK(e.lhs().lhs().op() == Op::Var);
  CHECK(e.rhs().op() == Op::ScalarMul);
  CHECK(e.rhs().value() == 4.0);
  CHECK(e == Expr::sub(Expr::mul(X, X), Expr::scalar_mul(4, X)));

  CHECK(parse("X").op() == Op::Var);
  const Expr n = parse("exp(-X)");
  CHECK(n.op() == Op::Exp);
  CHECK(n.operand().op() == Op::Neg);
  CHECK(n.operand().operand().op() == Op::Var);
}

TEST_CASE("parse details") {
  CHECK(parse("X^3") == Expr::mul(Expr::mul(X, X), X));
  CHECK(parse("X^1") == X);
  CHECK(parse("tri(1,2,4)*X") == Expr::mul(tri(1, 2, 4), X));
  CHECK(parse("X*2") == Expr::scalar_mul(2, X));
  CHECK(parse("-2*X") == Expr::scalar_mul(-2, X));
  CHECK(parse("- X") == Expr::neg(X));
  CHECK(parse("tri(-1, 0, 1.5)") == tri(-1, 0, 1.5));
  CHECK(parse("trap(0,1,2,3)") == trap(0, 1, 2, 3));
  CHECK(parse("gauss(0, 2)") == gauss(0, 2));
  CHECK(parse("gauss(0, 2, 0.01)") == gauss(0, 2, 0.01));
  CHECK(parse("1e-3 + X") == Expr::add(Expr::crisp(1e-3), X));
  CHECK(parse("(X + 1) * (X - 1)") == Expr::mul(Expr::add(X, Expr::crisp(1)), Expr::sub(X, Expr::crisp(1))));
  CHECK(parse("X - X - X") == Expr::sub(Expr::sub(X, X), X));

  const Expr s = parse("X + tri(1,2,3)");
  CHECK(s.span() == SourceSpan{0, 14});
  CHECK(s.rhs().span() == SourceSpan{4, 14});
}

TEST_CASE("parse errors carry kind and span") {
  ParseError e = parse_error("(X + 1");
  CHECK(e.kind() == ParseError::Kind::Syntax);
  CHECK(e.span().start == 0);
  CHECK(e.span().end == 1);

  e = parse_error("X + 1)");
  CHECK(e.kind() == ParseError::Kind::Syntax);
  CHECK(e.span() == SourceSpan{5, 6});

  e = parse_error("X *");
  CHECK(e.kind() == ParseError::Kind::Syntax);
  CHECK(e.span() == SourceSpan{2, 3});

  e = parse_error("X + * X");
  CHECK(e.kind() == ParseError::Kind::Syntax);
  CHECK(e.span() == SourceSpan{4, 5});

  e = parse_error("sin(X)");
  CHECK(e.kind() == ParseError::Kind::UnknownIdentifier);
  CHECK(e.span() == SourceSpan{0, 3});

  e = parse_error("X # 2");
  CHECK(e.kind() == ParseError::Kind::Lexical);
  CHECK(e.span() == SourceSpan{2, 3});

  e = parse_error("tri(3,2,1)");
  CHECK(e.kind() == ParseError::Kind::InvalidConstant);
  CHECK(e.span().start == 0);

  CHECK(parse_error("gauss(0,-1)").kind() == ParseError::Kind::InvalidConstant);
  CHECK(parse_error("tri(1,2)").kind() == ParseError::Kind::Syntax);
  CHECK(parse_error("X^0").kind() == ParseError::Kind::Syntax);
  CHECK(parse_error("X^1.5").kind() == ParseError::Kind::Syntax);
  CHECK(parse_error("").kind() == ParseError::Kind::Syntax);
  CHECK(std::string(parse_error("X +").what()).find("3") != std::string::npos);
}

TEST_CASE("format examples") {
  CHECK(format(Expr::sub(Expr::mul(X, X), Expr::scalar_mul(4, X))) == "X*X - 4*X");
  CHECK(format(X) == "X");
  CHECK(format(tri(1, 2, 4)) == "tri(1,2,4)");
  CHECK(format(Expr::sub(X, Expr::add(X, X))) == "X - (X + X)");
  CHECK(format(Expr::neg(Expr::crisp(4))) == "-(4)");
  CHECK(format(Expr::exp(Expr::neg(X))) == "exp(-X)");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e-10) == "1e-10");
}

TEST_CASE("fold_constants examples") {
  CHECK(fold_constants(Expr::add(Expr::crisp(2), Expr::crisp(3))) == Expr::crisp(5));
  CHECK(fold_constants(Expr::product(tri(1, 2, 3), Expr::crisp(1))) == tri(1, 2, 3));
  CHECK(fold_constants(Expr::add(X, Expr::add(Expr::crisp(1), Expr::crisp(1)))) == Expr::add(X, Expr::crisp(2)));
  CHECK(fold_constants(Expr::add(tri(0, 1, 2), tri(1, 2, 3))) == tri(1, 3, 5));
  CHECK(fold_constants(Expr::scalar_mul(-1, tri(0, 1, 2))) == tri(-2, -1, 0));
  CHECK(fold_constants(Expr::scalar_mul(0, X)) == Expr::crisp(0));

  // Eval-equivalence oracle on the documented example.
  const Family fam = Family::triangular_offset(1, 1);
  const Expr e = Expr::add(X, Expr::add(Expr::crisp(1), Expr::crisp(1)));
  for (double x : {-2.0, 0.3, 4.0})
    for (double a : {0.0, 0.5, 1.0}) CHECK(eval_levels(e, fam, x, a) == eval_levels(fold_constants(e), fam, x, a));
}

TEST_CASE("structure helpers") {
  const Expr e = parse("exp(X*X) + tri(0,1,2)");
  CHECK(e.node_count() == 6);
  CHECK(e.depth() == 4);
  CHECK(e.contains_var());
  CHECK_FALSE(parse("tri(0,1,2) + 3").contains_var());
}

TEST_CASE("property: format then parse round trip") {
  gen::Rng rng(31);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const Expr e = gen::any_tree(rng, 6);
    const std::string text = format(e);
    Expr back = X;
    REQUIRE_NOTHROW(back = parse(text));
    CHECK_MESSAGE(back == e, text);
    CHECK(format(back) == text);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("property: folding preserves level values") {
  gen::Rng rng(32);
  const Family fam = Family::triangular_offset(1, 1);
  std::uniform_real_distribution<double> ux(-2.0, 2.0), ua(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const Expr e = gen::smooth_tree(rng, 5);
    const Expr f = fold_constants(e);
    CHECK(f.node_count() <= e.node_count());
    for (int j = 0; j < 4; ++j) {
      const double x = ux(rng), a = ua(rng);
      const auto [lo, hi] = eval_levels(e, fam, x, a);
      const auto [flo, fhi] = eval_levels(f, fam, x, a);
      CHECK_MESSAGE(std::abs(lo - flo) <= 1e-12 * std::max(1.0, std::abs(lo)), format(e));
      CHECK_MESSAGE(std::abs(hi - fhi) <= 1e-12 * std::max(1.0, std::abs(hi)), format(e));
    }
  }
}
