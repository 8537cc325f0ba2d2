#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "crfeff/expr.hpp"

using namespace crfeff;

namespace {

Chart np_chart() {
  Chart c;
  c.coords = {"u", "x1", "y1", "x2", "y2"};
  c.complex_pairs = {{"z1", 1, 2}, {"z2", 3, 4}};
  return c;
}

double fd(const ExprPtr& e, const Chart& c, const LetTable& lets, Point x, int i,
          double h = 1e-5) {
  x[i] += h;
  double up = eval_expr(e, c, lets, x, 1).value().real();
  x[i] -= 2 * h;
  double dn = eval_expr(e, c, lets, x, 1).value().real();
  return (up - dn) / (2 * h);
}

}  // namespace

TEST_CASE("parse basic expressions") {
  ExprPtr f = parse_expr("4*(z1 + conj(z1) - 2*z2*conj(z2))");
  CHECK(f->kind == ExprKind::Binary);
  CHECK(f->bop == BinaryOp::Mul);

  ExprPtr zero = parse_expr("0");
  CHECK(zero->kind == ExprKind::Constant);
  CHECK(zero->constant == cplx(0.0));

  ExprPtr p = parse_expr("f^(-3/4)");
  CHECK(p->kind == ExprKind::Binary);
  CHECK(p->bop == BinaryOp::Pow);
  CHECK(std::abs(eval_const_expr(p->b) - cplx(-0.75)) < 1e-15);

  CHECK_THROWS_AS(parse_expr("2*(x+"), ParseError);
  CHECK_THROWS_AS(parse_expr("foo#bar"), ParseError);
}

TEST_CASE("parse / print round trip is a fixed point") {
  const char* sources[] = {
      "4*(z1 + conj(z1) - 2*z2*conj(z2))",
      "f^(-3/4)",
      "-x1*exp(u) + sin(y1)/cos(x2) - sqrt(x1 + 2)",
      "(3+2*i)*z1^2 - d(u) + i*z2*d(conj(z1))",
      "1.5e-3 * x1 - log(x1 + 4)",
  };
  for (const char* s : sources) {
    ExprPtr e1 = parse_expr(s);
    std::string printed = to_string(e1);
    ExprPtr e2 = parse_expr(printed);
    CHECK(expr_equal(e1, e2));
    CHECK(to_string(e2) == printed);
  }
}

TEST_CASE("evaluation against the closed forms") {
  Chart c = np_chart();
  LetTable lets;
  lets["f"] = parse_expr("4*(z1 + conj(z1) - 2*z2*conj(z2))");

  // f at (u=0, z1=1, z2=0): constant 8, df/dx1 = 8, df/dy1 = 0
  Point p0 = {0.0, 1.0, 0.0, 0.0, 0.0};
  Jet f = eval_expr(parse_expr("f"), c, lets, p0, 2);
  CHECK(std::abs(f.value() - cplx(8.0)) < 1e-14);
  CHECK(std::abs(f.d1(1) - cplx(8.0)) < 1e-14);  // z1 + conj z1 = 2 x1
  CHECK(std::abs(f.d1(2)) < 1e-14);

  // Wirtinger normalisation: df/dz1 = 4 at p0.
  auto [dz1, dz1b] = wirtinger(f, 1, 2);
  CHECK(std::abs(dz1.value() - cplx(4.0)) < 1e-13);
  CHECK(std::abs(dz1b.value() - cplx(4.0)) < 1e-13);
  for (int i = 0; i < 5; ++i) {
    double want = fd(parse_expr("f"), c, lets, p0, i);
    CHECK(std::abs(f.d1(i).real() - want) < 1e-6);
  }

  Jet k = eval_expr(parse_expr("3+2*i"), c, lets, p0, 2);
  CHECK(std::abs(k.value() - cplx(3.0, 2.0)) < 1e-15);
  CHECK(k.d1(0) == cplx(0.0));

  Point p1 = {0.0, 0.0, 0.0, 1.0, 1.0};  // z2 = 1 + i
  Jet cz = eval_expr(parse_expr("conj(z2)"), c, lets, p1, 1);
  CHECK(std::abs(cz.value() - cplx(1.0, -1.0)) < 1e-15);
}

TEST_CASE("eval respects conj") {
  Chart c = np_chart();
  LetTable lets;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  const char* exprs[] = {"z1*z2 + exp(z1)", "z1^3 - i*z2", "sin(x1)*z2 + u"};
  for (const char* s : exprs) {
    ExprPtr e = parse_expr(s);
    ExprPtr ce = Expr::make_unary(UnaryOp::Conj, e);
    for (int it = 0; it < 5; ++it) {
      Point p = {u(rng), u(rng), u(rng), u(rng), u(rng)};
      Jet a = eval_expr(e, c, lets, p, 2);
      Jet b = eval_expr(ce, c, lets, p, 2);
      CHECK((a.conj() - b).max_abs() < 1e-13);
    }
  }
}

TEST_CASE("evaluation agrees with direct floating point") {
  Chart c = np_chart();
  LetTable lets;
  ExprPtr e = parse_expr("exp(0.25*x1)*sin(y1) + x2^3/(1 + u^2) - sqrt(x1 + 3)");
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int it = 0; it < 25; ++it) {
    Point p = {u(rng), u(rng), u(rng), u(rng), u(rng)};
    double direct = std::exp(0.25 * p[1]) * std::sin(p[2]) +
                    std::pow(p[3], 3) / (1 + p[0] * p[0]) - std::sqrt(p[1] + 3);
    Jet j = eval_expr(e, c, lets, p, 1);
    CHECK(std::abs(j.value().real() - direct) < 1e-12 * std::max(1.0, std::abs(direct)));
    CHECK(std::abs(j.value().imag()) < 1e-14);
  }
}

TEST_CASE("domain violations raise singular-point errors") {
  Chart c = np_chart();
  LetTable lets;
  lets["f"] = parse_expr("4*(z1 + conj(z1) - 2*z2*conj(z2))");
  Point bad = {0.0, -1.0, 0.0, 0.0, 0.0};  // f = -8 < 0: fine for power, but 1/0 and log(0):
  CHECK_THROWS_AS(eval_expr(parse_expr("1/(x1 + 1)"), c, lets, bad, 1), SingularPoint);
  CHECK_THROWS_AS(eval_expr(parse_expr("log(x1 + 1)"), c, lets, bad, 1), SingularPoint);
  CHECK_THROWS_AS(eval_expr(parse_expr("(x1 + 1)^(1/2)"), c, lets, bad, 1), SingularPoint);
  CHECK_THROWS(eval_expr(parse_expr("nosuchname"), c, lets, bad, 1));
}

TEST_CASE("one-form values expand complex differentials") {
  Chart c = np_chart();
  LetTable lets;
  DiffValue v = eval_diff_expr(parse_expr("d(z1) + 2*d(u)"), c, lets, {0, 0, 0, 0, 0}, 1);
  REQUIRE(v.is_form());
  CHECK(std::abs(v.form[0].value() - cplx(2.0)) < 1e-15);
  CHECK(std::abs(v.form[1].value() - cplx(1.0)) < 1e-15);
  CHECK(std::abs(v.form[2].value() - cplx(0.0, 1.0)) < 1e-15);

  DiffValue w = eval_diff_expr(parse_expr("d(conj(z2))"), c, lets, {0, 0, 0, 0, 0}, 1);
  CHECK(std::abs(w.form[3].value() - cplx(1.0)) < 1e-15);
  CHECK(std::abs(w.form[4].value() - cplx(0.0, -1.0)) < 1e-15);

  CHECK_THROWS(eval_diff_expr(parse_expr("d(u)*d(z1)"), c, lets, {0, 0, 0, 0, 0}, 1));
  CHECK_THROWS(eval_diff_expr(parse_expr("d(u) + x1"), c, lets, {0, 0, 0, 0, 0}, 1));
}
