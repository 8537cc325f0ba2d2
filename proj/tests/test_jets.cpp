#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "crfeff/jet.hpp"

using namespace crfeff;

namespace {

// Independent oracle: central finite differences of an evaluatable function.
template <class F>
double fd1(F&& f, std::vector<double> x, int i, double h = 1e-5) {
  x[i] += h;
  double up = f(x);
  x[i] -= 2 * h;
  double dn = f(x);
  return (up - dn) / (2 * h);
}

template <class F>
double fd2(F&& f, std::vector<double> x, int i, int j, double h = 1e-4) {
  auto g = [&](std::vector<double> y) { return fd1(f, y, i, h); };
  return fd1(g, x, j, h);
}

}  // namespace

TEST_CASE("coordinate jets") {
  Jet j = Jet::variable(0, 2.0, 3, 2);
  CHECK(j.value() == cplx(2.0));
  CHECK(j.coeff({1, 0, 0}) == cplx(1.0));
  CHECK(j.coeff({0, 1, 0}) == cplx(0.0));
  CHECK(j.coeff({2, 0, 0}) == cplx(0.0));

  Jet k = Jet::variable(1, 0.0, 2, 1);
  CHECK(k.value() == cplx(0.0));
  CHECK(k.coeff({0, 1}) == cplx(1.0));

  Jet l = Jet::variable(2, cplx(-1.0, 1.0), 3, 3);
  CHECK(l.value() == cplx(-1.0, 1.0));
  CHECK(l.coeff({0, 0, 1}) == cplx(1.0));

  CHECK_THROWS(Jet::variable(3, 0.0, 3, 2));
}

TEST_CASE("product jets") {
  Jet x = Jet::variable(0, 3.0, 1, 2);
  Jet sq = x * x;
  CHECK(sq.value() == cplx(9.0));
  CHECK(sq.coeff({1}) == cplx(6.0));  // d(x^2)/dx = 2x
  CHECK(sq.coeff({2}) == cplx(1.0));

  Jet one = Jet::constant(1.0, 1, 2);
  Jet same = x * one;
  CHECK((same - x).max_abs() == 0.0);

  Jet xx = Jet::variable(0, 1.0, 2, 2);
  Jet yy = Jet::variable(1, 2.0, 2, 2);
  Jet p = xx * yy;
  CHECK(p.value() == cplx(2.0));
  CHECK(p.coeff({1, 0}) == cplx(2.0));
  CHECK(p.coeff({0, 1}) == cplx(1.0));
  CHECK(p.coeff({1, 1}) == cplx(1.0));
}

TEST_CASE("product is commutative and associative") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int it = 0; it < 20; ++it) {
    Jet a(3, 3), b(3, 3), c(3, 3);
    for (int k = 0; k < a.size(); ++k) {
      a[k] = cplx(u(rng), u(rng));
      b[k] = cplx(u(rng), u(rng));
      c[k] = cplx(u(rng), u(rng));
    }
    CHECK((a * b - b * a).max_abs() == 0.0);
    CHECK(((a * b) * c - a * (b * c)).max_abs() < 1e-13);
  }
}

TEST_CASE("composition with univariate primitives") {
  // power(-3/4) of the constant 8
  Jet c8 = Jet::constant(8.0, 2, 2);
  Jet p = jet_pow(c8, -0.75);
  CHECK(std::abs(p.value() - std::pow(8.0, -0.75)) < 1e-15);
  CHECK(std::abs(p.value().real() - 0.2102241) < 1e-6);

  Jet x = Jet::variable(0, 0.0, 1, 3);
  Jet e = jet_exp(x);
  CHECK(std::abs(e.coeff({0}) - cplx(1.0)) < 1e-15);
  CHECK(std::abs(e.coeff({1}) - cplx(1.0)) < 1e-15);
  CHECK(std::abs(e.coeff({2}) - cplx(0.5)) < 1e-15);
  CHECK(std::abs(e.coeff({3}) - cplx(1.0 / 6)) < 1e-15);

  Jet s = jet_sqrt(Jet::constant(4.0, 1, 2));
  CHECK(std::abs(s.value() - cplx(2.0)) < 1e-15);
  CHECK(s.coeff({1}) == cplx(0.0));

  CHECK_THROWS_AS(jet_pow(Jet::constant(0.0, 1, 2), -0.75), std::domain_error);
}

TEST_CASE("pow round trip") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int it = 0; it < 10; ++it) {
    Jet a(2, 4);
    for (int k = 0; k < a.size(); ++k) a[k] = cplx(u(rng), u(rng));
    a[0] = cplx(1.5 + u(rng), 0.0);  // positive real constant term
    double p = 3.7;
    Jet rt = jet_pow(jet_pow(a, 1.0 / p), p);
    CHECK((rt - a).max_abs() < 1e-12 * a.max_abs());
  }
}

TEST_CASE("wirtinger derivatives") {
  // z = x + i y: dz/dz = 1, dz/dzbar = 0
  Jet x = Jet::variable(0, 0.3, 2, 2);
  Jet y = Jet::variable(1, -0.2, 2, 2);
  Jet z = x + cplx(0, 1) * y;
  auto [dz, dzb] = wirtinger(z, 0, 1);
  CHECK(std::abs(dz.value() - cplx(1.0)) < 1e-15);
  CHECK(std::abs(dzb.value()) < 1e-15);

  Jet zbar = x - cplx(0, 1) * y;
  auto [dz2, dzb2] = wirtinger(zbar, 0, 1);
  CHECK(std::abs(dz2.value()) < 1e-15);
  CHECK(std::abs(dzb2.value() - cplx(1.0)) < 1e-15);

  // |z|^2 = z zbar at (1,1): d/dz = zbar = 1 - i, d/dzbar = z = 1 + i
  Jet xx = Jet::variable(0, 1.0, 2, 2);
  Jet yy = Jet::variable(1, 1.0, 2, 2);
  Jet zz = xx * xx + yy * yy;
  auto [a, b] = wirtinger(zz, 0, 1);
  CHECK(std::abs(a.value() - cplx(1.0, -1.0)) < 1e-14);
  CHECK(std::abs(b.value() - cplx(1.0, 1.0)) < 1e-14);

  // a function of zbar alone has vanishing dz through the full jet
  Jet w = zbar * zbar * zbar + cplx(2.5) * zbar;
  auto [dw, dwb] = wirtinger(w, 0, 1);
  CHECK(dw.max_abs() < 1e-14);
  (void)dwb;
}

TEST_CASE("jet coefficients match finite differences") {
  auto f = [](const std::vector<double>& v) {
    return std::exp(0.3 * v[0]) * std::sin(v[1]) + v[0] * v[0] * v[2] + 0.5 * v[2];
  };
  std::vector<double> x0 = {0.4, -0.7, 1.2};
  Jet X = Jet::variable(0, x0[0], 3, 2);
  Jet Y = Jet::variable(1, x0[1], 3, 2);
  Jet Z = Jet::variable(2, x0[2], 3, 2);
  Jet F = jet_exp(cplx(0.3) * X) * jet_sin(Y) + X * X * Z + cplx(0.5) * Z;
  for (int i = 0; i < 3; ++i) {
    std::array<int, 3> e{0, 0, 0};
    e[i] = 1;
    double want = fd1(f, x0, i);
    CHECK(std::abs(F.coeff({e[0], e[1], e[2]}).real() - want) < 1e-6 * std::max(1.0, std::abs(want)));
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      std::array<int, 3> e{0, 0, 0};
      e[i] += 1;
      e[j] += 1;
      double coeff_to_deriv = (i == j) ? 2.0 : 1.0;  // Taylor coeff -> derivative
      double want = fd2(f, x0, i, j);
      double got = F.coeff({e[0], e[1], e[2]}).real() * coeff_to_deriv;
      CHECK(std::abs(got - want) < 1e-5 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("inverse and division") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  Jet a(2, 4);
  for (int k = 0; k < a.size(); ++k) a[k] = cplx(u(rng), u(rng));
  a[0] = cplx(2.0, 0.3);
  Jet inv = a.inverse();
  Jet prod = a * inv;
  prod -= cplx(1.0);
  CHECK(prod.max_abs() < 1e-14);
  CHECK_THROWS_AS(Jet::constant(0.0, 2, 2).inverse(), std::domain_error);
}

TEST_CASE("derivative and lift") {
  Jet x = Jet::variable(0, 1.0, 2, 3);
  Jet y = Jet::variable(1, 2.0, 2, 3);
  Jet f = x * x * y;   // f_x = 2xy, f_xy = 2x
  Jet fx = f.derivative(0);
  CHECK(std::abs(fx.value() - cplx(4.0)) < 1e-14);
  CHECK(std::abs(fx.coeff({0, 1}) - cplx(2.0)) < 1e-14);

  Jet lifted = f.lifted(4, {1, 3}, 3);
  CHECK(lifted.dim() == 4);
  CHECK(std::abs(lifted.coeff({0, 2, 0, 1}) - f.coeff({2, 1})) < 1e-15);
}
