#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "crfeff/forms.hpp"
#include "crfeff/gallery.hpp"
#include "crfeff/webster.hpp"

using namespace crfeff;

namespace {

FormValue random_form(int dim, int degree, int order, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  FormValue f(dim, degree, dim, order);
  for (int k = 0; k < f.size(); ++k) {
    Jet j(dim, order);
    for (int c = 0; c < j.size(); ++c) j[c] = cplx(u(rng), u(rng));
    f[k] = j;
  }
  return f;
}

}  // namespace

TEST_CASE("wedge basics") {
  int dim = 3, order = 2;
  std::vector<Jet> dx(dim, Jet(dim, order)), dy(dim, Jet(dim, order));
  dx[0] = Jet::constant(1.0, dim, order);
  dy[1] = Jet::constant(1.0, dim, order);
  FormValue a = one_form(dx), b = one_form(dy);
  CHECK(wedge(a, a).max_abs() == 0.0);
  FormValue ab = wedge(a, b), ba = wedge(b, a);
  CHECK((ab + ba).max_abs() == 0.0);
  CHECK(std::abs(ab[0].value() - cplx(1.0)) < 1e-15);
}

TEST_CASE("d(x dy) = dx ^ dy") {
  int dim = 2, order = 2;
  Jet x = Jet::variable(0, 0.7, dim, order);
  std::vector<Jet> comps(dim, Jet(dim, order));
  comps[1] = x;  // x dy
  FormValue f = one_form(comps);
  FormValue df = exterior_derivative(f);
  CHECK(std::abs(df[0].value() - cplx(1.0)) < 1e-15);
}

TEST_CASE("d o d = 0 and Leibniz on random fields") {
  std::mt19937 rng(23);
  int dim = 4, order = 4;
  for (int it = 0; it < 8; ++it) {
    FormValue a = random_form(dim, 1, order, rng);
    FormValue da = exterior_derivative(a);
    FormValue dda = exterior_derivative(da);
    CHECK(dda.max_abs() < 1e-12 * std::max(1.0, a.max_abs()));

    FormValue b = random_form(dim, 2, order, rng);
    FormValue lhs = exterior_derivative(wedge(a, b));
    FormValue rhs = wedge(da, b) - wedge(a, exterior_derivative(b));
    CHECK((lhs - rhs).max_abs() < 1e-11);
  }
}

TEST_CASE("interior product and contraction") {
  std::mt19937 rng(29);
  int dim = 4, order = 1;
  FormValue f = random_form(dim, 2, order, rng);
  std::vector<Jet> v(dim), w(dim);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < dim; ++i) {
    v[i] = Jet::constant(cplx(u(rng), 0), dim, order);
    w[i] = Jet::constant(cplx(u(rng), 0), dim, order);
  }
  // antisymmetry: F(v,w) = -F(w,v)
  Jet a = contract(f, {v, w});
  Jet b = contract(f, {w, v});
  CHECK((a + b).max_abs() < 1e-13);
  // bilinear expansion against raw components
  cplx acc = 0.0;
  const FormSpace& sp = f.space();
  for (int k = 0; k < f.size(); ++k) {
    int i = sp.tuple(k)[0], j = sp.tuple(k)[1];
    acc += f[k].value() * (v[i].value() * w[j].value() - v[j].value() * w[i].value());
  }
  CHECK(std::abs(a.value() - acc) < 1e-13);
}

TEST_CASE("dual frame of the gallery coframes") {
  // Heisenberg m=1: Reeb field is d/du.
  CRGeometry heis = gallery::heisenberg(1);
  Point p = {0.3, 0.2, -0.4};
  SolvedGeometry sg = solve_webster(heis, p, 1);
  CHECK(std::abs(sg.frame(0, 0).value() - cplx(1.0)) < 1e-12);
  CHECK(std::abs(sg.frame(0, 1).value()) < 1e-12);
  CHECK(std::abs(sg.frame(0, 2).value()) < 1e-12);

  // Nurowski-Przanowski coframe: pairing matrix is the identity.
  CRGeometry np = gallery::nurowski_przanowski();
  Point p0 = {0.0, 1.0, 0.0, 0.0, 0.0};
  SolvedGeometry sn = solve_webster(np, p0, 1);
  for (int I = 0; I < 5; ++I)
    for (int J = 0; J < 5; ++J) {
      Jet acc(5, 1);
      for (int i = 0; i < 5; ++i) acc += sn.coframe(I, i) * sn.frame(J, i);
      CHECK(std::abs(acc.value() - (I == J ? cplx(1) : cplx(0))) < 1e-10);
    }
  // Reeb conditions: theta(l) = 1, dtheta(l, .) = 0.
  std::vector<Jet> ell(5);
  for (int i = 0; i < 5; ++i) ell[i] = sn.frame(0, i);
  FormValue it = interior(ell, sn.dtheta);
  CHECK(it.max_abs() < 1e-9);
}

TEST_CASE("coframe expansion of dtheta gives the unit Levi form") {
  CRGeometry np = gallery::nurowski_przanowski();
  Point p0 = {0.0, 1.0, 0.0, 0.0, 0.0};
  SolvedGeometry sg = solve_webster(np, p0, 1);
  // h = identity
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      CHECK(std::abs(sg.h(a, b).value() - (a == b ? cplx(1) : cplx(0))) < 1e-10);

  // d(dtheta) = 0
  std::vector<Jet> th = np.theta(p0, 3);
  FormValue dth = exterior_derivative(one_form(th));
  CHECK(exterior_derivative(dth).max_abs() < 1e-10);

  // contact condition theta ^ (dtheta)^m nonzero
  FormValue top = wedge(one_form(np.theta(p0, 2)), sg.dtheta);
  top = wedge(top, sg.dtheta);
  CHECK(top.max_abs() > 0.1);
}

TEST_CASE("expansion coefficients of dtheta1 match the closed form") {
  // dtheta^1 = f^{-3/4} (-1/2 th1^th2 - 1/2 th1^bth1 + 1/2 th1^bth2 + bth1^bth2)
  CRGeometry np = gallery::nurowski_przanowski();
  Point p0 = {0.0, 1.0, 0.0, 0.0, 0.0};
  SolvedGeometry sg = solve_webster(np, p0, 2);
  double c = std::pow(8.0, -0.75);
  auto fv = [&](int I) {
    std::vector<Jet> v(5);
    for (int i = 0; i < 5; ++i) v[i] = sg.frame(I, i);
    return v;
  };
  auto coef = [&](int I, int J) {
    return contract(sg.dtheta_alpha[0], {fv(I), fv(J)}).value();
  };
  CHECK(std::abs(coef(1, 2) - cplx(-0.5 * c)) < 1e-9);   // th1 ^ th2
  CHECK(std::abs(coef(1, 3) - cplx(-0.5 * c)) < 1e-9);   // th1 ^ bth1
  CHECK(std::abs(coef(1, 4) - cplx(0.5 * c)) < 1e-9);    // th1 ^ bth2
  CHECK(std::abs(coef(3, 4) - cplx(c)) < 1e-9);          // bth1 ^ bth2
  CHECK(std::abs(coef(0, 1)) < 1e-9);
  CHECK(std::abs(coef(2, 3)) < 1e-9);
  CHECK(std::abs(coef(2, 4)) < 1e-9);

  // reassembly: sum of coefficient * basis two-form reproduces dtheta1
  FormValue recon(5, 2, 5, sg.order);
  for (int I = 0; I < 5; ++I)
    for (int J = I + 1; J < 5; ++J) {
      std::vector<Jet> rI(5), rJ(5);
      for (int i = 0; i < 5; ++i) {
        rI[i] = sg.coframe(I, i);
        rJ[i] = sg.coframe(J, i);
      }
      Jet cij = contract(sg.dtheta_alpha[0], {fv(I), fv(J)});
      recon += cij * wedge(one_form(rI), one_form(rJ));
    }
  FormValue diff = recon - sg.dtheta_alpha[0];
  CHECK(diff.max_abs() < 1e-9);
}
