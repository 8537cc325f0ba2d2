#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "crfeff/gallery.hpp"
#include "crfeff/lorentz.hpp"

using namespace crfeff;

namespace {

MetricField minkowski(int D) {
  MetricField mf;
  mf.dim = D;
  mf.eval = [D](const Point& p, int order) {
    (void)p;
    JetMat g(D, D, D, order);
    for (int i = 0; i < D; ++i)
      g(i, i) = Jet::constant(i == D - 1 ? -1.0 : 1.0, D, order);
    return g;
  };
  return mf;
}

// g = e^{2 x0} eta
MetricField conformally_flat(int D) {
  MetricField mf;
  mf.dim = D;
  mf.eval = [D](const Point& p, int order) {
    Jet x0 = Jet::variable(0, p[0], D, order);
    Jet w = jet_exp(cplx(2.0) * x0);
    JetMat g(D, D, D, order);
    for (int i = 0; i < D; ++i) g(i, i) = (i == D - 1 ? cplx(-1.0) : cplx(1.0)) * w;
    return g;
  };
  return mf;
}

}  // namespace

TEST_CASE("flat Minkowski block") {
  LorentzCurvature lc = full_curvature(minkowski(4), {0.1, 0.2, 0.3, 0.4}, 3);
  double z = 0.0;
  for (const auto& j : lc.christ) z = std::max(z, j.max_abs());
  for (const auto& j : lc.riem) z = std::max(z, j.max_abs());
  CHECK(z == 0.0);
  CHECK(lc.signature() == std::pair<int, int>(3, 1));
}

TEST_CASE("conformally flat metric against the hand formulas") {
  int D = 4;
  Point p = {0.3, -0.1, 0.2, 0.05};
  LorentzCurvature lc = full_curvature(conformally_flat(D), p, 3);

  // Gamma^a_{bc} = delta^a_b U_c + delta^a_c U_b - eta_{bc} eta^{ad} U_d, U = dx0
  auto eta = [D](int a) { return a == D - 1 ? -1.0 : 1.0; };
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c) {
        double want = (a == b && c == 0 ? 1.0 : 0.0) + (a == c && b == 0 ? 1.0 : 0.0) -
                      (b == c ? eta(b) * (a == 0 ? eta(0) : 0.0) : 0.0);
        CHECK(std::abs(lc.G(a, b, c).value().real() - want) < 1e-11);
      }

  // Ric_{ab} = (D-2)(U_a U_b - eta_{ab}), Sc = -6 e^{-2 x0}  (hand-derived)
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      double want = 2.0 * ((a == 0 && b == 0 ? 1.0 : 0.0) - (a == b ? eta(a) : 0.0));
      CHECK(std::abs(lc.Ric(a, b).value().real() - want) < 1e-10);
    }
  CHECK(std::abs(lc.sc.value().real() - (-6.0 * std::exp(-2 * p[0]))) < 1e-10);

  CHECK(lc.riemann_symmetry_residual() < 1e-10);
  CHECK(lc.metricity_residual() < 1e-11);
  // conformally flat: Weyl = 0
  double w = 0.0;
  for (const auto& j : lc.weyl) w = std::max(w, std::abs(j.value()));
  CHECK(w < 1e-9);
}

TEST_CASE("Fefferman metric of the Heisenberg group") {
  FeffermanMetric fm(gallery::heisenberg(2), 1.0, CRData{});
  MetricField mf = fm.field();
  Point bp = {0.1, 0.2, -0.1, 0.05, 0.15, 0.4};

  LorentzCurvature lc = full_curvature(mf, bp, 3);
  CHECK(lc.metricity_residual() < 1e-9);
  CHECK(lc.riemann_symmetry_residual() < 1e-8);
  CHECK(lc.weyl_trace_residual() < 1e-8);
  CHECK(lc.signature() == std::pair<int, int>(5, 1));

  // canonical null field k = d/dphi: kappa = 2 theta, null, Killing
  int D = 6;
  std::vector<double> k(D, 0.0);
  k[D - 1] = 1.0;
  CHECK(std::abs(lc.g(D - 1, D - 1).value()) < 1e-12);
  // Killing: metric has no phi dependence
  double kill = 0.0;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) kill = std::max(kill, std::abs(lc.g(i, j).derivative(D - 1).value()));
  CHECK(kill < 1e-10);

  // Rho(k,k) = 1 for the non-expanding class
  cplx rkk = 0.0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) rkk += lc.Rho(a, b).value() * k[a] * k[b];
  CHECK(std::abs(rkk - cplx(1.0)) < 1e-7);

  // CR-flat base, Lambda = 0: the Fefferman space is conformally flat
  double w = 0.0;
  for (const auto& j : lc.weyl) w = std::max(w, std::abs(j.value()));
  CHECK(w < 1e-7);

  OpticalDiagnostics od = optical_diagnostics(lc, k);
  CHECK(od.is_null);
  CHECK(od.geodesic_residual < 1e-8);
  CHECK(od.shear < 1e-8);
  CHECK(std::abs(od.expansion) < 1e-8);
  CHECK(od.twist > 0.1);
  CHECK(od.ckf_residual < 1e-8);
}

TEST_CASE("Minkowski parallel null field") {
  LorentzCurvature lc = full_curvature(minkowski(4), {0, 0, 0, 0}, 2);
  std::vector<double> k = {1.0, 0.0, 0.0, 1.0};
  OpticalDiagnostics od = optical_diagnostics(lc, k);
  CHECK(od.is_null);
  CHECK(od.geodesic_residual < 1e-12);
  CHECK(od.shear < 1e-12);
  CHECK(od.twist < 1e-12);
}

TEST_CASE("Weyl norm identity on the Nurowski-Przanowski Fefferman space") {
  CRGeometry np = gallery::nurowski_przanowski();
  FeffermanMetric fm(np, 1.0, CRData{});
  MetricField mf = fm.field();
  int D = 6;
  for (Point bp : {Point{0.0, 1.0, 0.0, 0.0, 0.0, 0.0},
                   Point{0.2, 1.3, 0.2, -0.1, 0.1, 1.1},
                   Point{-0.4, 1.7, -0.3, 0.15, 0.2, -2.0}}) {
    LorentzCurvature lc = full_curvature(mf, bp, 2);
    std::vector<double> k(D, 0.0);
    k[D - 1] = 1.0;
    // ||W(k)||^2 = k^a W_{abcd} k^e W_e^{bcd}
    cplx acc = 0.0;
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        for (int d = 0; d < D; ++d) {
          cplx x = lc.W(D - 1, b, c, d).value();
          for (int b2 = 0; b2 < D; ++b2)
            for (int c2 = 0; c2 < D; ++c2)
              for (int d2 = 0; d2 < D; ++d2)
                acc += x * lc.ginv(b, b2).value() * lc.ginv(c, c2).value() *
                       lc.ginv(d, d2).value() * lc.W(D - 1, b2, c2, d2).value();
        }
    Point base(bp.begin(), bp.end() - 1);
    auto tw = fm.tower(base, 2);
    double want = 8.0 * tw->wc.n_norm2.value().real();
    CHECK(std::abs(acc.real() - want) < 1e-6 * std::max(1.0, want));
    CHECK(std::abs(acc.imag()) < 1e-9);
    // spot value at p0: 8 * 4 * 8^{-3/2} = 1.4142136
    if (bp[1] == 1.0 && bp[0] == 0.0)
      CHECK(std::abs(acc.real() - 1.4142136) < 1e-6);
  }
}

TEST_CASE("conformal transformation laws") {
  FeffermanMetric fm(gallery::heisenberg(1), 1.0, CRData{});
  MetricField mf = fm.field();
  int D = 4;
  ScalarFieldFn omega = [D](const Point& p, int order) {
    Jet x = Jet::variable(1, p[1], D, order);
    Jet u = Jet::variable(0, p[0], D, order);
    return jet_exp(cplx(0.1) * x + cplx(0.05) * u * x);
  };
  Point bp = {0.2, 0.3, -0.1, 0.5};
  ConformalCheck cc = conformal_rescale_check(mf, omega, bp, 4);
  CHECK(cc.rho_law < 1e-7);
  CHECK(cc.cotton_law < 1e-6);
  CHECK(cc.weyl_invariance < 1e-7);

  // constant rescaling: Schouten unchanged
  ScalarFieldFn omega2 = [D](const Point&, int order) {
    return Jet::constant(2.0, D, order);
  };
  ConformalCheck c2 = conformal_rescale_check(mf, omega2, bp, 3);
  CHECK(c2.rho_law < 1e-9);
  CHECK(c2.weyl_invariance < 1e-9);
}

TEST_CASE("contracted Bianchi identity") {
  FeffermanMetric fm(gallery::heisenberg(1), 1.0, CRData{});
  LorentzCurvature lc = full_curvature(fm.field(), {0.15, 0.2, 0.3, -0.7}, 3);
  CHECK(contracted_bianchi_residual(lc) < 1e-6);

  FeffermanMetric f2(gallery::nurowski_przanowski(), 1.0, CRData{});
  LorentzCurvature l2 = full_curvature(f2.field(), {0.0, 1.0, 0.0, 0.0, 0.0, 0.3}, 3);
  CHECK(contracted_bianchi_residual(l2) < 1e-5);
}
