#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "crfeff/gallery.hpp"
#include "crfeff/sampling.hpp"
#include "crfeff/webster.hpp"

using namespace crfeff;

TEST_CASE("gallery names resolve") {
  for (const auto& n : gallery::names()) {
    CRGeometry g = gallery::by_name(n);
    CHECK(g.m >= 1);
    CHECK(g.dim() == 2 * g.m + 1);
    CHECK(g.name == n);
  }
  CHECK_THROWS_AS(gallery::by_name("nope"), std::invalid_argument);
  CHECK_THROWS_AS(gallery::heisenberg(3), std::invalid_argument);
}

TEST_CASE("geometry files round trip") {
  for (const auto& n : gallery::names()) {
    CRGeometry g = gallery::by_name(n);
    std::string text = serialize_geometry(g);
    CRGeometry g2 = load_geometry(text);
    CHECK(g2.m == g.m);
    CHECK(expr_equal(g2.theta_expr, g.theta_expr));
    for (int a = 0; a < g.m; ++a)
      CHECK(expr_equal(g2.theta_alpha_expr[a], g.theta_alpha_expr[a]));
    CHECK(g2.vol_factor == g.vol_factor);
    CHECK(g2.perturbation.xi_alpha.size() == g.perturbation.xi_alpha.size());
    // and a second serialization is a fixed point
    CHECK(serialize_geometry(g2) == text);
    // solved data agrees at a point
    Point p(g.dim(), 0.0);
    p[1] = 1.1;
    SolvedGeometry s1 = solve_webster(g, p, 1);
    SolvedGeometry s2 = solve_webster(g2, p, 1);
    double e = 0.0;
    for (size_t i = 0; i < s1.Gamma.size(); ++i)
      e = std::max(e, (s1.Gamma[i] - s2.Gamma[i]).max_abs());
    CHECK(e < 1e-14);
  }
}

TEST_CASE("the named subexpression survives export") {
  std::string text = serialize_geometry(gallery::nurowski_przanowski());
  CHECK(text.find("[let]") != std::string::npos);
  CHECK(text.find("f =") != std::string::npos);
  CHECK(text.find("f^") != std::string::npos);  // coframe refers to f by name
}

TEST_CASE("domain sampling respects f > 0") {
  CRGeometry np = gallery::nurowski_przanowski();
  Halton sampler(np.chart.box, 9);
  for (int i = 0; i < 100; ++i) {
    Point p = sampler.next_admissible([&](const Point& q) { return np.admissible(q); });
    Jet f = np.eval_scalar(np.lets.at("f"), p, 1);
    CHECK(f.value().real() > 0.0);
  }
  // non-involutivity margin over the shipped box: ||N||^2 = 4 f^{-3/2} with
  // f <= 4 (2*2) = 16 on the box, so ||N||^2 >= 4 * 16^{-3/2} = 1/16 > 0.001.
  Point corner = {1.0, 2.0, 0.5, 0.0, 0.0};
  auto o = gallery::np_oracle(np, corner);
  CHECK(o.n_norm2 > 0.001);
}

TEST_CASE("bad gallery edits are rejected") {
  CRGeometry g = gallery::heisenberg(1);
  std::string text = serialize_geometry(g);
  // corrupt the coframe: drop the theta1 line
  auto pos = text.find("theta1");
  std::string broken = text.substr(0, pos);
  CHECK_THROWS(load_geometry(broken));
}
