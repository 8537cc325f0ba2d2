#include "crfeff/suites.hpp"

#include "crfeff/sampling.hpp"

#include <random>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace crfeff {

namespace {

/// Residual aggregation: max over points, remembering the worst point.
struct Agg {
  double v = -1e300;
  Point worst;
  void feed(double x, const Point& p) {
    if (x > v) {
      v = x;
      worst = p;
    }
  }
  double value() const { return v <= -1e299 ? 0.0 : v; }
};

/// Min-aggregation for lower-bound conditions.
struct MinAgg {
  double v = 1e300;
  Point worst;
  void feed(double x, const Point& p) {
    if (x < v) {
      v = x;
      worst = p;
    }
  }
};

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  int nw = std::min(workers, n);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

double tol_of(const RunConfig& cfg, const std::string& suite, double fallback) {
  auto it = cfg.tol.find(suite);
  return it != cfg.tol.end() ? it->second : fallback;
}

/// Resolve the Webster data order from the --order override (which counts
/// coframe evaluation orders, data order + 1).  Fails fast when the budget
/// is below the suite's structural minimum.
int data_order(const RunConfig& cfg, int fallback, int minimum, const char* suite) {
  if (cfg.order == 0) return fallback;
  int order = cfg.order - 1;
  if (order < minimum)
    throw std::domain_error(std::string("order budget exceeded: suite '") + suite +
                            "' needs coframe order >= " + std::to_string(minimum + 1) +
                            ", got " + std::to_string(cfg.order));
  return order;
}

bool is_np_base(const CRGeometry& g) {
  return g.name == "nurowski-przanowski" || g.name == "np-einstein-fefferman";
}
bool is_flat_base(const CRGeometry& g) {
  return g.name.rfind("heisenberg", 0) == 0;
}

ExprPtr seeded_upsilon(std::uint64_t seed) {
  std::mt19937 rng(static_cast<unsigned>(seed * 2654435761u + 17));
  std::uniform_real_distribution<double> u(-0.12, 0.12);
  std::ostringstream os;
  os << u(rng) << " + " << u(rng) << "*x1 + " << u(rng) << "*u*y1 + " << u(rng)
     << "*x1*x1";
  return parse_expr(os.str());
}

std::vector<Point> sample_base(const CRGeometry& g, int n, std::uint64_t seed,
                               std::uint64_t* rejections) {
  Halton sampler(g.chart.box, seed);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i)
    pts.push_back(sampler.next_admissible([&](const Point& p) { return g.admissible(p); }));
  if (rejections) *rejections += sampler.rejections();
  return pts;
}

std::vector<Point> sample_bundle(const CRGeometry& g, int n, std::uint64_t seed,
                                 std::uint64_t* rejections, double min_cos = 0.0) {
  auto box = g.chart.box;
  box.push_back({-3.14159265358979323846, 3.14159265358979323846});
  Halton sampler(box, seed);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i)
    pts.push_back(sampler.next_admissible([&](const Point& p) {
      if (min_cos > 0 && std::abs(std::cos(p.back())) < min_cos) return false;
      Point base(p.begin(), p.end() - 1);
      return g.admissible(base);
    }));
  if (rejections) *rejections += sampler.rejections();
  return pts;
}

std::vector<double> fibre_vector(int D) {
  std::vector<double> k(D, 0.0);
  k[D - 1] = 1.0;
  return k;
}

// ---------------------------------------------------------------- webster

void webster_suite(const CRGeometry& g, const RunConfig& cfg,
                   std::vector<ReportEntry>& out, std::uint64_t* rejections) {
  const std::string S = "webster";
  double t_alg = tol_of(cfg, S, 1e-8);
  int so = data_order(cfg, 3, 2, "webster");
  if (so < 2) throw std::domain_error("order budget exceeded: webster suite needs coframe order >= 3");
  std::vector<Point> pts = sample_base(g, cfg.points, cfg.seed, rejections);
  int n = static_cast<int>(pts.size());

  struct Cell {
    double structure = 0, adapted = 0, ddform = 0, leibniz = 0, com1 = 0, com3 = 0;
    double volnorm = 0, transform = 0;
    double oracle = 0;
  };
  std::vector<Cell> cells(n);
  ExprPtr ups = seeded_upsilon(cfg.seed);
  ExprPtr testf = parse_expr("exp(0.3*x1)*y1 + u*u + 0.4*x1*y1");

  parallel_for(n, cfg.workers, [&](int i) {
    const Point& p = pts[i];
    Cell& c = cells[i];
    SolvedGeometry sg = solve_webster(g, p, so);
    c.structure = sg.solve_residual;
    c.adapted = sg.adapted_residual;

    // d o d = 0 on the contact form and the coframe
    {
      std::vector<Jet> th = g.theta(p, 3);
      c.ddform = exterior_derivative(exterior_derivative(one_form(th))).max_abs();
      for (int a = 0; a < g.m; ++a) {
        std::vector<Jet> ta = g.theta_alpha[a](p, 3);
        c.ddform = std::max(
            c.ddform, exterior_derivative(exterior_derivative(one_form(ta))).max_abs());
      }
      // Leibniz on theta ^ theta^1
      FormValue a = one_form(th);
      FormValue b = one_form(g.theta_alpha[0](p, 3));
      FormValue lhs = exterior_derivative(wedge(a, b));
      FormValue rhs = wedge(exterior_derivative(a), b) - wedge(a, exterior_derivative(b));
      c.leibniz = (lhs - rhs).max_abs();
    }

    // commutation relations at weight (0,0)
    {
      int m = g.m, dim = g.dim();
      Jet fj = g.eval_scalar(testf, p, 4);
      FrameTensor DF(m, 1, dim, 3);
      for (int I = 0; I < 2 * m + 1; ++I) DF.at({I}) = sg.frame_deriv(I, fj);
      FrameTensor DDF = covariant_derivative(sg, DF);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          Jet r1 = DDF.at({1 + a, m + 1 + b}) - DDF.at({m + 1 + b, 1 + a}) +
                   cplx(0, 1) * sg.h(a, b) * DF.at({0});
          c.com1 = std::max(c.com1, std::abs(r1.value()));
          Jet r3 = DDF.at({1 + a, 1 + b}) - DDF.at({1 + b, 1 + a});
          for (int d = 0; d < m; ++d)
            for (int g2 = 0; g2 < m; ++g2)
              r3 -= sg.n_lo(a, b, d) * sg.hup(d, g2) * DF.at({m + 1 + g2});
          c.com3 = std::max(c.com3, std::abs(r3.value()));
        }
    }

    c.volnorm = volume_normalization_residual(sg, g.vol_factor);
    c.transform = transform_contact(g, ups, p, 2).max_err();

    // closed-form oracles for the gallery bases
    if (is_np_base(g)) {
      auto o = gallery::np_oracle(g, p);
      WebsterCurvature wc = webster_curvature(sg);
      double e = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          e = std::max(e, std::abs(sg.a_lo(a, b).value()));
          cplx ric_want = (a == b) ? cplx(o.ric) : cplx(0);
          e = std::max(e, std::abs(wc.ric(a, b).value() - ric_want) / o.ric);
        }
      e = std::max(e, std::abs(sg.n_lo(0, 1, 0).value() - cplx(o.n121)) / std::abs(o.n121));
      e = std::max(e, std::abs(sg.n_lo(0, 1, 1).value() - cplx(o.n121)) / std::abs(o.n121));
      double signs[5] = {0.0, 1.0, -1.0, -1.0, 1.0};
      for (int I = 0; I < 5; ++I)
        for (int d = 0; d < 2; ++d)
          e = std::max(e, std::abs(sg.gamma(I, d, d).value() - cplx(signs[I] * o.gamma_c)) /
                              o.gamma_c);
      e = std::max(e, std::abs(wc.sc.value() - cplx(o.sc)) / o.sc);
      e = std::max(e, std::abs(wc.n_norm2.value() - cplx(o.n_norm2)) / o.n_norm2);
      for (const auto& j : wc.dbar_n) e = std::max(e, std::abs(j.value()));
      for (const auto& j : wc.div_n) e = std::max(e, std::abs(j.value()));
      c.oracle = e;
    } else if (is_flat_base(g)) {
      double e = 0.0;
      for (const auto& j : sg.Gamma) e = std::max(e, std::abs(j.value()));
      for (const auto& j : sg.A) e = std::max(e, std::abs(j.value()));
      for (const auto& j : sg.N) e = std::max(e, std::abs(j.value()));
      WebsterCurvature wc = webster_curvature(sg);
      e = std::max(e, std::abs(wc.sc.value()));
      for (const auto& j : wc.chern_moser) e = std::max(e, std::abs(j.value()));
      c.oracle = e;
    }
  });

  Agg structure, adapted, ddform, leibniz, com1, com3, volnorm, transform, oracle;
  for (int i = 0; i < n; ++i) {
    structure.feed(cells[i].structure, pts[i]);
    adapted.feed(cells[i].adapted, pts[i]);
    ddform.feed(cells[i].ddform, pts[i]);
    leibniz.feed(cells[i].leibniz, pts[i]);
    com1.feed(cells[i].com1, pts[i]);
    com3.feed(cells[i].com3, pts[i]);
    volnorm.feed(cells[i].volnorm, pts[i]);
    transform.feed(cells[i].transform, pts[i]);
    oracle.feed(cells[i].oracle, pts[i]);
  }
  out.push_back(ReportEntry::residual(S, "structure_residual", structure.value(), 1e-9, structure.worst));
  out.push_back(ReportEntry::residual(S, "adaptedness", adapted.value(), t_alg, adapted.worst));
  out.push_back(ReportEntry::residual(S, "dd_zero", ddform.value(), t_alg, ddform.worst));
  out.push_back(ReportEntry::residual(S, "leibniz", leibniz.value(), t_alg, leibniz.worst));
  out.push_back(ReportEntry::residual(S, "commutator_mixed", com1.value(), 1e-7, com1.worst));
  out.push_back(ReportEntry::residual(S, "commutator_holomorphic", com3.value(), 1e-7, com3.worst));
  out.push_back(ReportEntry::residual(S, "volume_normalization", volnorm.value(), t_alg, volnorm.worst));
  out.push_back(ReportEntry::residual(S, "transformation_laws", transform.value(), 1e-6, transform.worst));
  if (is_np_base(g) || is_flat_base(g))
    out.push_back(ReportEntry::residual(S, "closed_form_oracles", oracle.value(), 1e-7, oracle.worst));
}

// ------------------------------------------------------------- cr-einstein

void creinstein_suite(const CRGeometry& g, const RunConfig& cfg,
                      std::vector<ReportEntry>& out, std::uint64_t* rejections) {
  const std::string S = "cr-einstein";
  double t = tol_of(cfg, S, 1e-7);
  int so = data_order(cfg, 3, 2, "cr-einstein");
  std::vector<Point> pts = sample_base(g, cfg.points, cfg.seed + 1, rejections);
  int n = static_cast<int>(pts.size());

  struct Cell {
    double rA = 0, rDN = 0, rRho = 0, lam = 0, sc1 = 0;
    std::map<std::string, double> sigma_hol;
    double np_obstruction = -1.0;
  };
  std::vector<Cell> cells(n);

  parallel_for(n, cfg.workers, [&](int i) {
    const Point& p = pts[i];
    Cell& c = cells[i];
    SolvedGeometry sg = solve_webster(g, p, so);
    WebsterCurvature wc = webster_curvature(sg);
    CREinsteinResiduals r = cr_einstein_tensor_residuals(sg, wc);
    c.rA = r.r_A;
    c.rDN = r.r_DN;
    c.rRho = std::max(r.r_Rho, r.r_alt);
    c.lam = r.lambda;
    // scale form at s = 1 must match the tensor form
    CRScaleResiduals s1 = cr_scale_residuals(sg, wc, g, nullptr);
    c.sc1 = std::abs(s1.r_a - r.r_A) + std::abs(s1.r_rho - r.r_Rho);
    // declared CR scales are verified against the invariant scale system
    for (const auto& [name, factor] : g.cr_scales) {
      CRScaleResiduals cs = cr_scale_residuals(sg, wc, g, factor);
      c.sigma_hol["cr_scale:" + name] = cs.max();
    }
    // declared CR-density candidates
    for (const auto& [name, factor] : g.sigma_scales) {
      DensityResiduals dr = density_residuals(sg, wc, g, factor);
      c.sigma_hol[name] = dr.r_hol;
      if (is_np_base(g)) {
        double want = 2.0 * std::pow(gallery::np_oracle(g, p).f, -1.5);
        c.np_obstruction = std::abs(dr.r_n2 - want) / want;
      }
    }
    if (is_flat_base(g)) {
      DensityResiduals dr = density_residuals(sg, wc, g, nullptr);
      c.sigma_hol["reference"] = dr.max();
    }
  });

  Agg rA, rDN, rRho, lamdev, sc1, obstruction;
  std::map<std::string, Agg> hol;
  for (int i = 0; i < n; ++i) {
    rA.feed(cells[i].rA, pts[i]);
    rDN.feed(cells[i].rDN, pts[i]);
    rRho.feed(cells[i].rRho, pts[i]);
    lamdev.feed(std::abs(cells[i].lam - cells[0].lam), pts[i]);
    sc1.feed(cells[i].sc1, pts[i]);
    for (const auto& [k, v] : cells[i].sigma_hol) hol[k].feed(v, pts[i]);
    if (cells[i].np_obstruction >= 0) obstruction.feed(cells[i].np_obstruction, pts[i]);
  }
  out.push_back(ReportEntry::residual(S, "torsion", rA.value(), t, rA.worst));
  out.push_back(ReportEntry::residual(S, "nijenhuis_divergence", rDN.value(), t, rDN.worst));
  out.push_back(ReportEntry::residual(S, "schouten_block", rRho.value(), t, rRho.worst));
  out.push_back(ReportEntry::residual(S, "lambda_constancy", lamdev.value(), 1e-8, lamdev.worst));
  if (is_np_base(g) || is_flat_base(g)) {
    double l0 = cells.empty() ? 0.0 : cells[0].lam;
    out.push_back(ReportEntry::residual(S, "lambda_value", std::abs(l0), 1e-8, pts[0]));
  }
  out.push_back(ReportEntry::residual(S, "scale_form_reduction", sc1.value(), 1e-8, sc1.worst));
  for (auto& [k, a] : hol) {
    std::string label = k.rfind("cr_scale:", 0) == 0 ? k : "density_holomorphy:" + k;
    out.push_back(ReportEntry::residual(S, label, a.value(), k.rfind("cr_scale:", 0) == 0 ? t : 1e-8, a.worst));
  }
  if (is_np_base(g) && obstruction.v > -1e299)
    out.push_back(ReportEntry::residual(S, "density_obstruction_value", obstruction.value(),
                                        1e-5, obstruction.worst));
}

// --------------------------------------------------------------- fefferman

void fefferman_suite(const CRGeometry& g, const RunConfig& cfg,
                     std::vector<ReportEntry>& out, std::uint64_t* rejections) {
  const std::string S = "fefferman";
  double t_curv = tol_of(cfg, S, 1e-6);
  (void)data_order(cfg, 4, 4, "fefferman");  // structural: metric order 3
  std::vector<Point> pts = sample_bundle(g, cfg.points, cfg.seed + 2, rejections);
  int n = static_cast<int>(pts.size());
  int D = g.dim() + 1;
  std::vector<double> kf = fibre_vector(D);

  CRData data = bind_cr_data(g);
  bool has_pert = !data.empty();

  struct Cell {
    double killing = 0, metricity = 0, riem_sym = 0, weyl_trace = 0, signature = 0;
    double wnorm_id = 0, geodesic = 0, shear = 0, ckf = 0, covariance = 0;
    double rho_law = 0, cotton_law = 0, weyl_inv = 0, bianchi = 0, pert_real = 0;
    double twist = 1e300;
  };
  std::vector<Cell> cells(n);
  ExprPtr ups = seeded_upsilon(cfg.seed + 3);

  // Fefferman metrics for the Killing sweep and the full battery.
  std::vector<FeffermanMetric> sweep;
  for (double alpha : {0.0, 1.0, 2.0}) sweep.emplace_back(g, alpha, CRData{});
  FeffermanMetric main_fm(g, has_pert ? g.perturbation.alpha : 1.0, data);
  CRGeometry resc = rescale_contact(g, ups);
  FeffermanMetric resc_fm(resc, 1.0, CRData{});

  parallel_for(n, cfg.workers, [&](int i) {
    const Point& bp = pts[i];
    Cell& c = cells[i];
    Point base(bp.begin(), bp.end() - 1);

    for (auto& fm : sweep) {
      JetMat gm = fm.eval(bp, 1);
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
          c.killing = std::max(c.killing, std::abs(gm(a, b).derivative(D - 1).value()));
    }
    if (has_pert) {
      JetMat gm = main_fm.eval(bp, 1);
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
          c.pert_real = std::max(c.pert_real, std::abs(gm(a, b).imag().value()));
    }

    MetricField mf = main_fm.field();
    LorentzCurvature lc = full_curvature(mf, bp, 3);
    c.metricity = lc.metricity_residual();
    c.riem_sym = lc.riemann_symmetry_residual();
    c.weyl_trace = lc.weyl_trace_residual();
    auto sig = lc.signature();
    c.signature = std::abs(sig.first - (D - 1)) + std::abs(sig.second - 1);
    c.bianchi = contracted_bianchi_residual(lc);

    // ||W(k)||^2 = 8 ||N||^2 on the alpha = 1 Fefferman metric (relative)
    {
      LorentzCurvature lw = has_pert ? full_curvature(sweep[1].field(), bp, 2) : lc;
      cplx acc = 0.0;
      for (int b = 0; b < D; ++b)
        for (int c2 = 0; c2 < D; ++c2)
          for (int d = 0; d < D; ++d) {
            cplx x = lw.W(D - 1, b, c2, d).value();
            if (x == cplx(0.0)) continue;
            for (int b2 = 0; b2 < D; ++b2)
              for (int c3 = 0; c3 < D; ++c3)
                for (int d2 = 0; d2 < D; ++d2)
                  acc += x * lw.ginv(b, b2).value() * lw.ginv(c2, c3).value() *
                         lw.ginv(d, d2).value() * lw.W(D - 1, b2, c3, d2).value();
          }
      auto tw = main_fm.tower(base, 2);
      double want = 8.0 * tw->wc.n_norm2.value().real();
      c.wnorm_id = std::abs(acc.real() - want) / std::max(1e-12, std::abs(want));
      if (want < 1e-10) c.wnorm_id = std::abs(acc.real());
    }

    OpticalDiagnostics od = optical_diagnostics(lc, kf);
    c.geodesic = od.geodesic_residual;
    c.shear = std::max(od.shear, std::abs(od.expansion));
    c.ckf = od.ckf_residual;
    c.twist = od.twist;

    // conformal covariance under the contact rescaling (alpha-Fefferman)
    {
      JetMat a = sweep[1].eval(bp, 1);
      JetMat b = resc_fm.eval(bp, 1);
      double eu = std::exp(g.eval_scalar(ups, base, 1).value().real());
      double err = 0.0, scale = 1.0;
      for (int x = 0; x < D; ++x)
        for (int y = 0; y < D; ++y) {
          err = std::max(err, std::abs(eu * a(x, y).value() - b(x, y).value()));
          scale = std::max(scale, std::abs(a(x, y).value()));
        }
      c.covariance = err / scale;
    }

    // Schouten/Cotton/Weyl conformal laws
    {
      ScalarFieldFn omega = [D](const Point& q, int order) {
        Jet x = Jet::variable(1, q[1], D, order);
        Jet ph = Jet::variable(D - 1, q.back(), D, order);
        return jet_exp(cplx(0.1) * x + cplx(0.07) * jet_cos(ph));
      };
      ConformalCheck cc = conformal_rescale_check(mf, omega, bp, 3);
      c.rho_law = cc.rho_law;
      c.cotton_law = cc.cotton_law;
      c.weyl_inv = cc.weyl_invariance;
    }
  });

  Agg killing, metricity, riem, weylt, sig, wn, geo, shear, ckf, cov, rho, cot, winv, bia, preal;
  MinAgg twist;
  for (int i = 0; i < n; ++i) {
    killing.feed(cells[i].killing, pts[i]);
    metricity.feed(cells[i].metricity, pts[i]);
    riem.feed(cells[i].riem_sym, pts[i]);
    weylt.feed(cells[i].weyl_trace, pts[i]);
    sig.feed(cells[i].signature, pts[i]);
    wn.feed(cells[i].wnorm_id, pts[i]);
    geo.feed(cells[i].geodesic, pts[i]);
    shear.feed(cells[i].shear, pts[i]);
    ckf.feed(cells[i].ckf, pts[i]);
    cov.feed(cells[i].covariance, pts[i]);
    rho.feed(cells[i].rho_law, pts[i]);
    cot.feed(cells[i].cotton_law, pts[i]);
    winv.feed(cells[i].weyl_inv, pts[i]);
    bia.feed(cells[i].bianchi, pts[i]);
    twist.feed(cells[i].twist, pts[i]);
    if (has_pert) preal.feed(cells[i].pert_real, pts[i]);
  }
  out.push_back(ReportEntry::residual(S, "killing_field", killing.value(), 1e-8, killing.worst));
  out.push_back(ReportEntry::residual(S, "metricity", metricity.value(), 1e-9, metricity.worst));
  out.push_back(ReportEntry::residual(S, "riemann_symmetries", riem.value(), 1e-7, riem.worst));
  out.push_back(ReportEntry::residual(S, "weyl_trace_free", weylt.value(), 1e-7, weylt.worst));
  out.push_back(ReportEntry::residual(S, "signature", sig.value(), 0.5, sig.worst));
  out.push_back(ReportEntry::residual(S, "weyl_norm_8NN", wn.value(), 1e-5, wn.worst));
  out.push_back(ReportEntry::residual(S, "geodesic", geo.value(), 1e-7, geo.worst));
  out.push_back(ReportEntry::residual(S, "shear_expansion", shear.value(), 1e-7, shear.worst));
  out.push_back(ReportEntry::residual(S, "conformal_killing", ckf.value(), 1e-7, ckf.worst));
  out.push_back(ReportEntry::bound(S, "twist", twist.v, 0.1, twist.worst));
  out.push_back(ReportEntry::residual(S, "contact_covariance", cov.value(), t_curv, cov.worst));
  out.push_back(ReportEntry::residual(S, "schouten_law", rho.value(), t_curv, rho.worst));
  out.push_back(ReportEntry::residual(S, "cotton_law", cot.value(), 1e-5, cot.worst));
  out.push_back(ReportEntry::residual(S, "weyl_invariance", winv.value(), t_curv, winv.worst));
  out.push_back(ReportEntry::residual(S, "contracted_bianchi", bia.value(), 1e-5, bia.worst));
  if (has_pert)
    out.push_back(ReportEntry::residual(S, "perturbation_reality", preal.value(), 1e-10, preal.worst));
}

// ------------------------------------------------------------ characterize

void characterize_suite(const CRGeometry& g, const RunConfig& cfg,
                        std::vector<ReportEntry>& out, std::uint64_t* rejections) {
  const std::string S = "characterize";
  double t = tol_of(cfg, S, 1e-5);
  (void)data_order(cfg, 4, 4, "characterize");  // structural: jets to order 5
  std::vector<Point> pts = sample_bundle(g, cfg.points, cfg.seed + 4, rejections);
  int n = static_cast<int>(pts.size());
  int D = g.dim() + 1;
  std::vector<double> kf = fibre_vector(D);

  struct Cell {
    double rho_sc = -1e300, wkk = 0, ykk = 0, intc = 0, ckf = 0, alpha = 0;
    double wkk_r = 0, ykk_r = 0, intc_r = 0, alpha_r = 0;
    double petrov = 0;
    bool determinate = true;
  };
  std::vector<Cell> cells(n);

  std::vector<double> alphas = {0.0, 1.0, 2.0};
  if (std::find(alphas.begin(), alphas.end(), g.perturbation.alpha) == alphas.end())
    alphas.push_back(g.perturbation.alpha);
  std::vector<FeffermanMetric> fms;
  for (double a : alphas) fms.emplace_back(g, a, CRData{});
  CRData data = bind_cr_data(g);
  bool has_pert = !data.empty();
  FeffermanMetric pert_fm(g, g.perturbation.alpha, data);

  ScalarFieldFn om2 = [D](const Point& q, int order) {
    Jet x = Jet::variable(1, q[1], D, order);
    Jet w = jet_exp(cplx(0.13) * x);
    return w * w;
  };

  parallel_for(n, cfg.workers, [&](int i) {
    const Point& bp = pts[i];
    Cell& c = cells[i];
    for (size_t ai = 0; ai < alphas.size(); ++ai) {
      MetricField mf = fms[ai].field();
      IntegrabilityReport rep = integrability_report(mf, kf, bp, g.m);
      c.rho_sc = std::max(c.rho_sc, rep.rho_sc);
      c.wkk = std::max(c.wkk, rep.wkk_residual);
      c.ykk = std::max(c.ykk, rep.ykk_residual);
      c.intc = std::max(c.intc, rep.intcond_residual);
      c.ckf = std::max(c.ckf, rep.ckf_residual);
      if (rep.alpha_determinate)
        c.alpha = std::max(c.alpha, std::abs(rep.inferred_alpha - alphas[ai]));
      else
        c.determinate = false;

      // conformal invariance of the residuals (base rescaling)
      IntegrabilityReport rr = integrability_report(conformally_scaled(mf, om2), kf, bp, g.m);
      c.wkk_r = std::max(c.wkk_r, rr.wkk_residual);
      c.ykk_r = std::max(c.ykk_r, rr.ykk_residual);
      c.intc_r = std::max(c.intc_r, rr.intcond_residual);
      if (rr.alpha_determinate)
        c.alpha_r = std::max(c.alpha_r, std::abs(rr.inferred_alpha - alphas[ai]));
    }
    // degeneracy conditions of the assembled (possibly perturbed) metric
    PetrovResiduals pr = petrov_conditions((has_pert ? pert_fm : fms[1]).field(), kf, bp);
    c.petrov = has_pert ? std::max({pr.iia, pr.iib, pr.iiia, pr.wklkl}) : pr.wkvkv;
  });

  Agg rho_hi, wkk, ykk, intc, ckf, alpha, wkk_r, ykk_r, intc_r, alpha_r, petrov;
  bool determinate = true;
  for (int i = 0; i < n; ++i) {
    rho_hi.feed(cells[i].rho_sc, pts[i]);
    wkk.feed(cells[i].wkk, pts[i]);
    ykk.feed(cells[i].ykk, pts[i]);
    intc.feed(cells[i].intc, pts[i]);
    ckf.feed(cells[i].ckf, pts[i]);
    alpha.feed(cells[i].alpha, pts[i]);
    wkk_r.feed(cells[i].wkk_r, pts[i]);
    ykk_r.feed(cells[i].ykk_r, pts[i]);
    intc_r.feed(cells[i].intc_r, pts[i]);
    alpha_r.feed(cells[i].alpha_r, pts[i]);
    petrov.feed(cells[i].petrov, pts[i]);
    determinate = determinate && cells[i].determinate;
  }
  out.push_back(ReportEntry::bound(S, "rho_sc_margin", -rho_hi.value(), 0.1, rho_hi.worst));
  out.push_back(ReportEntry::residual(S, "conformal_killing", ckf.value(), 1e-7, ckf.worst));
  out.push_back(ReportEntry::residual(S, "wkk", wkk.value(), t, wkk.worst));
  out.push_back(ReportEntry::residual(S, "ykk", ykk.value(), t, ykk.worst));
  out.push_back(ReportEntry::residual(S, "int_cond", intc.value(), t, intc.worst));
  out.push_back(ReportEntry::residual(S, "wkk_rescaled", wkk_r.value(), t, wkk_r.worst));
  out.push_back(ReportEntry::residual(S, "ykk_rescaled", ykk_r.value(), t, ykk_r.worst));
  out.push_back(ReportEntry::residual(S, "int_cond_rescaled", intc_r.value(), t, intc_r.worst));
  if (determinate) {
    out.push_back(ReportEntry::residual(S, "alpha_inference", alpha.value(), 1e-3, alpha.worst));
    out.push_back(
        ReportEntry::residual(S, "alpha_inference_rescaled", alpha_r.value(), 1e-3, alpha_r.worst));
  }
  out.push_back(ReportEntry::residual(S, has_pert ? "petrov_degeneracy" : "petrov_wkvkv",
                                      petrov.value(), 1e-6, petrov.worst));
}

// ------------------------------------------------------------------ scales

void scales_suite(const CRGeometry& g, const RunConfig& cfg,
                  std::vector<ReportEntry>& out, std::uint64_t* rejections) {
  const std::string S = "scales";
  double t = tol_of(cfg, S, 1e-6);
  (void)data_order(cfg, 4, 4, "scales");
  CRData data = bind_cr_data(g);
  bool einstein_like = !data.empty() || is_flat_base(g);

  // The lambda_0 family and its ODEs (geometry independent).
  {
    std::mt19937 rng(static_cast<unsigned>(cfg.seed + 11));
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    double o1 = 0, o2 = 0;
    for (int it = 0; it < 20; ++it) {
      double L = u(rng), Lt = u(rng);
      cplx mu(u(rng), u(rng));
      for (double phi : {0.0, 0.5, 1.1, 2.4, -0.8}) {
        o1 = std::max(o1, ode1_residual(g.m, L, Lt, mu, phi));
        o2 = std::max(o2, ode2_residual(g.m, L, Lt, cplx(0.0, mu.imag()), phi));
      }
    }
    out.push_back(ReportEntry::residual(S, "lambda0_ode1", o1, 1e-8, {}));
    out.push_back(ReportEntry::residual(S, "lambda0_ode2", o2, 1e-8, {}));
    auto c = einstein_xi0_coefficients(2, 1.0, 0.0, 0.0);
    double spot = std::abs(c.at(6) - cplx(1.0 / 24)) + std::abs(c.at(0) - cplx(1.0 / 6));
    out.push_back(ReportEntry::residual(S, "lambda0_spot_values", spot, 1e-12, {}));
  }

  if (!einstein_like) return;  // the remaining checks need Einstein-type data

  FeffermanMetric fm(g, data.empty() ? 1.0 : g.perturbation.alpha, data);
  MetricField mf = fm.field();
  std::vector<Point> pts = sample_bundle(g, cfg.points, cfg.seed + 5, rejections, 0.3);
  int n = static_cast<int>(pts.size());

  struct Cell {
    double einstein = 0, lt = 0, weakly = 0, halfdiv = 0, ric = 0;
  };
  std::vector<Cell> cells(n);
  parallel_for(n, cfg.workers, [&](int i) {
    const Point& bp = pts[i];
    AlScaleResiduals r = scale_residuals(mf, g.m, 0.0, bp);
    cells[i].einstein = r.einstein;
    cells[i].lt = std::abs(r.lambda_tilde);
    cells[i].weakly = r.weakly_half;
    cells[i].halfdiv = r.half_div;
    // direct Einstein check of sec^2 phi rescaling (LambdaTilde = 0 data)
    MetricField gsec = conformally_scaled(mf, sec2_profile(g.dim() + 1));
    LorentzCurvature lc = full_curvature(gsec, bp, 2);
    double rr = 0.0;
    for (const auto& j : lc.ric) rr = std::max(rr, std::abs(j.value()));
    cells[i].ric = rr;
  });
  Agg einstein, lt, weakly, halfdiv, ric;
  for (int i = 0; i < n; ++i) {
    einstein.feed(cells[i].einstein, pts[i]);
    lt.feed(cells[i].lt, pts[i]);
    weakly.feed(cells[i].weakly, pts[i]);
    halfdiv.feed(cells[i].halfdiv, pts[i]);
    ric.feed(cells[i].ric, pts[i]);
  }
  out.push_back(ReportEntry::residual(S, "einstein_scale", einstein.value(), t, einstein.worst));
  out.push_back(ReportEntry::residual(S, "ricci_flat", ric.value(), 1e-5, ric.worst));
  out.push_back(ReportEntry::residual(S, "lambda_tilde", lt.value(), t, lt.worst));
  out.push_back(ReportEntry::residual(S, "weakly_half_einstein", weakly.value(), t, weakly.worst));
  out.push_back(ReportEntry::residual(S, "half_einstein_divergence", halfdiv.value(), t, halfdiv.worst));

  // zero-set diagnostics at a few base points (LambdaTilde = 0 for the
  // built-in Einstein data).
  {
    std::uint64_t dummy = 0;
    std::vector<Point> bpts = sample_base(g, std::min(cfg.points, 8), cfg.seed + 6, &dummy);
    Agg det, consistency;
    MinAgg weyl;
    Agg weyl_hi;
    for (const auto& p : bpts) {
      ZeroSetDiagnostics z = zero_set_diagnostics(fm, p, 0.0);
      det.feed(std::abs(z.det), p);
      double sgn = (g.m % 2 == 0) ? 1.0 : -1.0;
      consistency.feed(std::abs(z.det - sgn * 4.0 * z.lambda0_slice), p);
      weyl.feed(z.weyl_norm, p);
      weyl_hi.feed(z.weyl_norm, p);
    }
    out.push_back(ReportEntry::residual(S, "zeroset_null_det", det.value(), 1e-6, det.worst));
    out.push_back(
        ReportEntry::residual(S, "zeroset_det_consistency", consistency.value(), 1e-6, consistency.worst));
    if (is_flat_base(g))
      out.push_back(ReportEntry::residual(S, "zeroset_weyl_flat", weyl_hi.value(), 1e-6, weyl_hi.worst));
    else
      out.push_back(ReportEntry::bound(S, "zeroset_weyl_nonflat", weyl.v, 0.01, weyl.worst));
  }
}

}  // namespace

VerificationReport run_suites(const CRGeometry& g, const RunConfig& cfg) {
  VerificationReport rep;
  rep.geometry = g.name.empty() ? "unnamed" : g.name;
  rep.suite_selection = cfg.suite;
  rep.seed = cfg.seed;
  rep.points = cfg.points;
  rep.order = cfg.order;

  auto want = [&](const std::string& s) { return cfg.suite == "all" || cfg.suite == s; };
  bool any = false;
  if (want("webster")) {
    webster_suite(g, cfg, rep.entries, &rep.rejections);
    any = true;
  }
  if (want("cr-einstein")) {
    creinstein_suite(g, cfg, rep.entries, &rep.rejections);
    any = true;
  }
  if (want("fefferman")) {
    fefferman_suite(g, cfg, rep.entries, &rep.rejections);
    any = true;
  }
  if (want("characterize")) {
    characterize_suite(g, cfg, rep.entries, &rep.rejections);
    any = true;
  }
  if (want("scales")) {
    scales_suite(g, cfg, rep.entries, &rep.rejections);
    any = true;
  }
  if (!any) throw std::invalid_argument("unknown suite '" + cfg.suite + "'");
  return rep;
}

VerificationReport run_config(const RunConfig& cfg) {
  CRGeometry g;
  if (!cfg.gallery.empty())
    g = gallery::by_name(cfg.gallery);
  else if (!cfg.spec_path.empty())
    g = load_geometry_file(cfg.spec_path);
  else
    throw std::invalid_argument("either a gallery name or a spec path is required");
  return run_suites(g, cfg);
}

}  // namespace crfeff
