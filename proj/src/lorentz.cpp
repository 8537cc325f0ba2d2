#include "crfeff/lorentz.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace crfeff {

std::vector<Jet> LorentzCurvature::cov2(const std::vector<Jet>& T) const {
  int jo = T[0].order() - 1;
  std::vector<Jet> out(static_cast<size_t>(D) * D * D, Jet(D, jo));
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c) {
        Jet acc = T[static_cast<size_t>(b) * D + c].derivative(a);
        for (int e = 0; e < D; ++e) {
          acc -= G(e, a, b) * T[static_cast<size_t>(e) * D + c];
          acc -= G(e, a, c) * T[static_cast<size_t>(b) * D + e];
        }
        out[(static_cast<size_t>(a) * D + b) * D + c] = acc;
      }
  return out;
}

double LorentzCurvature::riemann_symmetry_residual() const {
  double v = 0.0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        for (int d = 0; d < D; ++d) {
          cplx r = R(a, b, c, d).value();
          v = std::max(v, std::abs(r + R(b, a, c, d).value()));
          v = std::max(v, std::abs(r + R(a, b, d, c).value()));
          v = std::max(v, std::abs(r - R(c, d, a, b).value()));
          // first Bianchi
          v = std::max(v, std::abs(r + R(b, c, a, d).value() + R(c, a, b, d).value()));
        }
  return v;
}

double LorentzCurvature::weyl_trace_residual() const {
  double v = 0.0;
  for (int b = 0; b < D; ++b)
    for (int d = 0; d < D; ++d) {
      cplx acc = 0.0;
      for (int a = 0; a < D; ++a)
        for (int c = 0; c < D; ++c) acc += ginv(a, c).value() * W(a, b, c, d).value();
      v = std::max(v, std::abs(acc));
    }
  return v;
}

double LorentzCurvature::metricity_residual() const {
  // nabla_a g_{bc} at the point
  double v = 0.0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c) {
        cplx acc = g(b, c).derivative(a).value();
        for (int e = 0; e < D; ++e) {
          acc -= G(e, a, b).value() * g(e, c).value();
          acc -= G(e, a, c).value() * g(b, e).value();
        }
        v = std::max(v, std::abs(acc));
      }
  return v;
}

std::pair<int, int> LorentzCurvature::signature() const {
  Eigen::MatrixXd M(D, D);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) M(i, j) = g(i, j).value().real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  int pos = 0, neg = 0;
  for (int i = 0; i < D; ++i) {
    if (es.eigenvalues()(i) > 0) ++pos;
    else ++neg;
  }
  return {pos, neg};
}

LorentzCurvature full_curvature(const MetricField& mf, const Point& p, int order) {
  LorentzCurvature lc;
  lc.D = mf.dim;
  lc.order = order;
  int D = lc.D;
  lc.g = mf.eval(p, order);
  lc.ginv = jet_inverse(lc.g);

  int o1 = order - 1, o2 = order - 2;
  if (o2 < 0) throw std::invalid_argument("full_curvature: order must be >= 2");

  // Christoffel symbols
  lc.christ.assign(static_cast<size_t>(D) * D * D, Jet(D, o1));
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = b; c < D; ++c) {
        Jet acc(D, o1);
        for (int d = 0; d < D; ++d) {
          Jet t = lc.g(d, c).derivative(b) + lc.g(d, b).derivative(c) -
                  lc.g(b, c).derivative(d);
          acc += lc.ginv(a, d) * t;
        }
        acc = acc * cplx(0.5);
        lc.christ[(static_cast<size_t>(a) * D + b) * D + c] = acc;
        lc.christ[(static_cast<size_t>(a) * D + c) * D + b] = acc;
      }

  // Riemann: R^e_{dab} = d_a G^e_{bd} - d_b G^e_{ad} + G^e_{ac} G^c_{bd} - G^e_{bc} G^c_{ad}
  std::vector<Jet> rup(static_cast<size_t>(D) * D * D * D, Jet(D, o2));
  auto rupi = [D](int e, int d, int a, int b) {
    return ((static_cast<size_t>(e) * D + d) * D + a) * D + b;
  };
  for (int e = 0; e < D; ++e)
    for (int d = 0; d < D; ++d)
      for (int a = 0; a < D; ++a)
        for (int b = a + 1; b < D; ++b) {
          Jet acc = lc.G(e, b, d).derivative(a) - lc.G(e, a, d).derivative(b);
          for (int c = 0; c < D; ++c)
            acc += lc.G(e, a, c) * lc.G(c, b, d) - lc.G(e, b, c) * lc.G(c, a, d);
          rup[rupi(e, d, a, b)] = acc;
          rup[rupi(e, d, b, a)] = -acc;
        }

  lc.riem.assign(static_cast<size_t>(D) * D * D * D, Jet(D, o2));
  auto ri = [D](int a, int b, int c, int d) {
    return ((static_cast<size_t>(a) * D + b) * D + c) * D + d;
  };
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        for (int d = 0; d < D; ++d) {
          Jet acc(D, o2);
          for (int e = 0; e < D; ++e) acc += lc.g(c, e) * rup[rupi(e, d, a, b)];
          lc.riem[ri(a, b, c, d)] = acc;
        }

  // Ricci, scalar, Schouten
  lc.ric.assign(static_cast<size_t>(D) * D, Jet(D, o2));
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      Jet acc(D, o2);
      for (int c = 0; c < D; ++c)
        for (int d = 0; d < D; ++d) acc += lc.ginv(c, d) * lc.riem[ri(c, a, d, b)];
      lc.ric[static_cast<size_t>(a) * D + b] = acc;
    }
  lc.sc = Jet(D, o2);
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) lc.sc += lc.ginv(a, b) * lc.ric[static_cast<size_t>(a) * D + b];
  int n = D - 2;
  lc.rho.assign(static_cast<size_t>(D) * D, Jet(D, o2));
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      lc.rho[static_cast<size_t>(a) * D + b] =
          (lc.ric[static_cast<size_t>(a) * D + b] -
           lc.sc * cplx(1.0 / (2.0 * (n + 1))) * lc.g(a, b)) *
          cplx(1.0 / n);
  lc.rho_scalar = lc.sc * cplx(1.0 / (2.0 * (n + 1)));

  // Weyl
  lc.weyl.assign(static_cast<size_t>(D) * D * D * D, Jet(D, o2));
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        for (int d = 0; d < D; ++d) {
          Jet acc = lc.riem[ri(a, b, c, d)];
          acc -= lc.g(a, c) * lc.rho[static_cast<size_t>(d) * D + b];
          acc += lc.g(b, c) * lc.rho[static_cast<size_t>(d) * D + a];
          acc += lc.g(a, d) * lc.rho[static_cast<size_t>(c) * D + b];
          acc -= lc.g(b, d) * lc.rho[static_cast<size_t>(c) * D + a];
          lc.weyl[ri(a, b, c, d)] = acc;
        }

  // Cotton
  if (order >= 3) {
    std::vector<Jet> drho = lc.cov2(lc.rho);
    lc.cotton.assign(static_cast<size_t>(D) * D * D, Jet(D, order - 3));
    for (int c = 0; c < D; ++c)
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
          lc.cotton[(static_cast<size_t>(c) * D + a) * D + b] =
              drho[(static_cast<size_t>(a) * D + b) * D + c] -
              drho[(static_cast<size_t>(b) * D + a) * D + c];
  }
  return lc;
}

double contracted_bianchi_residual(const LorentzCurvature& lc) {
  int D = lc.D, n = D - 2;
  if (lc.cotton.empty()) throw std::invalid_argument("need order >= 3 for Bianchi check");
  // nabla_e W_{dcab}
  double v = 0.0;
  for (int c = 0; c < D; ++c)
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) {
        cplx acc = 0.0;
        for (int e = 0; e < D; ++e)
          for (int d = 0; d < D; ++d) {
            // nabla_e W_{d c a b}
            cplx dw = lc.W(d, c, a, b).derivative(e).value();
            for (int f = 0; f < D; ++f) {
              dw -= lc.G(f, e, d).value() * lc.W(f, c, a, b).value();
              dw -= lc.G(f, e, c).value() * lc.W(d, f, a, b).value();
              dw -= lc.G(f, e, a).value() * lc.W(d, c, f, b).value();
              dw -= lc.G(f, e, b).value() * lc.W(d, c, a, f).value();
            }
            acc += lc.ginv(e, d).value() * dw;
          }
        cplx want = cplx(n - 1) * lc.Cot(c, a, b).value();
        v = std::max(v, std::abs(acc - want));
      }
  return v;
}

ConformalCheck conformal_rescale_check(const MetricField& g, const ScalarFieldFn& omega,
                                       const Point& p, int order) {
  MetricField gh = conformally_scaled(g, [omega](const Point& q, int o) {
    Jet w = omega(q, o);
    return w * w;
  });
  LorentzCurvature lc = full_curvature(g, p, order);
  LorentzCurvature lh = full_curvature(gh, p, order);
  int D = lc.D;

  // Upsilon_a = d_a log Omega
  Jet om = omega(p, order);
  std::vector<Jet> ups(D);
  for (int a = 0; a < D; ++a) ups[a] = om.derivative(a) / om.truncated(order - 1);
  // nabla_a Upsilon_b (Levi-Civita of g)
  std::vector<Jet> dups(static_cast<size_t>(D) * D);
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      Jet acc = ups[b].derivative(a);
      for (int e = 0; e < D; ++e) acc -= lc.G(e, a, b) * ups[e];
      dups[static_cast<size_t>(a) * D + b] = acc;
    }
  Jet ups2(D, order - 1);
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) ups2 += lc.ginv(a, b) * ups[a] * ups[b];

  ConformalCheck out;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      cplx pred = lc.Rho(a, b).value() - dups[static_cast<size_t>(a) * D + b].value() +
                  ups[a].value() * ups[b].value() -
                  0.5 * ups2.value() * lc.g(a, b).value();
      out.rho_law = std::max(out.rho_law, std::abs(pred - lh.Rho(a, b).value()));
    }
  if (!lc.cotton.empty()) {
    for (int c = 0; c < D; ++c)
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) {
          cplx pred = lc.Cot(c, a, b).value();
          for (int d = 0; d < D; ++d)
            for (int e = 0; e < D; ++e)
              pred += lc.ginv(d, e).value() * ups[e].value() * lc.W(d, c, a, b).value();
          out.cotton_law = std::max(out.cotton_law, std::abs(pred - lh.Cot(c, a, b).value()));
        }
  }
  // Weyl with the first index raised is conformally invariant.
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        for (int d = 0; d < D; ++d) {
          cplx wa = 0.0, wb = 0.0;
          for (int e = 0; e < D; ++e) {
            wa += lc.ginv(a, e).value() * lc.W(e, b, c, d).value();
            wb += lh.ginv(a, e).value() * lh.W(e, b, c, d).value();
          }
          out.weyl_invariance = std::max(out.weyl_invariance, std::abs(wa - wb));
        }
  return out;
}

NullFrame build_null_frame(const LorentzCurvature& lc, const std::vector<double>& kvec,
                           unsigned seed) {
  int D = lc.D;
  Eigen::MatrixXd G(D, D);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) G(i, j) = lc.g(i, j).value().real();
  Eigen::VectorXd k(D);
  for (int i = 0; i < D; ++i) k(i) = kvec[i];

  // candidate transversal: try coordinate directions in a seed-rotated order
  Eigen::VectorXd l;
  for (int t = 0; t < D; ++t) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(D);
    w(static_cast<int>((t + seed) % D)) = 1.0;
    double kw = k.dot(G * w);
    if (std::abs(kw) < 1e-6) continue;
    // make w null: w' = w - (g(w,w)/(2 g(k,w))) k
    double ww = w.dot(G * w);
    Eigen::VectorXd wn = w - (ww / (2 * kw)) * k;
    l = wn * (2.0 / k.dot(G * wn));  // normalise g(k,l) = 2
    break;
  }
  if (l.size() == 0) throw std::runtime_error("build_null_frame: no transversal found");

  NullFrame nf;
  nf.k.assign(D, 0.0);
  nf.l.assign(D, 0.0);
  for (int i = 0; i < D; ++i) {
    nf.k[i] = kvec[i];
    nf.l[i] = l(i);
  }

  // screen: orthogonal complement of (k, l), positive definite; Gram-Schmidt
  std::vector<Eigen::VectorXd> basis;
  for (int t = 0; t < D && static_cast<int>(basis.size()) < D - 2; ++t) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(D);
    w(static_cast<int>((t + seed) % D)) = 1.0;
    // project orthogonal to k and l (null pair): subtract along l and k
    double wk = w.dot(G * k), wl = w.dot(G * l), kl = k.dot(G * l);
    w -= (wk / kl) * l + (wl / kl) * k;
    for (const auto& b : basis) w -= (w.dot(G * b)) * b;
    double n2 = w.dot(G * w);
    if (n2 < 1e-8) continue;
    basis.push_back(w / std::sqrt(n2));
  }
  if (static_cast<int>(basis.size()) != D - 2)
    throw std::runtime_error("build_null_frame: failed to span the screen");
  for (const auto& b : basis) {
    std::vector<cplx> v(D);
    for (int i = 0; i < D; ++i) v[i] = b(i);
    nf.screen.push_back(v);
  }
  return nf;
}

OpticalDiagnostics optical_diagnostics(const LorentzCurvature& lc,
                                       const std::vector<double>& k) {
  int D = lc.D, n = D - 2;
  OpticalDiagnostics od;

  Eigen::MatrixXd G(D, D);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) G(i, j) = lc.g(i, j).value().real();
  Eigen::VectorXd kv(D);
  for (int i = 0; i < D; ++i) kv(i) = k[i];
  od.is_null = std::abs(kv.dot(G * kv)) < 1e-9 * G.norm();

  // kappa_a = g_{ab} k^b as jets; nabla_a kappa_b pointwise
  std::vector<Jet> kappa(D, Jet(D, lc.order));
  for (int a = 0; a < D; ++a) {
    Jet acc(D, lc.order);
    for (int b = 0; b < D; ++b) acc += lc.g(a, b) * cplx(k[b]);
    kappa[a] = acc;
  }
  Eigen::MatrixXd DK(D, D);
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      cplx acc = kappa[b].derivative(a).value();
      for (int e = 0; e < D; ++e) acc -= lc.G(e, a, b).value() * kappa[e].value();
      DK(a, b) = acc.real();
    }

  double divk = 0.0;
  Eigen::MatrixXd Ginv(D, D);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) Ginv(i, j) = lc.ginv(i, j).value().real();
  divk = (Ginv * DK).trace();
  od.epsilon = divk / (n + 2);

  // conformal Killing residual: trace-free symmetric part of nabla kappa
  Eigen::MatrixXd S = 0.5 * (DK + DK.transpose()) - od.epsilon * G;
  od.ckf_residual = S.cwiseAbs().maxCoeff();

  NullFrame nf = build_null_frame(lc, k);
  // geodesic residual: v^a = k^b nabla_b k^a = Gamma^a_{bc} k^b k^c, mod k
  Eigen::VectorXd v(D);
  for (int a = 0; a < D; ++a) {
    cplx acc = 0.0;
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c) acc += lc.G(a, b, c).value() * k[b] * k[c];
    v(a) = acc.real();
  }
  Eigen::VectorXd lv(D);
  for (int i = 0; i < D; ++i) lv(i) = nf.l[i].real();
  double comp = v.dot(G * lv) / kv.dot(G * lv);
  Eigen::VectorXd vproj = v - comp * kv;
  od.geodesic_residual = vproj.cwiseAbs().maxCoeff();

  // screen-projected symmetric part of nabla kappa: shear / expansion
  Eigen::MatrixXd sym = 0.5 * (DK + DK.transpose());
  Eigen::MatrixXd P(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
          acc += sym(a, b) * nf.screen[i][a].real() * nf.screen[j][b].real();
      P(i, j) = acc;
    }
  od.expansion = P.trace() / n;
  Eigen::MatrixXd sh = P - od.expansion * Eigen::MatrixXd::Identity(n, n);
  od.shear = sh.norm();

  Eigen::MatrixXd anti = 0.5 * (DK - DK.transpose());
  Eigen::MatrixXd T(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
          acc += anti(a, b) * nf.screen[i][a].real() * nf.screen[j][b].real();
      T(i, j) = acc;
    }
  od.twist = T.norm();
  return od;
}

}  // namespace crfeff
