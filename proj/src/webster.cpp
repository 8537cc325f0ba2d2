#include "crfeff/webster.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace crfeff {

namespace {

/// Extend a jet to a higher order, zero-padding the new coefficients.
/// Only used for quantities known to be constant (vanishing derivatives).
Jet jet_extend(const Jet& j, int order) {
  if (j.order() >= order) return j.truncated(order);
  Jet r(j.dim(), order);
  for (int k = 0; k < j.size(); ++k) r[k] = j[k];
  return r;
}

/// Assembler for the pointwise linear system over real unknowns: complex
/// unknowns z_j split as (Re, Im), complex equations split into two real
/// rows.  Coefficients may multiply z_j or conj(z_j).
class RealSystem {
 public:
  RealSystem(int n_complex_unknowns, int jet_dim, int jet_order)
      : nu_(n_complex_unknowns), jd_(jet_dim), jo_(jet_order) {}

  void new_equation() { rows_.emplace_back(); }
  void term(int col, const Jet& coeff, bool conjugated = false) {
    rows_.back().terms.push_back({col, coeff.truncated(jo_), conjugated});
  }
  void term(int col, cplx coeff, bool conjugated = false) {
    rows_.back().terms.push_back({col, Jet::constant(coeff, jd_, jo_), conjugated});
  }
  void rhs(const Jet& r) { rows_.back().rhs = r.truncated(jo_); }

  LstsqResult solve() const {
    int R = static_cast<int>(rows_.size());
    JetMat A(2 * R, 2 * nu_, jd_, jo_);
    JetMat b(2 * R, 1, jd_, jo_);
    for (int r = 0; r < R; ++r) {
      const Row& row = rows_[r];
      Jet rr = row.rhs.valid() ? row.rhs : Jet(jd_, jo_);
      b(2 * r, 0) = rr.real();
      b(2 * r + 1, 0) = rr.imag();
      for (const Term& t : row.terms) {
        Jet cre = t.coeff.real(), cim = t.coeff.imag();
        int p = 2 * t.col, q = 2 * t.col + 1;
        if (!t.conjugated) {
          // c * z  -> Re: Re(c) p - Im(c) q ; Im: Im(c) p + Re(c) q
          A(2 * r, p) += cre;
          A(2 * r, q) -= cim;
          A(2 * r + 1, p) += cim;
          A(2 * r + 1, q) += cre;
        } else {
          // c * conj(z) -> Re: Re(c) p + Im(c) q ; Im: Im(c) p - Re(c) q
          A(2 * r, p) += cre;
          A(2 * r, q) += cim;
          A(2 * r + 1, p) += cim;
          A(2 * r + 1, q) -= cre;
        }
      }
    }
    return jet_lstsq(A, b);
  }

 private:
  struct Term {
    int col;
    Jet coeff;
    bool conjugated;
  };
  struct Row {
    std::vector<Term> terms;
    Jet rhs;
  };
  int nu_, jd_, jo_;
  std::vector<Row> rows_;
};

}  // namespace

Jet SolvedGeometry::frame_deriv(int I, const Jet& f) const {
  Jet acc(f.dim(), f.order() - 1);
  for (int i = 0; i < dim; ++i) acc += frame(I, i) * f.derivative(i);
  return acc;
}

Jet SolvedGeometry::big_gamma(int I, int j, int k) const {
  int jd = Gamma[0].dim(), jo = Gamma[0].order();
  if (j == 0 || k == 0) return Jet(jd, jo);
  bool jbar = j > m, kbar = k > m;
  if (jbar != kbar) return Jet(jd, jo);
  if (!jbar) return gamma(I, j - 1, k - 1);
  return gamma(conj_dir(I), j - m - 1, k - m - 1).conj();
}

Jet SolvedGeometry::gauge_gamma(int I) const {
  Jet acc(Gamma[0].dim(), Gamma[0].order());
  for (int a = 0; a < m; ++a) acc += gamma(I, a, a);
  return acc * cplx(1.0 / (m + 2));
}

std::vector<Jet> SolvedGeometry::coordinate_form(const std::vector<Jet>& comps) const {
  std::vector<Jet> out;
  out.reserve(dim);
  for (int i = 0; i < dim; ++i) {
    Jet acc(comps[0].dim(), comps[0].order());
    for (int I = 0; I < 2 * m + 1; ++I) acc += comps[I] * coframe(I, i);
    out.push_back(acc);
  }
  return out;
}

Jet SolvedGeometry::raise1(const std::vector<Jet>& v_bar, int a) const {
  Jet acc(v_bar[0].dim(), v_bar[0].order());
  for (int b = 0; b < m; ++b) acc += hup(a, b) * v_bar[b];
  return acc;
}

namespace {

struct AdaptedData {
  JetMat coframe, frame;
  FormValue dtheta;
  std::vector<FormValue> dtheta_alpha;
  JetMat h, hup;
  double adapted_residual;
};

AdaptedData build_adapted(const CRGeometry& g, const Point& x, int q, double tol,
                          bool need_dtheta_alpha) {
  int m = g.m;
  int dim = g.dim();
  if (dim != 2 * m + 1) throw NotAdapted("chart dimension is not 2m+1");

  AdaptedData ad;
  std::vector<Jet> th = g.theta(x, q);
  std::vector<std::vector<Jet>> tha;
  for (int a = 0; a < m; ++a) tha.push_back(g.theta_alpha[a](x, q));

  ad.coframe = JetMat(2 * m + 1, dim, dim, q);
  for (int i = 0; i < dim; ++i) {
    ad.coframe(0, i) = th[i];
    for (int a = 0; a < m; ++a) {
      ad.coframe(1 + a, i) = tha[a][i];
      ad.coframe(m + 1 + a, i) = tha[a][i].conj();
    }
  }
  // Full-rank check and dual frame.
  Eigen::MatrixXcd C0(dim, dim);
  for (int I = 0; I < dim; ++I)
    for (int i = 0; i < dim; ++i) C0(I, i) = ad.coframe(I, i).value();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(C0);
  double smin = svd.singularValues()(dim - 1), smax = svd.singularValues()(0);
  if (smin < 1e-10 * smax) throw NotAdapted("coframe matrix is singular at the point");
  ad.frame = jet_inverse(ad.coframe).transpose();

  ad.dtheta = exterior_derivative(one_form(th));
  if (need_dtheta_alpha) {
    for (int a = 0; a < m; ++a)
      ad.dtheta_alpha.push_back(exterior_derivative(one_form(tha[a])));
  }

  auto frame_vec = [&](int I) {
    std::vector<Jet> v(dim);
    for (int i = 0; i < dim; ++i) v[i] = ad.frame(I, i);
    return v;
  };

  // Levi form from dtheta = i h_{a bbar} theta^a ^ conj(theta^b).
  ad.h = JetMat(m, m, dim, q - 1);
  double stray = 0.0;
  for (int I = 0; I <= 2 * m; ++I) {
    for (int J = I + 1; J <= 2 * m; ++J) {
      Jet v = contract(ad.dtheta, {frame_vec(I), frame_vec(J)});
      bool mixed = (I >= 1 && I <= m) && (J >= m + 1);
      if (mixed) {
        ad.h(I - 1, J - m - 1) = cplx(0, -1) * v;
      } else {
        stray = std::max(stray, v.max_abs());
      }
    }
  }
  ad.adapted_residual = stray;
  if (stray > tol)
    throw NotAdapted("contact form is not adapted: stray dtheta components of size " +
                     std::to_string(stray));

  // Hermiticity and positivity.
  double herm = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      herm = std::max(herm, (ad.h(a, b) - ad.h(b, a).conj()).max_abs());
  if (herm > tol) throw NotAdapted("Levi form is not Hermitian");
  Eigen::MatrixXcd H0(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) H0(a, b) = ad.h(a, b).value();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H0);
  if (es.eigenvalues()(0) <= tol)
    throw NotAdapted("Levi form is not positive definite (degenerate or wrong sign)");

  ad.hup = jet_inverse(ad.h).conj();
  return ad;
}

}  // namespace

JetMat validate_adapted(const CRGeometry& g, const Point& x, double tol) {
  if (!g.admissible(x)) throw NotAdapted("point outside the chart domain");
  AdaptedData ad = build_adapted(g, x, 2, tol, false);
  // Contact condition: theta ^ (dtheta)^m is nonzero.
  FormValue th = one_form([&] {
    std::vector<Jet> v(g.dim());
    for (int i = 0; i < g.dim(); ++i) v[i] = ad.coframe(0, i);
    return v;
  }());
  FormValue top = th;
  for (int k = 0; k < g.m; ++k) top = wedge(top, ad.dtheta);
  if (top.max_abs() < tol) throw NotAdapted("contact condition fails: theta ^ (dtheta)^m = 0");
  return ad.h;
}

SolvedGeometry solve_webster(const CRGeometry& g, const Point& x, int order,
                             const WebsterOptions& opt) {
  int m = g.m;
  int dim = g.dim();
  int q = order + 1;
  AdaptedData ad = build_adapted(g, x, q, opt.adapted_tol, true);

  SolvedGeometry sg;
  sg.m = m;
  sg.dim = dim;
  sg.x = x;
  sg.coframe = ad.coframe;
  sg.frame = ad.frame;
  sg.dtheta = ad.dtheta;
  sg.dtheta_alpha = ad.dtheta_alpha;
  sg.h = ad.h;
  sg.hup = ad.hup;
  sg.adapted_residual = ad.adapted_residual;

  auto frame_vec = [&](int I) {
    std::vector<Jet> v(dim);
    for (int i = 0; i < dim; ++i) v[i] = sg.frame(I, i);
    return v;
  };

  // Frame derivatives of the Levi form (one order below h itself).
  std::vector<Jet> eIh(static_cast<size_t>(dim) * m * m);
  double dh_norm = 0.0;
  for (int I = 0; I < dim; ++I)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        Jet d(dim, q - 2);
        for (int i = 0; i < dim; ++i) d += sg.frame(I, i) * sg.h(a, b).derivative(i);
        eIh[(static_cast<size_t>(I) * m + a) * m + b] = d;
        dh_norm = std::max(dh_norm, d.max_abs());
      }
  double h_scale = std::max(1.0, sg.h.max_abs());
  sg.levi_constant = dh_norm < 1e-10 * h_scale;
  int so = sg.levi_constant ? order : order - 1;  // achievable jet order
  if (so < 0) throw std::invalid_argument("solve_webster: order too low for varying Levi form");
  sg.order = so;

  // Unknown layout.
  int nG = dim * m * m;
  auto gi = [&](int I, int b, int a) { return (I * m + b) * m + a; };
  int nA = m * (m + 1) / 2;
  auto ai = [&](int a, int b) {
    int lo = std::min(a, b), hi = std::max(a, b);
    // index within the upper-triangular enumeration
    return nG + lo * m - lo * (lo - 1) / 2 + (hi - lo);
  };
  int npairs = m * (m - 1) / 2;
  auto pr = [&](int a, int b) {  // a < b
    return a * m - a * (a + 1) / 2 + (b - a - 1);
  };
  int nN = npairs * m;
  auto ni = [&](int a, int b, int c) {  // stores N_{abc} with a<b; sign handled by caller
    return nG + nA + pr(a, b) * m + c;
  };
  int nu = nG + nA + nN;

  RealSystem sys(nu, dim, so);

  // Structure equations for each dtheta^a.
  for (int a = 0; a < m; ++a) {
    for (int I = 0; I <= 2 * m; ++I) {
      for (int J = I + 1; J <= 2 * m; ++J) {
        Jet D = contract(sg.dtheta_alpha[a], {frame_vec(I), frame_vec(J)});
        bool I0 = (I == 0);
        bool Jhol = (J >= 1 && J <= m), Jbar = (J > m);
        if (I0 && Jhol) {
          // -Gamma_{0 beta}^a = D
          sys.new_equation();
          sys.term(gi(0, J - 1, a), cplx(-1.0));
          sys.rhs(D);
        } else if (I0 && Jbar) {
          // A^a_{bbar} = sum_g h^{a gbar} conj(A_{g b}) = D
          sys.new_equation();
          int b = J - m - 1;
          for (int g2 = 0; g2 < m; ++g2) sys.term(ai(g2, b), sg.hup(a, g2), true);
          sys.rhs(D);
        } else if (!I0 && !Jbar) {
          // Gamma_{(J) I-1}^a - Gamma_{(I) J-1}^a = D  on theta^{I-1} ^ theta^{J-1}
          sys.new_equation();
          sys.term(gi(J, I - 1, a), cplx(1.0));
          sys.term(gi(I, J - 1, a), cplx(-1.0));
          sys.rhs(D);
        } else if (!I0 && Jhol == false && I <= m) {
          // mixed pair theta^{I-1} ^ conj theta^{J-m-1}: Gamma_{J, I-1}^a = D
          sys.new_equation();
          sys.term(gi(J, I - 1, a), cplx(1.0));
          sys.rhs(D);
        } else {
          // barred pair: -N_{Ibar Jbar}^a = D, i.e. -sum_g h^{a gbar} conj(N_{b c g}) = D
          sys.new_equation();
          int b = I - m - 1, c = J - m - 1;
          for (int g2 = 0; g2 < m; ++g2) sys.term(ni(b, c, g2), -sg.hup(a, g2), true);
          sys.rhs(D);
        }
      }
    }
  }

  // Metric compatibility: e_I(h_{a bbar}) = Gamma_{I a}^g h_{g b} + conj(Gamma_{Ibar b}^g) h_{a g}.
  for (int I = 0; I <= 2 * m; ++I) {
    int Ic = sg.conj_dir(I);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        sys.new_equation();
        for (int g2 = 0; g2 < m; ++g2) {
          sys.term(gi(I, a, g2), sg.h(g2, b));
          sys.term(gi(Ic, b, g2), sg.h(a, g2), true);
        }
        sys.rhs(jet_extend(eIh[(static_cast<size_t>(I) * m + a) * m + b], so));
      }
  }

  // Vanishing total antisymmetrisation of N (nontrivial for m >= 3).
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      for (int c = b + 1; c < m; ++c) {
        sys.new_equation();
        sys.term(ni(a, b, c), cplx(1.0));
        sys.term(ni(b, c, a), cplx(1.0));
        sys.term(ni(a, c, b), cplx(-1.0));  // N_{cab} = -N_{acb}
        sys.rhs(Jet(dim, so));
      }

  LstsqResult ls = sys.solve();
  sg.solve_residual = ls.residual;
  sg.rank_ratio = ls.min_singular / ls.max_singular;
  if (sg.rank_ratio < opt.rank_tol)
    throw std::runtime_error("solve_webster: structure-equation system is rank deficient");
  double rhs_scale = std::max(1.0, sg.dtheta.max_abs());
  if (ls.residual > opt.residual_tol * rhs_scale * 100)
    throw std::runtime_error("solve_webster: structure-equation residual too large: " +
                             std::to_string(ls.residual));

  auto unk = [&](int j) {
    Jet re = ls.x(2 * j, 0), im = ls.x(2 * j + 1, 0);
    return re + cplx(0, 1) * im;
  };

  sg.Gamma.assign(nG, Jet(dim, so));
  for (int I = 0; I <= 2 * m; ++I)
    for (int b = 0; b < m; ++b)
      for (int a = 0; a < m; ++a) sg.gamma(I, b, a) = unk(gi(I, b, a));
  sg.A.assign(static_cast<size_t>(m) * m, Jet(dim, so));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) sg.A[static_cast<size_t>(a) * m + b] = unk(ai(a, b));
  sg.N.assign(static_cast<size_t>(m) * m * m, Jet(dim, so));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      for (int c = 0; c < m; ++c) {
        Jet v = unk(ni(std::min(a, b), std::max(a, b), c));
        sg.N[(static_cast<size_t>(a) * m + b) * m + c] = (a < b) ? v : -v;
      }
    }
  return sg;
}

FrameTensor::FrameTensor(int m_, int rank_, int jet_dim, int jet_order)
    : m(m_), rank(rank_) {
  size_t n = 1;
  for (int i = 0; i < rank; ++i) n *= span();
  c.assign(n, Jet(jet_dim, jet_order));
}

size_t FrameTensor::flat(const std::vector<int>& idx) const {
  size_t f = 0;
  for (int i = 0; i < rank; ++i) f = f * span() + idx[i];
  return f;
}

double FrameTensor::max_abs() const {
  double v = 0.0;
  for (const auto& j : c) v = std::max(v, j.max_abs());
  return v;
}

FrameTensor covariant_derivative(const SolvedGeometry& sg, const FrameTensor& T,
                                 const std::vector<Jet>* gauge) {
  int span = T.span();
  FrameTensor out(T.m, T.rank + 1, T.c[0].dim(), T.c[0].order() - 1);
  std::vector<int> idx(T.rank, 0);
  size_t total = T.c.size();
  for (size_t f = 0; f < total; ++f) {
    // decode flat index
    size_t rem = f;
    for (int s = T.rank - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(rem % span);
      rem /= span;
    }
    for (int I = 0; I < span; ++I) {
      Jet acc = sg.frame_deriv(I, T.c[f]);
      // connection corrections on each (lower) slot
      for (int s = 0; s < T.rank; ++s) {
        int j = idx[s];
        if (j == 0) continue;
        bool jbar = j > T.m;
        for (int k = 1; k <= T.m; ++k) {
          int kk = jbar ? k + T.m : k;
          Jet G = sg.big_gamma(I, j, kk);
          if (G.max_abs() == 0.0) continue;
          std::vector<int> idx2 = idx;
          idx2[s] = kk;
          acc -= G * T.at(idx2);
        }
      }
      if (gauge) acc += (*gauge)[I] * T.c[f];
      std::vector<int> oidx;
      oidx.reserve(T.rank + 1);
      oidx.push_back(I);
      oidx.insert(oidx.end(), idx.begin(), idx.end());
      out.at(oidx) = acc;
    }
  }
  return out;
}

int WebsterCurvature::pair_rank(int I, int J) const {
  int span = 2 * m + 1;
  // rank of (I,J), I<J, in lexicographic enumeration
  return I * span - I * (I + 1) / 2 + (J - I - 1);
}

Jet WebsterCurvature::riem_mixed(int g_, int d_, int a, int b) const {
  int span = 2 * m + 1;
  int p = pair_rank(1 + g_, m + 1 + d_);
  (void)span;
  return omega[(static_cast<size_t>(p) * m + a) * m + b];
}

WebsterCurvature webster_curvature(const SolvedGeometry& sg) {
  int m = sg.m, dim = sg.dim;
  WebsterCurvature wc;
  wc.m = m;
  wc.order = sg.order - 1;
  wc.h = sg.h;
  wc.hup = sg.hup;

  auto frame_vec = [&](int I) {
    std::vector<Jet> v(dim);
    for (int i = 0; i < dim; ++i) v[i] = sg.frame(I, i);
    return v;
  };

  // Curvature two-forms Omega_b^a = d Gamma_b^a - Gamma_b^g ^ Gamma_g^a.
  std::vector<FormValue> gamma_coord(static_cast<size_t>(m) * m);
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a) {
      std::vector<Jet> comps(2 * m + 1);
      for (int I = 0; I <= 2 * m; ++I) comps[I] = sg.gamma(I, b, a);
      gamma_coord[static_cast<size_t>(b) * m + a] = one_form(sg.coordinate_form(comps));
    }
  int npairs = dim * (dim - 1) / 2;
  wc.omega.assign(static_cast<size_t>(npairs) * m * m, Jet(dim, wc.order));
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a) {
      FormValue om = exterior_derivative(gamma_coord[static_cast<size_t>(b) * m + a]);
      for (int g2 = 0; g2 < m; ++g2)
        om -= wedge(gamma_coord[static_cast<size_t>(b) * m + g2],
                    gamma_coord[static_cast<size_t>(g2) * m + a]);
      int p = 0;
      for (int I = 0; I <= 2 * m; ++I)
        for (int J = I + 1; J <= 2 * m; ++J, ++p)
          wc.omega[(static_cast<size_t>(p) * m + b) * m + a] =
              contract(om, {frame_vec(I), frame_vec(J)});
    }

  // Webster--Ricci, scalar, Schouten.
  wc.ric = JetMat(m, m, dim, wc.order);
  JetMat ric_ud(m, m, dim, wc.order);  // Ric_c^d
  for (int c = 0; c < m; ++c)
    for (int d = 0; d < m; ++d) {
      Jet acc(dim, wc.order);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) acc += wc.hup(a, b) * wc.riem_mixed(a, b, c, d);
      ric_ud(c, d) = acc;
    }
  for (int c = 0; c < m; ++c)
    for (int b = 0; b < m; ++b) {
      Jet acc(dim, wc.order);
      for (int d = 0; d < m; ++d) acc += ric_ud(c, d) * sg.h(d, b);
      wc.ric(c, b) = acc;
    }
  wc.sc = Jet(dim, wc.order);
  for (int c = 0; c < m; ++c) wc.sc += ric_ud(c, c);
  wc.rho = JetMat(m, m, dim, wc.order);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      wc.rho(a, b) = (wc.ric(a, b) - wc.sc * cplx(1.0 / (2 * m + 2)) * sg.h(a, b)) *
                     cplx(1.0 / (m + 2));
  wc.rho_scalar = wc.sc * cplx(1.0 / (2.0 * (m + 1)));

  // ||N||^2.
  wc.n_norm2 = Jet(dim, sg.order);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        const Jet& nabc = sg.n_lo(a, b, c);
        if (nabc.max_abs() == 0.0) continue;
        for (int d = 0; d < m; ++d)
          for (int e = 0; e < m; ++e)
            for (int f2 = 0; f2 < m; ++f2) {
              Jet w = sg.hup(a, d) * sg.hup(b, e) * sg.hup(c, f2);
              wc.n_norm2 += nabc * sg.n_lo(d, e, f2).conj() * w;
            }
      }

  // Covariant derivatives of N.
  FrameTensor NT(m, 3, dim, sg.order);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) NT.at({1 + a, 1 + b, 1 + c}) = sg.n_lo(a, b, c);
  FrameTensor DN = covariant_derivative(sg, NT);
  wc.dbar_n.assign(static_cast<size_t>(m) * m * m * m, Jet(dim, sg.order - 1));
  for (int d = 0; d < m; ++d)
    for (int g2 = 0; g2 < m; ++g2)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          wc.dbar_n[((static_cast<size_t>(d) * m + g2) * m + a) * m + b] =
              DN.at({m + 1 + d, 1 + g2, 1 + a, 1 + b});
  wc.div_n.assign(static_cast<size_t>(m) * m, Jet(dim, sg.order - 1));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Jet acc(dim, sg.order - 1);
      for (int g2 = 0; g2 < m; ++g2)
        for (int d = 0; d < m; ++d)
          acc += sg.hup(g2, d) *
                 wc.dbar_n[((static_cast<size_t>(d) * m + g2) * m + a) * m + b];
      wc.div_n[static_cast<size_t>(a) * m + b] = acc;
    }

  // T_alpha = (1/(m+2)) (nabla_a Rho - i nabla^g A_{g a} + i A^{bg} N_{a b g}).
  wc.t_alpha.assign(m, Jet(dim, wc.order - 1 >= 0 ? wc.order - 1 : 0));
  {
    FrameTensor AT(m, 2, dim, sg.order);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) AT.at({1 + a, 1 + b}) = sg.a_lo(a, b);
    FrameTensor DA = covariant_derivative(sg, AT);
    for (int a = 0; a < m; ++a) {
      Jet nabla_rho = sg.frame_deriv(1 + a, wc.rho_scalar);
      Jet divA(dim, sg.order - 1);
      for (int g2 = 0; g2 < m; ++g2)
        for (int d = 0; d < m; ++d)
          divA += sg.hup(g2, d) * DA.at({m + 1 + d, 1 + g2, 1 + a});
      Jet AN(dim, sg.order);
      for (int b = 0; b < m; ++b)
        for (int g2 = 0; g2 < m; ++g2) {
          // A^{bg} = h^{b ebar} h^{g fbar} conj(A_{e f})
          Jet Aup(dim, sg.order);
          for (int e = 0; e < m; ++e)
            for (int f2 = 0; f2 < m; ++f2)
              Aup += sg.hup(b, e) * sg.hup(g2, f2) * sg.a_lo(e, f2).conj();
          AN += Aup * sg.n_lo(a, b, g2);
        }
      wc.t_alpha[a] =
          (nabla_rho - cplx(0, 1) * divA + cplx(0, 1) * AN) * cplx(1.0 / (m + 2));
    }
  }

  // Chern--Moser tensor (m > 1 only).
  if (m > 1) {
    auto W4 = [&](int a, int g2, int b, int d) {
      Jet acc(dim, wc.order);
      for (int e = 0; e < m; ++e) acc += wc.riem_mixed(a, g2, b, e) * sg.h(e, d);
      return acc;
    };
    std::vector<Jet> T(static_cast<size_t>(m) * m * m * m, Jet(dim, wc.order));
    auto ti = [&](int a, int g2, int b, int d) {
      return ((static_cast<size_t>(a) * m + g2) * m + b) * m + d;
    };
    for (int a = 0; a < m; ++a)
      for (int g2 = 0; g2 < m; ++g2)
        for (int b = 0; b < m; ++b)
          for (int d = 0; d < m; ++d)
            T[ti(a, g2, b, d)] = (W4(a, g2, b, d) + W4(b, g2, a, d) + W4(a, d, b, g2) +
                                  W4(b, d, a, g2)) *
                                 cplx(0.25);
    // traces
    JetMat t(m, m, dim, wc.order);
    for (int b = 0; b < m; ++b)
      for (int d = 0; d < m; ++d) {
        Jet acc(dim, wc.order);
        for (int a = 0; a < m; ++a)
          for (int g2 = 0; g2 < m; ++g2) acc += wc.hup(a, g2) * T[ti(a, g2, b, d)];
        t(b, d) = acc;
      }
    Jet t0(dim, wc.order);
    for (int b = 0; b < m; ++b)
      for (int d = 0; d < m; ++d) t0 += wc.hup(b, d) * t(b, d);
    JetMat to(m, m, dim, wc.order);
    for (int b = 0; b < m; ++b)
      for (int d = 0; d < m; ++d) to(b, d) = t(b, d) - t0 * cplx(1.0 / m) * sg.h(b, d);
    wc.chern_moser.assign(static_cast<size_t>(m) * m * m * m, Jet(dim, wc.order));
    for (int a = 0; a < m; ++a)
      for (int g2 = 0; g2 < m; ++g2)
        for (int b = 0; b < m; ++b)
          for (int d = 0; d < m; ++d) {
            Jet s = T[ti(a, g2, b, d)];
            s -= (sg.h(a, g2) * to(b, d) + sg.h(a, d) * to(b, g2) + sg.h(b, g2) * to(a, d) +
                  sg.h(b, d) * to(a, g2)) *
                 cplx(1.0 / (m + 2));
            s -= (sg.h(a, g2) * sg.h(b, d) + sg.h(a, d) * sg.h(b, g2)) * t0 *
                 cplx(1.0 / (m * (m + 1.0)));
            wc.chern_moser[ti(a, g2, b, d)] = s;
          }
    // residual traces (diagnostic)
    double tr = 0.0;
    for (int b = 0; b < m; ++b)
      for (int d = 0; d < m; ++d) {
        Jet acc(dim, wc.order);
        for (int a = 0; a < m; ++a)
          for (int g2 = 0; g2 < m; ++g2)
            acc += wc.hup(a, g2) * wc.chern_moser[ti(a, g2, b, d)];
        tr = std::max(tr, std::abs(acc.value()));
      }
    wc.chern_moser_trace_norm = tr;
  }
  return wc;
}

std::vector<Jet> sigma_gauge(const SolvedGeometry& sg, const CRGeometry& g,
                             const ExprPtr& factor) {
  int span = 2 * sg.m + 1;
  std::vector<Jet> out(span);
  Jet gf;
  if (factor) gf = g.eval_scalar(factor, sg.x, sg.order + 1);
  for (int I = 0; I < span; ++I) {
    out[I] = sg.gauge_gamma(I);
    if (factor) out[I] += sg.frame_deriv(I, gf) / gf;
  }
  return out;
}

std::vector<Jet> gauged_derivative(const SolvedGeometry& sg, const CRGeometry& g,
                                   const std::vector<Jet>& xi, double w, double wp,
                                   const ExprPtr& f) {
  int span = 2 * sg.m + 1;
  Jet fv = g.eval_scalar(f, sg.x, sg.order + 1);
  std::vector<Jet> out(span);
  for (int I = 0; I < span; ++I) {
    Jet gammaI = sg.gauge_gamma(I);
    Jet gbar = sg.gauge_gamma(sg.conj_dir(I)).conj();
    out[I] = sg.frame_deriv(I, fv) + (cplx(w) * gammaI + cplx(wp) * gbar) * fv -
             cplx(0, w - wp) * xi[I] * fv;
  }
  return out;
}

ClosednessResidual closedness_residual(const SolvedGeometry& sg,
                                       const std::vector<Jet>& xi) {
  int m = sg.m, dim = sg.dim;
  FrameTensor X(m, 1, dim, sg.order);
  for (int I = 0; I < 2 * m + 1; ++I) X.at({I}) = xi[I];
  FrameTensor DX = covariant_derivative(sg, X);

  ClosednessResidual r{0, 0, 0};
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      // F_{ab} = nabla_[a xi_b] - 1/2 N_{ab}^{gbar} xi_{gbar}
      Jet v = (DX.at({1 + a, 1 + b}) - DX.at({1 + b, 1 + a})) * cplx(0.5);
      for (int d = 0; d < m; ++d)
        for (int g2 = 0; g2 < m; ++g2)
          v -= cplx(0.5) * sg.n_lo(a, b, d) * sg.hup(d, g2) * xi[m + 1 + g2];
      r.hh = std::max(r.hh, std::abs(v.value()));
      // F_{a bbar}: nabla_a xi_bbar - nabla_bbar xi_a + i xi_0 h_{a bbar}
      Jet w = DX.at({1 + a, m + 1 + b}) - DX.at({m + 1 + b, 1 + a}) +
              cplx(0, 1) * xi[0] * sg.h(a, b);
      r.mixed = std::max(r.mixed, std::abs(w.value()));
    }
    // F_{0 a}: nabla_0 xi_a - nabla_a xi_0 + xi_{bbar} A^{bbar}_a
    Jet u = DX.at({0, 1 + a}) - DX.at({1 + a, 0});
    for (int b = 0; b < m; ++b) {
      Jet Abar(dim, sg.order);
      for (int g2 = 0; g2 < m; ++g2) Abar += sg.hup(b, g2).conj() * sg.a_lo(g2, a);
      u += xi[m + 1 + b] * Abar;
    }
    r.reeb = std::max(r.reeb, std::abs(u.value()));
  }
  return r;
}

CRGeometry rescale_contact(const CRGeometry& g, const ExprPtr& Upsilon) {
  CRGeometry out;
  out.name = g.name + "_rescaled";
  out.chart = g.chart;
  out.lets = g.lets;
  out.m = g.m;
  out.vol_factor = g.vol_factor;
  auto base = std::make_shared<CRGeometry>(g);
  ExprPtr U = Upsilon;

  out.theta = [base, U](const Point& p, int order) {
    Jet u = base->eval_scalar(U, p, order);
    Jet eu = jet_exp(u);
    std::vector<Jet> th = base->theta(p, order);
    for (auto& c : th) c = eu * c;
    return th;
  };
  for (int a = 0; a < g.m; ++a) {
    out.theta_alpha.push_back([base, U, a](const Point& p, int order) {
      // theta_hat^a = e^{U/2} (theta^a + i Upsilon^a theta)
      SolvedGeometry sg = solve_webster(*base, p, order);
      Jet u = base->eval_scalar(U, p, order + 1);
      Jet eu = jet_exp(u.truncated(order) * cplx(0.5));
      // Upsilon^a = h^{a bbar} e_bbar(U)
      std::vector<Jet> ubar(base->m);
      for (int b = 0; b < base->m; ++b) ubar[b] = sg.frame_deriv(base->m + 1 + b, u);
      Jet ua = sg.raise1(ubar, a);
      std::vector<Jet> th = base->theta(p, order);
      std::vector<Jet> tha = base->theta_alpha[a](p, order);
      std::vector<Jet> outv(base->dim());
      for (int i = 0; i < base->dim(); ++i)
        outv[i] = eu * (tha[i] + cplx(0, 1) * ua * th[i]);
      return outv;
    });
  }
  return out;
}

double TransformCheck::max_err() const {
  double v = err_A;
  v = std::max(v, err_rho);
  v = std::max(v, err_rho_scalar);
  v = std::max(v, err_divN_sym);
  v = std::max(v, err_divN_anti);
  v = std::max(v, err_N);
  v = std::max(v, err_h);
  return v;
}

TransformCheck transform_contact(const CRGeometry& g, const ExprPtr& Upsilon,
                                 const Point& x, int order) {
  int m = g.m, dim = g.dim();
  int so = std::max(order, 2);  // need curvature of both structures

  SolvedGeometry sg = solve_webster(g, x, so);
  WebsterCurvature wc = webster_curvature(sg);

  CRGeometry gh = rescale_contact(g, Upsilon);
  SolvedGeometry sh = solve_webster(gh, x, so);
  WebsterCurvature wh = webster_curvature(sh);

  // Frame components of dUpsilon and its covariant Hessian in the base scale.
  Jet u = g.eval_scalar(Upsilon, x, so + 1);
  cplx emu = std::exp(-u.value());
  cplx emu2 = std::exp(-0.5 * u.value());
  FrameTensor Uf(m, 1, dim, so);
  for (int I = 0; I < 2 * m + 1; ++I) Uf.at({I}) = sg.frame_deriv(I, u);
  FrameTensor DU = covariant_derivative(sg, Uf);

  auto uhol = [&](int a) { return Uf.at({1 + a}); };
  auto ubar = [&](int b) { return Uf.at({m + 1 + b}); };
  auto uup = [&](int a) {
    Jet acc(dim, so);
    for (int b = 0; b < m; ++b) acc += sg.hup(a, b) * ubar(b);
    return acc;
  };
  Jet u2(dim, so);  // Upsilon^g Upsilon_g
  for (int a = 0; a < m; ++a) u2 += uup(a) * uhol(a);

  TransformCheck chk;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      // torsion law
      Jet pred = sg.a_lo(a, b) +
                 cplx(0, 0.5) * (DU.at({1 + a, 1 + b}) + DU.at({1 + b, 1 + a})) -
                 cplx(0, 1) * uhol(a) * uhol(b);
      for (int g2 = 0; g2 < m; ++g2)
        pred += cplx(0, 0.5) * uup(g2) * (sg.n_lo(g2, a, b) + sg.n_lo(g2, b, a));
      chk.err_A = std::max(chk.err_A, std::abs(emu * pred.value() - sh.a_lo(a, b).value()));

      // Schouten tensor law
      Jet predr = wc.rho(a, b) -
                  cplx(0.5) * (DU.at({1 + a, m + 1 + b}) + DU.at({m + 1 + b, 1 + a})) -
                  cplx(0.5) * u2 * sg.h(a, b);
      chk.err_rho = std::max(chk.err_rho, std::abs(emu * predr.value() - wh.rho(a, b).value()));

      // divergence-of-N laws
      Jet sym_n(dim, so), anti_n(dim, so);
      for (int g2 = 0; g2 < m; ++g2) {
        sym_n += uup(g2) * cplx(0.5) * (sg.n_lo(g2, a, b) + sg.n_lo(g2, b, a));
        anti_n += uup(g2) * cplx(0.5) * (sg.n_lo(g2, a, b) - sg.n_lo(g2, b, a));
      }
      Jet dsym = cplx(0.5) * (wc.div_n[static_cast<size_t>(a) * m + b] +
                              wc.div_n[static_cast<size_t>(b) * m + a]);
      Jet danti = cplx(0.5) * (wc.div_n[static_cast<size_t>(a) * m + b] -
                               wc.div_n[static_cast<size_t>(b) * m + a]);
      Jet hsym = cplx(0.5) * (wh.div_n[static_cast<size_t>(a) * m + b] +
                              wh.div_n[static_cast<size_t>(b) * m + a]);
      Jet hanti = cplx(0.5) * (wh.div_n[static_cast<size_t>(a) * m + b] -
                               wh.div_n[static_cast<size_t>(b) * m + a]);
      chk.err_divN_sym = std::max(
          chk.err_divN_sym,
          std::abs(emu * (dsym.value() + cplx(m) * sym_n.value()) - hsym.value()));
      chk.err_divN_anti = std::max(
          chk.err_divN_anti,
          std::abs(emu * (danti.value() + cplx(m + 2) * anti_n.value()) - hanti.value()));

      chk.err_h = std::max(chk.err_h, std::abs(sg.h(a, b).value() - sh.h(a, b).value()));
      for (int c = 0; c < m; ++c)
        chk.err_N = std::max(chk.err_N, std::abs(emu2 * sg.n_lo(a, b, c).value() -
                                                 sh.n_lo(a, b, c).value()));
    }

  // Schouten scalar law
  {
    Jet div1(dim, so), div2(dim, so);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        div1 += sg.hup(a, b) * DU.at({m + 1 + b, 1 + a});  // nabla^a U_a
        div2 += sg.hup(a, b) * DU.at({1 + a, m + 1 + b});  // nabla_a U^a
      }
    Jet pred = wc.rho_scalar - cplx(0.5) * (div1 + div2) - cplx(0.5 * m) * u2;
    chk.err_rho_scalar = std::abs(emu * pred.value() - wh.rho_scalar.value());
  }
  return chk;
}

double volume_normalization_residual(const SolvedGeometry& sg, double vol_factor) {
  int m = sg.m, dim = sg.dim;
  auto row = [&](int I) {
    std::vector<Jet> v(dim);
    for (int i = 0; i < dim; ++i) v[i] = sg.coframe(I, i);
    return v;
  };
  FormValue theta = one_form(row(0));
  FormValue lhs = theta;
  for (int k = 0; k < m; ++k) lhs = wedge(lhs, sg.dtheta);

  FormValue zeta = theta;
  for (int a = 0; a < m; ++a) zeta = wedge(zeta, one_form(row(1 + a)));
  std::vector<Jet> ell(dim);
  for (int i = 0; i < dim; ++i) ell[i] = sg.frame(0, i);
  FormValue iz = interior(ell, zeta);
  FormValue rhs = wedge(theta, wedge(iz, iz.conj()));
  // i^{m^2} m! (-1)^q, q = 0, times |vol_factor|^2
  cplx im2 = std::pow(cplx(0, 1), m * m);
  double fact = 1.0;
  for (int k = 2; k <= m; ++k) fact *= k;
  rhs = (im2 * fact * vol_factor * vol_factor) * rhs;

  double scale = std::max(1.0, lhs.max_abs());
  return (lhs - rhs).max_abs() / scale;
}

}  // namespace crfeff
