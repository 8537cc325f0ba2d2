#include "crfeff/creinstein.hpp"

#include <Eigen/Dense>

namespace crfeff {

namespace {

/// Unitarizer: E = L^{-1} with h = L L^dagger at the point, so that lower
/// unbarred indices contract with E and barred ones with conj(E).
Eigen::MatrixXcd unitarizer(const JetMat& h) {
  int m = h.rows();
  Eigen::MatrixXcd H(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) H(a, b) = h(a, b).value();
  Eigen::LLT<Eigen::MatrixXcd> llt(H);
  Eigen::MatrixXcd L = llt.matrixL();
  return L.inverse();
}

double unitary_max2(const JetMat& h, const std::vector<cplx>& T, int m,
                    bool second_barred) {
  Eigen::MatrixXcd E = unitarizer(h);
  Eigen::MatrixXcd M(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) M(a, b) = T[static_cast<size_t>(a) * m + b];
  Eigen::MatrixXcd M2 =
      second_barred ? (E * M * E.adjoint()).eval() : (E * M * E.transpose()).eval();
  double v = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) v = std::max(v, std::abs(M2(a, b)));
  return v;
}

/// N_{a g d} N_{bbar}^{g d} at the point.
std::vector<cplx> nn_first(const SolvedGeometry& sg) {
  int m = sg.m;
  std::vector<cplx> X(static_cast<size_t>(m) * m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      cplx acc = 0.0;
      for (int g = 0; g < m; ++g)
        for (int d = 0; d < m; ++d)
          for (int e = 0; e < m; ++e)
            for (int f = 0; f < m; ++f)
              acc += sg.n_lo(a, g, d).value() * sg.hup(g, e).value() *
                     sg.hup(d, f).value() * std::conj(sg.n_lo(b, e, f).value());
      X[static_cast<size_t>(a) * m + b] = acc;
    }
  return X;
}

/// N_{g d a} N^{g d}_{bbar} at the point.
std::vector<cplx> nn_last(const SolvedGeometry& sg) {
  int m = sg.m;
  std::vector<cplx> Y(static_cast<size_t>(m) * m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      cplx acc = 0.0;
      for (int g = 0; g < m; ++g)
        for (int d = 0; d < m; ++d)
          for (int e = 0; e < m; ++e)
            for (int f = 0; f < m; ++f)
              acc += sg.n_lo(g, d, a).value() * sg.hup(g, e).value() *
                     sg.hup(d, f).value() * std::conj(sg.n_lo(e, f, b).value());
      Y[static_cast<size_t>(a) * m + b] = acc;
    }
  return Y;
}

std::vector<cplx> trace_free(const SolvedGeometry& sg, std::vector<cplx> M) {
  int m = sg.m;
  cplx tr = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      tr += sg.hup(a, b).value() * M[static_cast<size_t>(a) * m + b];
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      M[static_cast<size_t>(a) * m + b] -= tr / cplx(m) * sg.h(a, b).value();
  return M;
}

}  // namespace

CREinsteinResiduals cr_einstein_tensor_residuals(const SolvedGeometry& sg,
                                                 const WebsterCurvature& wc) {
  int m = sg.m;
  CREinsteinResiduals r;

  std::vector<cplx> A(static_cast<size_t>(m) * m), DN(static_cast<size_t>(m) * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      A[static_cast<size_t>(a) * m + b] = sg.a_lo(a, b).value();
      DN[static_cast<size_t>(a) * m + b] =
          0.5 * (wc.div_n[static_cast<size_t>(a) * m + b].value() +
                 wc.div_n[static_cast<size_t>(b) * m + a].value());
    }
  r.r_A = unitary_max2(sg.h, A, m, false);
  r.r_DN = unitary_max2(sg.h, DN, m, false);

  std::vector<cplx> X = nn_first(sg);
  std::vector<cplx> RhoNN(static_cast<size_t>(m) * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      RhoNN[static_cast<size_t>(a) * m + b] =
          wc.rho(a, b).value() - X[static_cast<size_t>(a) * m + b] / cplx(m + 2);
  r.r_Rho = unitary_max2(sg.h, trace_free(sg, RhoNN), m, true);

  double sc = wc.sc.value().real();
  double nn = wc.n_norm2.value().real();
  r.lambda = (sc - nn) / m;
  std::vector<cplx> Alt(static_cast<size_t>(m) * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      Alt[static_cast<size_t>(a) * m + b] = wc.ric(a, b).value() -
                                            X[static_cast<size_t>(a) * m + b] -
                                            cplx(r.lambda) * sg.h(a, b).value();
  r.r_alt = unitary_max2(sg.h, Alt, m, true);
  return r;
}

CRScaleResiduals cr_scale_residuals(const SolvedGeometry& sg, const WebsterCurvature& wc,
                                    const CRGeometry& g, const ExprPtr& factor) {
  int m = sg.m, dim = sg.dim, span = 2 * m + 1;

  // Xi = dlog(factor) in frame components (zero for the reference scale,
  // which is parallel for the Webster connection of its own contact form).
  FrameTensor Xi(m, 1, dim, sg.order);
  if (factor) {
    Jet gf = g.eval_scalar(factor, sg.x, sg.order + 1);
    if (gf.value().real() <= 0.0 ||
        std::abs(gf.value().imag()) > 1e-12 * std::abs(gf.value()))
      throw std::domain_error("cr_scale_residuals: scale factor must be positive real");
    for (int I = 0; I < span; ++I) Xi.at({I}) = sg.frame_deriv(I, gf) / gf;
  }
  FrameTensor DXi = covariant_derivative(sg, Xi);

  auto xi_up = [&](int a) {  // Xi^a = h^{a bbar} Xi_bbar
    cplx acc = 0.0;
    for (int b = 0; b < m; ++b) acc += sg.hup(a, b).value() * Xi.at({m + 1 + b}).value();
    return acc;
  };

  CRScaleResiduals r;
  std::vector<cplx> E1(static_cast<size_t>(m) * m), E2(static_cast<size_t>(m) * m),
      E3(static_cast<size_t>(m) * m);
  std::vector<cplx> X = nn_first(sg);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      cplx hess =
          0.5 * (DXi.at({1 + a, 1 + b}).value() + DXi.at({1 + b, 1 + a}).value()) +
          Xi.at({1 + a}).value() * Xi.at({1 + b}).value();
      cplx nterm = 0.0;
      for (int g2 = 0; g2 < m; ++g2)
        nterm += xi_up(g2) * 0.5 * (sg.n_lo(g2, a, b).value() + sg.n_lo(g2, b, a).value());
      cplx divn = 0.5 * (wc.div_n[static_cast<size_t>(a) * m + b].value() +
                         wc.div_n[static_cast<size_t>(b) * m + a].value());
      E1[static_cast<size_t>(a) * m + b] =
          hess + cplx(0, 1) * sg.a_lo(a, b).value() + nterm;
      E2[static_cast<size_t>(a) * m + b] = nterm - divn / cplx(m);
      // (nabla_bbar Xi_a + Rho_{a bbar} - N.N/(m+2))_o
      E3[static_cast<size_t>(a) * m + b] = DXi.at({m + 1 + b, 1 + a}).value() +
                                           wc.rho(a, b).value() -
                                           X[static_cast<size_t>(a) * m + b] / cplx(m + 2);
    }
  r.r_a = unitary_max2(sg.h, E1, m, false);
  r.r_n = unitary_max2(sg.h, E2, m, false);
  r.r_rho = unitary_max2(sg.h, trace_free(sg, E3), m, true);
  return r;
}

DensityResiduals density_residuals(const SolvedGeometry& sg, const WebsterCurvature& wc,
                                   const CRGeometry& g, const ExprPtr& factor) {
  int m = sg.m, dim = sg.dim, span = 2 * m + 1;

  // sigma^{-1} nabla sigma for sigma = factor * sigma_ref.
  FrameTensor Xi(m, 1, dim, sg.order);
  for (int I = 0; I < span; ++I) Xi.at({I}) = sg.gauge_gamma(I);
  if (factor) {
    Jet gf = g.eval_scalar(factor, sg.x, sg.order + 1);
    if (std::abs(gf.value()) < 1e-300)
      throw std::domain_error("density_residuals: sigma factor vanishes at the point");
    for (int I = 0; I < span; ++I) Xi.at({I}) += sg.frame_deriv(I, gf) / gf;
  }
  FrameTensor DXi = covariant_derivative(sg, Xi);

  DensityResiduals r;
  {
    Eigen::MatrixXcd E = unitarizer(sg.h);
    Eigen::VectorXcd v(m);
    for (int b = 0; b < m; ++b) v(b) = Xi.at({m + 1 + b}).value();
    Eigen::VectorXcd v2 = E.conjugate() * v;
    for (int b = 0; b < m; ++b) r.r_hol = std::max(r.r_hol, std::abs(v2(b)));
  }

  std::vector<cplx> E1(static_cast<size_t>(m) * m), E2(static_cast<size_t>(m) * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      cplx hess =
          0.5 * (DXi.at({1 + a, 1 + b}).value() + DXi.at({1 + b, 1 + a}).value()) +
          Xi.at({1 + a}).value() * Xi.at({1 + b}).value();
      cplx divn = 0.5 * (wc.div_n[static_cast<size_t>(a) * m + b].value() +
                         wc.div_n[static_cast<size_t>(b) * m + a].value());
      E1[static_cast<size_t>(a) * m + b] =
          hess + cplx(0, 1) * sg.a_lo(a, b).value() + divn / cplx(m);

      // Xi_g N^g_{(abar bbar)} - (1/m) nabla_g N^g_{(abar bbar)}
      cplx nterm = 0.0;
      for (int g2 = 0; g2 < m; ++g2)
        for (int d = 0; d < m; ++d)
          nterm += Xi.at({1 + g2}).value() * sg.hup(g2, d).value() *
                   std::conj(0.5 * (sg.n_lo(d, a, b).value() + sg.n_lo(d, b, a).value()));
      cplx divc = std::conj(0.5 * (wc.div_n[static_cast<size_t>(a) * m + b].value() +
                                   wc.div_n[static_cast<size_t>(b) * m + a].value()));
      E2[static_cast<size_t>(a) * m + b] = nterm - divc / cplx(m);
    }
  r.r_a = unitary_max2(sg.h, E1, m, false);
  // E2 carries two barred indices; unitarize with conj(E) on both.
  {
    Eigen::MatrixXcd E = unitarizer(sg.h);
    Eigen::MatrixXcd M(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) M(a, b) = E2[static_cast<size_t>(a) * m + b];
    Eigen::MatrixXcd M2 = E.conjugate() * M * E.adjoint();
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) r.r_n1 = std::max(r.r_n1, std::abs(M2(a, b)));
  }

  std::vector<cplx> X = nn_first(sg);
  std::vector<cplx> Y = nn_last(sg);
  std::vector<cplx> Obs(static_cast<size_t>(m) * m);
  for (size_t k = 0; k < Obs.size(); ++k) Obs[k] = 2.0 * X[k] - Y[k];
  r.r_n2 = unitary_max2(sg.h, trace_free(sg, Obs), m, true);
  return r;
}

double scale_times_nnorm(const SolvedGeometry& sg, const WebsterCurvature& wc,
                         const CRGeometry& g, const ExprPtr& s_factor) {
  double s = 1.0;
  if (s_factor) s = g.eval_scalar(s_factor, sg.x, 1).value().real();
  return s * wc.n_norm2.value().real();
}

}  // namespace crfeff
