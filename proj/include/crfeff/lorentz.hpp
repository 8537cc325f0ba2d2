#pragma once

#include <vector>

#include "crfeff/fefferman.hpp"

namespace crfeff {

/// Curvature record of a pseudo-Riemannian metric on a coordinate chart.
/// Conventions: Riem_{abcd} has its two-form pair first,
/// Ric_{ab} = g^{cd} Riem_{cadb}, Rho = (Ric - Sc g /(2n+2))/n with
/// n = dim-2, Cot_{cab} = nabla_a Rho_{bc} - nabla_b Rho_{ac}.
class LorentzCurvature {
 public:
  int D = 0;
  int order = 0;  // metric jet order

  JetMat g, ginv;              // order
  std::vector<Jet> christ;     // Gamma^a_{bc}, order-1
  std::vector<Jet> riem;       // Riem_{abcd}, order-2
  std::vector<Jet> ric;        // order-2
  Jet sc, rho_scalar;
  std::vector<Jet> rho;        // order-2
  std::vector<Jet> weyl;       // order-2
  std::vector<Jet> cotton;     // order-3 (empty when order < 3)

  const Jet& G(int a, int b, int c) const {
    return christ[(static_cast<size_t>(a) * D + b) * D + c];
  }
  const Jet& R(int a, int b, int c, int d) const {
    return riem[((static_cast<size_t>(a) * D + b) * D + c) * D + d];
  }
  const Jet& W(int a, int b, int c, int d) const {
    return weyl[((static_cast<size_t>(a) * D + b) * D + c) * D + d];
  }
  const Jet& Ric(int a, int b) const { return ric[static_cast<size_t>(a) * D + b]; }
  const Jet& Rho(int a, int b) const { return rho[static_cast<size_t>(a) * D + b]; }
  const Jet& Cot(int c, int a, int b) const {
    return cotton[(static_cast<size_t>(c) * D + a) * D + b];
  }

  /// Covariant derivative of a (0,2)-tensor given by jets (adds the
  /// direction as the first index).
  std::vector<Jet> cov2(const std::vector<Jet>& T) const;

  /// Pointwise diagnostics.
  double riemann_symmetry_residual() const;
  double weyl_trace_residual() const;
  double metricity_residual() const;
  /// Signature: returns (positive count, negative count).
  std::pair<int, int> signature() const;
};

LorentzCurvature full_curvature(const MetricField& mf, const Point& p, int order);

/// Contracted Bianchi residual: (n-1) Cot_{cab} - nabla^d W_{dcab}, max
/// abs over components at the point.
double contracted_bianchi_residual(const LorentzCurvature& lc);

/// Schouten/Cotton transformation-law residuals for ghat = Omega^2 g with
/// Upsilon_a = nabla_a log Omega:
///   Rho_hat = Rho - nabla Upsilon + Upsilon Upsilon - 1/2 |Upsilon|^2 g
///   Cot_hat = Cot + Upsilon^d W_{dcab}
/// and conformal invariance of the (1,3)-Weyl.
struct ConformalCheck {
  double rho_law = 0.0;
  double cotton_law = 0.0;
  double weyl_invariance = 0.0;
};
ConformalCheck conformal_rescale_check(const MetricField& g, const ScalarFieldFn& omega,
                                       const Point& p, int order);

/// Optical diagnostics of a null vector field (constant coordinate
/// components; the engine only needs k = d/dphi and constant test fields).
struct OpticalDiagnostics {
  double geodesic_residual = 0.0;  // k^b nabla_b k^a projected mod k
  double shear = 0.0;              // screen-projected trace-free symmetric part
  double expansion = 0.0;          // screen trace / n
  double twist = 0.0;              // screen norm of nabla_[a kappa_b]
  double epsilon = 0.0;            // div k / (n+2)
  double ckf_residual = 0.0;       // trace-free symmetric part of nabla kappa
  bool is_null = false;
};
OpticalDiagnostics optical_diagnostics(const LorentzCurvature& lc,
                                       const std::vector<double>& k);

/// Null frame adapted to k at a point: l with g(k,l)=1... (paper's
/// normalisation g(k,l)=2 is handled by callers), screen vectors
/// orthonormal and orthogonal to both.
struct NullFrame {
  std::vector<cplx> k, l;                  // g(k,l) = 2, both null
  std::vector<std::vector<cplx>> screen;   // g(s_i, s_j) = delta_ij
};
NullFrame build_null_frame(const LorentzCurvature& lc, const std::vector<double>& k,
                           unsigned seed = 0);

}  // namespace crfeff
