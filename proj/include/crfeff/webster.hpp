#pragma once

#include <optional>
#include <vector>

#include "crfeff/forms.hpp"
#include "crfeff/geometry.hpp"
#include "crfeff/jetmat.hpp"

namespace crfeff {

struct WebsterOptions {
  double adapted_tol = 1e-8;
  double residual_tol = 1e-9;
  double rank_tol = 1e-8;
};

struct NotAdapted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pointwise solution of the structure equations.  Frame directions are
/// indexed I = 0 (Reeb), 1..m (holomorphic), m+1..2m (antiholomorphic);
/// Greek tensor indices below are 0-based (alpha in 0..m-1).
class SolvedGeometry {
 public:
  int m = 0;
  int dim = 0;        // 2m+1
  int order = 0;      // jet order of the solved connection data
  Point x;

  JetMat coframe;     // (2m+1) x dim coordinate components, jets order+1
  JetMat frame;       // (2m+1) x dim dual vectors e_I
  FormValue dtheta;
  std::vector<FormValue> dtheta_alpha;

  JetMat h;           // Levi form h_{alpha betabar}
  JetMat hup;         // h^{alpha betabar} (inverse, so hup * h^T = Id)

  std::vector<Jet> Gamma;  // [(2m+1)][m][m]: Gamma_{I beta}^{alpha}
  std::vector<Jet> A;      // A_{alpha beta}, symmetric
  std::vector<Jet> N;      // N_{alpha beta gamma}, antisymmetric in the first pair

  double solve_residual = 0.0;
  double rank_ratio = 0.0;
  double adapted_residual = 0.0;
  bool levi_constant = false;

  int conj_dir(int I) const { return I == 0 ? 0 : (I <= m ? I + m : I - m); }

  const Jet& gamma(int I, int b, int a) const {
    return Gamma[(static_cast<size_t>(I) * m + b) * m + a];
  }
  Jet& gamma(int I, int b, int a) {
    return Gamma[(static_cast<size_t>(I) * m + b) * m + a];
  }
  const Jet& a_lo(int a, int b) const { return A[static_cast<size_t>(a) * m + b]; }
  const Jet& n_lo(int a, int b, int c) const {
    return N[(static_cast<size_t>(a) * m + b) * m + c];
  }

  /// Frame derivative e_I(f) of a jet-valued function.
  Jet frame_deriv(int I, const Jet& f) const;

  /// Full-range connection coefficients G(I, j, k) acting on frame indices
  /// j,k in 0..2m (zero on the Reeb slot, conjugated on barred slots).
  Jet big_gamma(int I, int j, int k) const;

  /// gamma_I = (1/(m+2)) Gamma_{I alpha}^{alpha}: the gauge one-form of the
  /// canonical reference density (theta ^ theta^1 ^ ... ^ theta^m)^{-1/(m+2)}.
  Jet gauge_gamma(int I) const;

  /// Coordinate components of a coframe-component one-form.
  std::vector<Jet> coordinate_form(const std::vector<Jet>& comps) const;

  /// Raise a holomorphic index: (raise v)_a = sum_b h^{a bbar} v_{bbar-part}.
  Jet raise1(const std::vector<Jet>& v_bar, int a) const;
};

/// Extract the Levi form and check adaptedness; throws NotAdapted with a
/// description on failure.
JetMat validate_adapted(const CRGeometry& g, const Point& x, double tol = 1e-8);

/// Solve the structure equations pointwise; `order` is the requested jet
/// order of the connection data (the coframe is evaluated at order+1).
SolvedGeometry solve_webster(const CRGeometry& g, const Point& x, int order,
                             const WebsterOptions& opt = {});

/// Dense frame tensor over the full direction range 0..2m per slot.
struct FrameTensor {
  int m = 0;
  int rank = 0;
  std::vector<Jet> c;

  FrameTensor() = default;
  FrameTensor(int m_, int rank_, int jet_dim, int jet_order);
  int span() const { return 2 * m + 1; }
  size_t flat(const std::vector<int>& idx) const;
  Jet& at(const std::vector<int>& idx) { return c[flat(idx)]; }
  const Jet& at(const std::vector<int>& idx) const { return c[flat(idx)]; }
  double max_abs() const;
};

/// Covariant derivative; the direction becomes the FIRST index of the
/// result.  `gauge` (optional, per direction I in 0..2m) is added as
/// gauge[I] * T for weighted objects.
FrameTensor covariant_derivative(const SolvedGeometry& sg, const FrameTensor& T,
                                 const std::vector<Jet>* gauge = nullptr);

struct WebsterCurvature {
  int m = 0;
  int order = 0;  // jet order of the curvature data

  /// Omega_b^a expanded on frame pairs: omega[pair(I<J)][b][a].
  std::vector<Jet> omega;
  int pair_rank(int I, int J) const;  // I < J
  /// Riem_{gamma deltabar alpha}^{beta} (arguments 0-based; gamma, delta
  /// are the 2-form indices).
  Jet riem_mixed(int g_, int d_, int a, int b) const;

  JetMat h, hup;
  JetMat ric;        // Ric_{alpha betabar}
  Jet sc;
  JetMat rho;        // Rho_{alpha betabar}
  Jet rho_scalar;
  std::vector<Jet> chern_moser;  // S_{alpha gammabar beta deltabar}, m>1; empty otherwise
  std::vector<Jet> t_alpha;      // T_alpha
  Jet n_norm2;                   // ||N||^2

  std::vector<Jet> dbar_n;   // (deltabar, gamma, alpha, beta) -> nabla_{deltabar} N_{gamma alpha beta}
  std::vector<Jet> div_n;    // (gamma... ) contracted: nabla^gamma N_{gamma alpha beta}

  double chern_moser_trace_norm = 0.0;
};

WebsterCurvature webster_curvature(const SolvedGeometry& sg);

/// Gauge one-form (coframe components, 2m+1 entries) of a declared scale
/// sigma = g * sigma_ref: gamma_I + e_I(g)/g.
std::vector<Jet> sigma_gauge(const SolvedGeometry& sg, const CRGeometry& g,
                             const ExprPtr& factor);

/// Webster connection gauged by xi on trivialized densities of weight
/// (w, w'): returns the coframe components of nabla-gauged f.
std::vector<Jet> gauged_derivative(const SolvedGeometry& sg, const CRGeometry& g,
                                   const std::vector<Jet>& xi, double w, double wp,
                                   const ExprPtr& f);

/// The three closedness tensors of a one-form xi given in adapted-coframe
/// components (Lemma on closed gauges): returns max-abs norms of
///   F_{alpha beta},  F_{alpha betabar},  F_{0 beta}.
struct ClosednessResidual {
  double hh;      // nabla_[a xi_b] - (1/2) N_{ab}^{cbar} xi_cbar
  double mixed;   // nabla_a xi_bbar - nabla_bbar xi_a + i xi_0 h
  double reeb;    // nabla_0 xi_b - nabla_b xi_0 + xi_abar A^abar_b
};
ClosednessResidual closedness_residual(const SolvedGeometry& sg,
                                       const std::vector<Jet>& xi);

/// Rescaled geometry: theta_hat = e^Upsilon theta with the canonical
/// admissible completion theta_hat^alpha = e^{Upsilon/2}(theta^alpha +
/// i Upsilon^alpha theta), which keeps the Levi components unchanged.
CRGeometry rescale_contact(const CRGeometry& g, const ExprPtr& Upsilon);

/// Solve both geometries at a point and compare the re-solved tensors of
/// the rescaled structure against the transformation laws applied to the
/// base solve (trivialized with the weight factors of the canonical
/// completion).
struct TransformCheck {
  double err_A = 0.0;        // torsion law
  double err_rho = 0.0;      // Schouten tensor law
  double err_rho_scalar = 0.0;
  double err_divN_sym = 0.0;   // nabla^gamma N_{gamma(ab)} law
  double err_divN_anti = 0.0;  // nabla^gamma N_{gamma[ab]} law
  double err_N = 0.0;          // N_hat = e^{-Upsilon/2} N
  double err_h = 0.0;          // h_hat = h
  double max_err() const;
};
TransformCheck transform_contact(const CRGeometry& g, const ExprPtr& Upsilon,
                                 const Point& x, int order = 1);

/// Volume normalization residual: theta^(dtheta)^m versus
/// i^{m^2} m! (-1)^q theta^(l _| zeta)^(l _| conj zeta) with
/// zeta = vol_factor * theta^theta^1^...^theta^m and q = 0.
double volume_normalization_residual(const SolvedGeometry& sg, double vol_factor);

}  // namespace crfeff
