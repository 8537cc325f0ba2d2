#pragma once

#include "crfeff/webster.hpp"

namespace crfeff {

/// Residual norms are max-abs frame components after transforming to an
/// h-unitary frame (Cholesky of the Levi form), so values match the
/// closed-form component displays when h is the identity.

struct CREinsteinResiduals {
  double r_A = 0.0;      // torsion: A_{ab}
  double r_DN = 0.0;     // div N: nabla^g N_{g(ab)}
  double r_Rho = 0.0;    // (Rho - (1/(m+2)) N.N)_o
  double r_alt = 0.0;    // Ric - N.N - Lambda h
  double lambda = 0.0;   // (1/m)(Sc - ||N||^2)
};

CREinsteinResiduals cr_einstein_tensor_residuals(const SolvedGeometry& sg,
                                                 const WebsterCurvature& wc);

/// Invariant scale-system residual triple for a trivialized CR scale
/// s = factor * s_ref,
/// factor a positive real expression (nullptr means s = s_ref).
struct CRScaleResiduals {
  double r_a = 0.0;
  double r_n = 0.0;
  double r_rho = 0.0;
  double max() const { return std::max(r_a, std::max(r_n, r_rho)); }
};

CRScaleResiduals cr_scale_residuals(const SolvedGeometry& sg, const WebsterCurvature& wc,
                                    const CRGeometry& g, const ExprPtr& factor);

/// Density-system residual quadruple for a weight-(1,0) density
/// sigma = factor * sigma_ref (factor nowhere zero; nullptr means sigma_ref).
struct DensityResiduals {
  double r_hol = 0.0;   // nabla_{abar} sigma
  double r_a = 0.0;     // symmetrised Hessian equation
  double r_n1 = 0.0;    // N-divergence equation
  double r_n2 = 0.0;    // (2 N.N - N'.N')_o obstruction
  double max() const {
    return std::max(std::max(r_hol, r_a), std::max(r_n1, r_n2));
  }
};

DensityResiduals density_residuals(const SolvedGeometry& sg, const WebsterCurvature& wc,
                                   const CRGeometry& g, const ExprPtr& factor);

/// Pointwise s * ||N||^2 (for the constancy diagnostic when the density
/// system holds with nonvanishing Nijenhuis tensor).
double scale_times_nnorm(const SolvedGeometry& sg, const WebsterCurvature& wc,
                         const CRGeometry& g, const ExprPtr& s_factor);

}  // namespace crfeff
