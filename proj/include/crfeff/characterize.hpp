#pragma once

#include "crfeff/lorentz.hpp"

namespace crfeff {

/// Conformally invariant conditions characterising alpha-Fefferman spaces
/// among optical geometries with a null conformal Killing field.
struct IntegrabilityReport {
  double rho_sc = 0.0;          // scalar that must be strictly negative
  double wkk_residual = 0.0;    // k W k = c kappa kappa after the fit
  double ykk_residual = 0.0;
  double intcond_residual = 0.0;
  double ckf_residual = 0.0;    // conformal Killing content
  double wnorm2 = 0.0;          // ||W(k)||^2
  bool alpha_determinate = false;
  double inferred_alpha = 0.0;
};

IntegrabilityReport integrability_report(const MetricField& mf,
                                         const std::vector<double>& k, const Point& p,
                                         int m);

/// Weyl degeneracy conditions for k-contractions, evaluated over an
/// explicit basis of k-perp.
struct PetrovResiduals {
  double iia = 0.0;    // W(k, v, k, .)
  double iib = 0.0;    // W(k, v, grad k)
  double iiia = 0.0;   // W(k, ., k, .)
  double iiib = 0.0;   // same contraction as iib
  double wkvkv = 0.0;  // W(k, v, k, v)
  double wklkl = 0.0;  // W(k, l, k, l)
};

PetrovResiduals petrov_conditions(const MetricField& mf, const std::vector<double>& k,
                                  const Point& p);

/// Residuals of the almost Lorentzian scale equations for
/// sigma-tilde = cos(phi - phi0) * (scale of the given metric).
struct AlScaleResiduals {
  double einstein = 0.0;        // trace-free (Hess + Rho) sigma
  double weakly_half = 0.0;     // Phi on the Robinson distribution
  double half_div = 0.0;        // Phi divergence equation
  double pure_radiation = 0.0;  // Phi - (fit) kappa kappa
  double phi_fit = 0.0;
  double lambda_tilde = 0.0;    // Sc of sec^2 * g over (2m+2)
};

AlScaleResiduals scale_residuals(const MetricField& mf, int m, double phi0,
                                 const Point& bundle_point);

/// Closed-form Fourier family of the fibre component lambda_0 and the two
/// ordinary differential equations it solves.
cplx lambda0_series(int m, double Lambda, double LambdaTilde, cplx mu, double phi);
double ode1_residual(int m, double Lambda, double LambdaTilde, cplx mu, double phi);
double ode2_residual(int m, double Lambda, double LambdaTilde, cplx mu, double phi);

/// Zero-set diagnostics at the slice phi = pi/2: determinant of the
/// restricted metric in the h-unitarised adapted frame, Weyl norm on the
/// slice, and the causal class (sign of LambdaTilde).
struct ZeroSetDiagnostics {
  double det = 0.0;
  double weyl_norm = 0.0;
  double lambda0_slice = 0.0;
  int causal_class = 0;  // +1 spacelike, 0 null, -1 timelike
};

ZeroSetDiagnostics zero_set_diagnostics(const FeffermanMetric& fm, const Point& base_point,
                                        double lambda_tilde);

}  // namespace crfeff
