#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "crfeff/creinstein.hpp"
#include "crfeff/geometry.hpp"
#include "crfeff/webster.hpp"

namespace crfeff {

/// Metric field on a coordinate chart: evaluates symmetric real metric
/// components as jets at a point.
struct MetricField {
  int dim = 0;
  std::function<JetMat(const Point&, int order)> eval;
};

/// (Perturbed) Fefferman metrics on the bundle chart (base coords, phi),
/// phi being the last coordinate.  The fibre trivialisation is the
/// canonical volume-normalised density of the contact form, optionally
/// re-trivialised by a declared sigma factor (only its phase matters).
class FeffermanMetric {
 public:
  FeffermanMetric(CRGeometry geom, double alpha, CRData data,
                  ExprPtr sigma_factor = nullptr);

  const CRGeometry& base() const { return *geom_; }
  int m() const { return geom_->m; }
  int bundle_dim() const { return geom_->dim() + 1; }
  double alpha() const { return alpha_; }

  /// Metric jets of the requested order; the base tower is evaluated at
  /// connection order order+1 (coframe order order+2).
  JetMat eval(const Point& bundle_point, int order) const;

  MetricField field() const;

  /// Coframe components of the lambda-tilde one-form at a bundle point
  /// (the dphi coefficient is 1 by construction).
  struct Lambda {
    cplx lambda0;
    std::vector<cplx> lambda_alpha;
  };
  Lambda lambda_decomposition(const Point& bundle_point) const;

  /// Base solve at a bundle point's base part (cached).
  struct Tower {
    SolvedGeometry sg;
    WebsterCurvature wc;
  };
  std::shared_ptr<const Tower> tower(const Point& base_point, int solve_order) const;

 private:
  struct Cache {
    std::mutex mu;
    std::map<std::pair<std::vector<double>, int>, std::shared_ptr<const Tower>> map;
  };
  std::shared_ptr<CRGeometry> geom_;
  double alpha_;
  CRData data_;
  ExprPtr sigma_factor_;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// The assembled perturbation one-form's bundle coordinate components
/// (semi-basic; real).  Exposed for the perturbation tests.
std::vector<Jet> perturbation_one_form(const FeffermanMetric& fm, const Point& bundle_point,
                                       int order);

/// Fourier re-trivialisation z = rho * e^{-i phi0}: coefficients pick up
/// e^{i k phi0}; assembled forms are invariant after the matching fibre
/// shift phi -> phi - phi0.
CRData cr_data_transform(const CRData& data, const CRGeometry& geom, const ExprPtr& phi0);

/// Multiply a metric field by a conformal factor field (omega squared).
MetricField conformally_scaled(MetricField g, ScalarFieldFn omega_squared);

/// omega^2 = sec^2(phi - phi0) on the bundle chart (phi the last coord).
ScalarFieldFn sec2_profile(int bundle_dim, double phi0 = 0.0);

/// Constant-coefficient CR data of the almost Einstein scales over a
/// CR--Einstein base: xi_0^{(2k)} coefficients of the lambda_0 Fourier
/// family for given (m, Lambda, LambdaTilde, mu), plus the closed-form
/// series itself (characterize uses the same coefficients).
std::map<int, cplx> einstein_xi0_coefficients(int m, double Lambda, double LambdaTilde,
                                              cplx mu);

}  // namespace crfeff
