#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "crfeff/expr.hpp"
#include "crfeff/forms.hpp"

namespace crfeff {

/// Pointwise evaluation hooks: everything downstream consumes fields only
/// through these, so geometries can be expression-backed or derived
/// (rescaled coframes, solver-backed gauge forms, ...).
using ScalarFieldFn = std::function<Jet(const Point&, int order)>;
using OneFormFieldFn = std::function<std::vector<Jet>(const Point&, int order)>;

/// Fourier data of a perturbation one-form: trivialized coefficients
/// xi_alpha^(k) (any integer k) and xi_0^(k) (k >= 0; negative k follow by
/// conjugation).  Coefficients are scalar fields on the base.
struct CRData {
  std::map<std::pair<int, int>, ScalarFieldFn> xi_alpha;  // (alpha in 1..m, k)
  std::map<int, ScalarFieldFn> xi_zero;                   // k >= 0
  bool empty() const { return xi_alpha.empty() && xi_zero.empty(); }
};

/// Expression-level perturbation declaration ([perturbation] file section).
struct PerturbationSpec {
  double alpha = 1.0;
  std::map<std::pair<int, int>, ExprPtr> xi_alpha;
  std::map<int, ExprPtr> xi_zero;
  bool empty() const { return xi_alpha.empty() && xi_zero.empty(); }
};

struct CRGeometry {
  std::string name;
  Chart chart;
  LetTable lets;
  int m = 0;

  OneFormFieldFn theta;                    // real contact form
  std::vector<OneFormFieldFn> theta_alpha; // m admissible complex one-forms

  /// Expression sources when the geometry is file/expression backed (kept
  /// for serialization; derived geometries leave these empty).
  ExprPtr theta_expr;
  std::vector<ExprPtr> theta_alpha_expr;

  /// |c| with zeta = c theta^theta^1^...^theta^m volume-normalised.
  double vol_factor = 1.0;

  /// Declared scales: sigma-scales are weight-(1,0) multiples of the
  /// canonical reference density, CR scales real positive multiples of the
  /// reference CR scale.
  std::map<std::string, ExprPtr> sigma_scales;
  std::map<std::string, ExprPtr> cr_scales;

  PerturbationSpec perturbation;

  int dim() const { return chart.dim(); }
  bool admissible(const Point& p) const;

  Jet eval_scalar(const ExprPtr& e, const Point& p, int order) const;
  std::vector<Jet> eval_one_form(const ExprPtr& e, const Point& p, int order) const;
};

/// Build the evaluation hooks from the stored expressions (used by the
/// file loader and the gallery).
void bind_expression_fields(CRGeometry& g);

/// Geometry file front end.  Sections: [chart], [let], [contact_form],
/// [coframe], [perturbation], [scales]; see docs/geometry_format.md.
CRGeometry load_geometry(const std::string& text);
CRGeometry load_geometry_file(const std::string& path);
std::string serialize_geometry(const CRGeometry& g);

/// Turn the expression-level perturbation into scalar fields.
CRData bind_cr_data(const CRGeometry& g);

}  // namespace crfeff
