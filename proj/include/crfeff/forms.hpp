#pragma once

#include <vector>

#include "crfeff/jet.hpp"
#include "crfeff/jetmat.hpp"

namespace crfeff {

/// Sorted index tuples for degree-p forms on a dim-dimensional chart.
class FormSpace {
 public:
  static const FormSpace& get(int dim, int degree);
  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(tuples_.size()); }
  const std::vector<int>& tuple(int k) const { return tuples_[k]; }
  int rank(const std::vector<int>& sorted_tuple) const;

 private:
  FormSpace(int dim, int degree);
  int dim_, degree_;
  std::vector<std::vector<int>> tuples_;
};

/// Pointwise differential form with jet coefficients in the coordinate
/// basis.  Components are stored on strictly increasing index tuples with
/// the convention  F(e_{i1},...,e_{ip}) = F_{i1...ip}  and
/// (a ^ b)(X,Y) = a(X) b(Y) - a(Y) b(X).
class FormValue {
 public:
  FormValue() : dim_(0), degree_(0) {}
  FormValue(int dim, int degree, int jet_dim, int jet_order);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(c_.size()); }
  Jet& operator[](int k) { return c_[k]; }
  const Jet& operator[](int k) const { return c_[k]; }
  const FormSpace& space() const;

  /// Component on an arbitrary (not necessarily sorted) tuple, with sign.
  Jet component(const std::vector<int>& tuple) const;

  FormValue conj() const;
  double max_abs() const;

  FormValue operator-() const;
  FormValue& operator+=(const FormValue& o);
  FormValue& operator-=(const FormValue& o);
  friend FormValue operator+(FormValue a, const FormValue& b) { a += b; return a; }
  friend FormValue operator-(FormValue a, const FormValue& b) { a -= b; return a; }
  friend FormValue operator*(const Jet& s, const FormValue& f);
  friend FormValue operator*(cplx s, FormValue f);

 private:
  int dim_, degree_;
  std::vector<Jet> c_;
};

/// Degree-1 form from coordinate components.
FormValue one_form(const std::vector<Jet>& comps);

/// Wedge product.
FormValue wedge(const FormValue& a, const FormValue& b);

/// Exterior derivative (differentiates the component jets; output jets
/// have one lower order).
FormValue exterior_derivative(const FormValue& f);

/// Interior product with a vector given by coordinate components.
FormValue interior(const std::vector<Jet>& v, const FormValue& f);

/// Evaluate a p-form on p vectors (jet coordinate components).
Jet contract(const FormValue& f, const std::vector<std::vector<Jet>>& vectors);

}  // namespace crfeff
