#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace crfeff {

using cplx = std::complex<double>;

constexpr int kMaxChartDim = 8;

/// Multi-index bookkeeping for truncated Taylor expansions in `dim` real
/// variables up to total degree `order`.  Instances are interned: all jets
/// of the same (dim, order) share one table.
class JetSpace {
 public:
  static const JetSpace& get(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return size_; }

  const std::array<std::uint8_t, kMaxChartDim>& exponents(int k) const {
    return exps_[k];
  }
  int degree(int k) const { return deg_[k]; }
  /// Number of multi-indices with total degree <= d (prefix length in the
  /// graded ordering).
  int size_up_to(int d) const { return prefix_[d]; }

  /// Rank of a multi-index; -1 when the total degree exceeds `order`.
  int rank(const std::array<std::uint8_t, kMaxChartDim>& e) const;

  /// Rank of exps(i) + exps(j), or -1 on degree overflow.
  int product_index(int i, int j) const { return prod_[i * size_ + j]; }

  /// Rank of exps(k) + e_i, or -1 on degree overflow.
  int shift_index(int k, int i) const { return shift_[k * dim_ + i]; }

 private:
  JetSpace(int dim, int order);

  int dim_, order_, size_;
  std::vector<std::array<std::uint8_t, kMaxChartDim>> exps_;
  std::vector<int> deg_;
  std::vector<int> prefix_;
  std::vector<std::int32_t> prod_;
  std::vector<std::int32_t> shift_;
};

/// Truncated Taylor expansion of a complex-valued function of `dim` real
/// variables at a point.  Coefficients are stored densely in graded
/// lexicographic order; coeff[k] is the partial derivative divided by the
/// factorial of the multi-index (i.e. the Taylor coefficient).
class Jet {
 public:
  Jet() : sp_(nullptr) {}
  Jet(int dim, int order)
      : sp_(&JetSpace::get(dim, order)), c_(sp_->size(), cplx(0.0)) {}
  static Jet constant(cplx value, int dim, int order) {
    Jet j(dim, order);
    j.c_[0] = value;
    return j;
  }
  /// Jet of the coordinate function x^i with the given value at the point.
  static Jet variable(int i, cplx value, int dim, int order);

  bool valid() const { return sp_ != nullptr; }
  int dim() const { return sp_->dim(); }
  int order() const { return sp_->order(); }
  const JetSpace& space() const { return *sp_; }

  cplx value() const { return c_[0]; }
  cplx& operator[](int k) { return c_[k]; }
  const cplx& operator[](int k) const { return c_[k]; }
  int size() const { return static_cast<int>(c_.size()); }

  /// First-order coefficient on coordinate i (the partial derivative).
  cplx d1(int i) const;

  /// Taylor coefficient for an explicit exponent list.
  cplx coeff(std::initializer_list<int> exps) const;

  Jet truncated(int new_order) const;
  /// Reinterpret as a jet on a larger chart: coordinate i of this jet
  /// becomes coordinate map[i] of the target chart; the function does not
  /// depend on the remaining coordinates.
  Jet lifted(int new_dim, const std::vector<int>& map, int new_order) const;

  /// d/dx^i as a jet of one lower order.
  Jet derivative(int i) const;

  Jet conj() const;
  Jet real() const;
  Jet imag() const;

  /// Evaluate the truncated polynomial at an offset from the base point.
  cplx eval_shifted(const std::vector<double>& delta) const;

  double max_abs() const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(cplx s) { c_[0] += s; return *this; }
  Jet& operator-=(cplx s) { c_[0] -= s; return *this; }
  Jet& operator*=(cplx s);

  friend Jet operator+(Jet a, const Jet& b) { a += b; return a; }
  friend Jet operator-(Jet a, const Jet& b) { a -= b; return a; }
  friend Jet operator+(Jet a, cplx s) { a += s; return a; }
  friend Jet operator+(cplx s, Jet a) { a += s; return a; }
  friend Jet operator-(Jet a, cplx s) { a -= s; return a; }
  friend Jet operator-(cplx s, const Jet& a) { Jet r = -a; r += s; return r; }
  friend Jet operator*(Jet a, cplx s) { a *= s; return a; }
  friend Jet operator*(cplx s, Jet a) { a *= s; return a; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator/(Jet a, cplx s) { a *= 1.0 / s; return a; }

  /// Multiplicative inverse; requires a nonzero constant term.
  Jet inverse() const;

 private:
  const JetSpace* sp_;
  std::vector<cplx> c_;

  static void align(const Jet& a, const Jet& b, Jet& ta, Jet& tb);
};

/// Univariate analytic primitives applied to jets (Taylor recomposition).
Jet jet_exp(const Jet& a);
Jet jet_log(const Jet& a);
Jet jet_sqrt(const Jet& a);
Jet jet_sin(const Jet& a);
Jet jet_cos(const Jet& a);
/// a^p for a real constant exponent; requires a nonzero constant term
/// unless p is a small non-negative integer.
Jet jet_pow(const Jet& a, double p);

/// Wirtinger derivatives with respect to the complex pair
/// z = x^{re} + i x^{im}: (d/dz, d/dzbar), each of one lower order.
std::pair<Jet, Jet> wirtinger(const Jet& a, int re_index, int im_index);

}  // namespace crfeff
