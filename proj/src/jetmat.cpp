#include "crfeff/jetmat.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>

namespace crfeff {

JetMat JetMat::conj() const {
  JetMat r = *this;
  for (auto& j : r.m_) j = j.conj();
  return r;
}

JetMat JetMat::transpose() const {
  if (rows_ == 0) return *this;
  JetMat r(cols_, rows_, m_[0].dim(), m_[0].order());
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

JetMat operator*(const JetMat& a, const JetMat& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("JetMat: shape mismatch");
  int dim = a.m_[0].dim();
  int order = std::min(a.m_[0].order(), b.m_[0].order());
  JetMat r(a.rows(), b.cols(), dim, order);
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const Jet& aik = a(i, k);
      if (aik.max_abs() == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

JetMat operator+(const JetMat& a, const JetMat& b) {
  JetMat r = a;
  for (size_t i = 0; i < r.m_.size(); ++i) r.m_[i] += b.m_[i];
  return r;
}

JetMat operator-(const JetMat& a, const JetMat& b) {
  JetMat r = a;
  for (size_t i = 0; i < r.m_.size(); ++i) r.m_[i] -= b.m_[i];
  return r;
}

double JetMat::max_abs() const {
  double v = 0.0;
  for (const auto& j : m_) v = std::max(v, j.max_abs());
  return v;
}

double JetMat::max_abs_value() const {
  double v = 0.0;
  for (const auto& j : m_) v = std::max(v, std::abs(j.value()));
  return v;
}

namespace {

Eigen::MatrixXcd constant_part(const JetMat& A) {
  Eigen::MatrixXcd M(A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) M(i, j) = A(i, j).value();
  return M;
}

}  // namespace

JetMat jet_solve(const JetMat& A, const JetMat& b) {
  if (A.rows() != A.cols() || A.rows() != b.rows())
    throw std::invalid_argument("jet_solve: shape mismatch");
  Eigen::MatrixXcd A0 = constant_part(A);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A0);
  if (std::abs(lu.determinant()) < 1e-300)
    throw std::domain_error("jet_solve: singular constant term");

  int dim = b(0, 0).dim();
  int order = std::min(A(0, 0).order(), b(0, 0).order());
  int n = A.rows(), k = b.cols();

  auto apply_lu_inv = [&](JetMat& R) {
    // x += A0^{-1} R, coefficient level by coefficient level.
    Eigen::MatrixXcd rhs(n, k);
    const JetSpace& sp = JetSpace::get(dim, order);
    JetMat out(n, k, dim, order);
    for (int c = 0; c < sp.size(); ++c) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) rhs(i, j) = R(i, j)[c];
      Eigen::MatrixXcd sol = lu.solve(rhs);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) out(i, j)[c] = sol(i, j);
    }
    return out;
  };

  JetMat bt(n, k, dim, order);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) bt(i, j) = b(i, j).truncated(order);
  JetMat At(n, n, dim, order);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) At(i, j) = A(i, j).truncated(order);

  JetMat x = apply_lu_inv(bt);
  // Each pass fixes one more total degree; order passes suffice.
  for (int pass = 0; pass < order; ++pass) {
    JetMat r = bt - At * x;
    JetMat dx = apply_lu_inv(r);
    x = x + dx;
  }
  return x;
}

JetMat jet_inverse(const JetMat& A) {
  int n = A.rows();
  int dim = A(0, 0).dim(), order = A(0, 0).order();
  JetMat I(n, n, dim, order);
  for (int i = 0; i < n; ++i) I(i, i) = Jet::constant(1.0, dim, order);
  return jet_solve(A, I);
}

LstsqResult jet_lstsq(const JetMat& A, const JetMat& b) {
  if (A.rows() != b.rows()) throw std::invalid_argument("jet_lstsq: shape mismatch");
  Eigen::MatrixXcd A0 = constant_part(A);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A0, Eigen::ComputeThinU | Eigen::ComputeThinV);

  int dim = A(0, 0).dim();
  int order = std::min(A(0, 0).order(), b(0, 0).order());
  int nr = A.rows(), nc = A.cols(), k = b.cols();

  JetMat bt(nr, k, dim, order);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < k; ++j) bt(i, j) = b(i, j).truncated(order);
  JetMat At(nr, nc, dim, order);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) At(i, j) = A(i, j).truncated(order);

  auto apply_pinv = [&](const JetMat& R) {
    const JetSpace& sp = JetSpace::get(dim, order);
    Eigen::MatrixXcd rhs(nr, k);
    JetMat out(nc, k, dim, order);
    for (int c = 0; c < sp.size(); ++c) {
      for (int i = 0; i < nr; ++i)
        for (int j = 0; j < k; ++j) rhs(i, j) = R(i, j)[c];
      Eigen::MatrixXcd sol = svd.solve(rhs);
      for (int i = 0; i < nc; ++i)
        for (int j = 0; j < k; ++j) out(i, j)[c] = sol(i, j);
    }
    return out;
  };

  JetMat x = apply_pinv(bt);
  for (int pass = 0; pass < order; ++pass) {
    JetMat r = bt - At * x;
    x = x + apply_pinv(r);
  }

  LstsqResult res;
  JetMat r = bt - At * x;
  res.residual = r.max_abs();
  res.x = std::move(x);
  res.min_singular = svd.singularValues()(svd.singularValues().size() - 1);
  res.max_singular = svd.singularValues()(0);
  return res;
}

}  // namespace crfeff
