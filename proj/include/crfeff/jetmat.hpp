#pragma once

#include <vector>

#include "crfeff/jet.hpp"

namespace crfeff {

/// Dense matrix of jets.  Used for frame/coframe matrices, Levi forms and
/// the pointwise linear systems solved throughout the engine.
class JetMat {
 public:
  JetMat() : rows_(0), cols_(0) {}
  JetMat(int rows, int cols, int dim, int order)
      : rows_(rows), cols_(cols), m_(static_cast<size_t>(rows) * cols, Jet(dim, order)) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Jet& operator()(int r, int c) { return m_[static_cast<size_t>(r) * cols_ + c]; }
  const Jet& operator()(int r, int c) const { return m_[static_cast<size_t>(r) * cols_ + c]; }

  JetMat conj() const;
  JetMat transpose() const;

  friend JetMat operator*(const JetMat& a, const JetMat& b);
  friend JetMat operator+(const JetMat& a, const JetMat& b);
  friend JetMat operator-(const JetMat& a, const JetMat& b);

  double max_abs() const;
  double max_abs_value() const;  // constant terms only

 private:
  int rows_, cols_;
  std::vector<Jet> m_;
};

/// Solve A x = b for square A whose constant-term matrix is invertible.
/// Exact to the truncation order (scalar LU plus degree-by-degree
/// correction).  Throws on singular constant term.
JetMat jet_solve(const JetMat& A, const JetMat& b);

/// Inverse of a square jet matrix.
JetMat jet_inverse(const JetMat& A);

/// Least-squares solution of an overdetermined CONSISTENT system A x = b
/// (complex entries are handled by the caller splitting into real
/// equations when conjugations occur; this routine works directly over
/// complex jets).  Returns x and reports the residual max-norm and the
/// scalar condition diagnostics of the constant-term matrix.
struct LstsqResult {
  JetMat x;
  double residual;       // max abs over all jet coefficients of b - A x
  double min_singular;   // of the constant-term matrix
  double max_singular;
};
LstsqResult jet_lstsq(const JetMat& A, const JetMat& b);

}  // namespace crfeff
