#include "crfeff/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace crfeff {

namespace {

void enumerate_rec(int dim, int order, int pos, int remaining,
                   std::array<std::uint8_t, kMaxChartDim>& cur,
                   std::vector<std::array<std::uint8_t, kMaxChartDim>>& out) {
  if (pos == dim) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    cur[pos] = static_cast<std::uint8_t>(e);
    enumerate_rec(dim, order, pos + 1, remaining - e, cur, out);
  }
  cur[pos] = 0;
}

std::uint64_t pack_key(const std::array<std::uint8_t, kMaxChartDim>& e, int dim) {
  std::uint64_t k = 0;
  for (int i = 0; i < dim; ++i) k = (k << 8) | e[i];
  return k;
}

}  // namespace

JetSpace::JetSpace(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1 || dim > kMaxChartDim) throw std::invalid_argument("JetSpace: bad dim");
  if (order < 0 || order > 12) throw std::invalid_argument("JetSpace: bad order");

  // Enumerate per degree so indices come out graded.
  for (int d = 0; d <= order; ++d) {
    std::vector<std::array<std::uint8_t, kMaxChartDim>> level;
    std::array<std::uint8_t, kMaxChartDim> cur{};
    enumerate_rec(dim, order, 0, d, cur, level);
    for (auto& e : level) {
      int tot = 0;
      for (int i = 0; i < dim; ++i) tot += e[i];
      if (tot == d) {
        exps_.push_back(e);
        deg_.push_back(d);
      }
    }
    prefix_.push_back(static_cast<int>(exps_.size()));
  }
  size_ = static_cast<int>(exps_.size());

  std::map<std::uint64_t, int> lookup;
  for (int k = 0; k < size_; ++k) lookup[pack_key(exps_[k], dim_)] = k;

  prod_.assign(static_cast<size_t>(size_) * size_, -1);
  for (int i = 0; i < size_; ++i) {
    for (int j = 0; j < size_; ++j) {
      if (deg_[i] + deg_[j] > order_) continue;
      std::array<std::uint8_t, kMaxChartDim> s{};
      for (int t = 0; t < dim_; ++t) s[t] = static_cast<std::uint8_t>(exps_[i][t] + exps_[j][t]);
      prod_[static_cast<size_t>(i) * size_ + j] = lookup.at(pack_key(s, dim_));
    }
  }

  shift_.assign(static_cast<size_t>(size_) * dim_, -1);
  for (int k = 0; k < size_; ++k) {
    if (deg_[k] + 1 > order_) continue;
    for (int i = 0; i < dim_; ++i) {
      std::array<std::uint8_t, kMaxChartDim> s = exps_[k];
      s[i] = static_cast<std::uint8_t>(s[i] + 1);
      shift_[static_cast<size_t>(k) * dim_ + i] = lookup.at(pack_key(s, dim_));
    }
  }
}

int JetSpace::rank(const std::array<std::uint8_t, kMaxChartDim>& e) const {
  int tot = 0;
  for (int i = 0; i < dim_; ++i) tot += e[i];
  if (tot > order_) return -1;
  // Binary search within the degree level; levels are lexicographic.
  int lo = (tot == 0) ? 0 : prefix_[tot - 1];
  int hi = prefix_[tot];
  for (int k = lo; k < hi; ++k) {
    if (exps_[k] == e) return k;
  }
  return -1;
}

const JetSpace& JetSpace::get(int dim, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, order);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::unique_ptr<JetSpace>(new JetSpace(dim, order))).first;
  }
  return *it->second;
}

Jet Jet::variable(int i, cplx value, int dim, int order) {
  if (i < 0 || i >= dim) throw std::out_of_range("Jet::variable: coordinate index");
  if (order < 1) throw std::invalid_argument("Jet::variable: order must be >= 1");
  Jet j(dim, order);
  j.c_[0] = value;
  std::array<std::uint8_t, kMaxChartDim> e{};
  e[i] = 1;
  j.c_[j.sp_->rank(e)] = 1.0;
  return j;
}

cplx Jet::d1(int i) const {
  std::array<std::uint8_t, kMaxChartDim> e{};
  e[i] = 1;
  int k = sp_->rank(e);
  return k >= 0 ? c_[k] : cplx(0.0);
}

cplx Jet::coeff(std::initializer_list<int> exps) const {
  std::array<std::uint8_t, kMaxChartDim> e{};
  int i = 0;
  for (int v : exps) e[i++] = static_cast<std::uint8_t>(v);
  int k = sp_->rank(e);
  if (k < 0) throw std::out_of_range("Jet::coeff: degree exceeds order");
  return c_[k];
}

Jet Jet::truncated(int new_order) const {
  if (new_order >= order()) return *this;
  Jet r(dim(), new_order);
  for (int k = 0; k < r.size(); ++k) r.c_[k] = c_[k];
  return r;
}

Jet Jet::lifted(int new_dim, const std::vector<int>& map, int new_order) const {
  Jet r(new_dim, new_order);
  const JetSpace& rs = r.space();
  int limit = std::min(order(), new_order);
  for (int k = 0; k < sp_->size(); ++k) {
    if (sp_->degree(k) > limit) break;
    if (c_[k] == cplx(0.0)) continue;
    std::array<std::uint8_t, kMaxChartDim> e{};
    for (int i = 0; i < dim(); ++i) e[map[i]] = sp_->exponents(k)[i];
    r.c_[rs.rank(e)] = c_[k];
  }
  return r;
}

Jet Jet::derivative(int i) const {
  if (order() < 1) throw std::invalid_argument("Jet::derivative: order 0 input");
  Jet r(dim(), order() - 1);
  const JetSpace& rs = r.space();
  for (int k = 0; k < rs.size(); ++k) {
    // coefficient of kappa in d/dx^i = (kappa_i + 1) * coeff(kappa + e_i)
    std::array<std::uint8_t, kMaxChartDim> e = rs.exponents(k);
    double mult = e[i] + 1.0;
    e[i] = static_cast<std::uint8_t>(e[i] + 1);
    int src = sp_->rank(e);
    r.c_[k] = mult * c_[src];
  }
  return r;
}

Jet Jet::conj() const {
  Jet r = *this;
  for (auto& v : r.c_) v = std::conj(v);
  return r;
}

Jet Jet::real() const {
  Jet r = *this;
  for (auto& v : r.c_) v = cplx(v.real(), 0.0);
  return r;
}

Jet Jet::imag() const {
  Jet r = *this;
  for (auto& v : r.c_) v = cplx(v.imag(), 0.0);
  return r;
}

cplx Jet::eval_shifted(const std::vector<double>& delta) const {
  cplx acc = 0.0;
  for (int k = 0; k < size(); ++k) {
    if (c_[k] == cplx(0.0)) continue;
    double mono = 1.0;
    for (int i = 0; i < dim(); ++i) {
      for (int e = 0; e < sp_->exponents(k)[i]; ++e) mono *= delta[i];
    }
    acc += c_[k] * mono;
  }
  return acc;
}

double Jet::max_abs() const {
  double m = 0.0;
  for (const auto& v : c_) m = std::max(m, std::abs(v));
  return m;
}

void Jet::align(const Jet& a, const Jet& b, Jet& ta, Jet& tb) {
  if (!a.valid() || !b.valid()) throw std::invalid_argument("Jet: uninitialized operand");
  if (a.dim() != b.dim()) throw std::invalid_argument("Jet: dimension mismatch");
  int ord = std::min(a.order(), b.order());
  ta = a.truncated(ord);
  tb = b.truncated(ord);
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& v : r.c_) v = -v;
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  if (o.order() < order()) *this = truncated(o.order());
  for (int k = 0; k < size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (o.order() < order()) *this = truncated(o.order());
  for (int k = 0; k < size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::operator*=(cplx s) {
  for (auto& v : c_) v *= s;
  return *this;
}

Jet operator*(const Jet& a0, const Jet& b0) {
  // Accumulation is grouped symmetrically in (i, j) so that a*b and b*a
  // produce bit-identical coefficients.
  Jet a, b;
  Jet::align(a0, b0, a, b);
  const JetSpace& sp = a.space();
  Jet r(a.dim(), a.order());
  int n = sp.size();
  for (int i = 0; i < n; ++i) {
    int jmax = sp.size_up_to(sp.order() - sp.degree(i));
    if (i >= jmax) break;
    cplx ai = a.c_[i], bi = b.c_[i];
    if (ai != cplx(0.0) && bi != cplx(0.0)) r.c_[sp.product_index(i, i)] += ai * bi;
    for (int j = i + 1; j < jmax; ++j) {
      cplx t = 0.0;
      if (ai != cplx(0.0) && b.c_[j] != cplx(0.0)) t += ai * b.c_[j];
      if (bi != cplx(0.0) && a.c_[j] != cplx(0.0)) t += a.c_[j] * bi;
      if (t != cplx(0.0)) r.c_[sp.product_index(i, j)] += t;
    }
  }
  return r;
}

Jet Jet::inverse() const {
  if (std::abs(c_[0]) == 0.0) throw std::domain_error("Jet::inverse: zero constant term");
  const JetSpace& sp = *sp_;
  Jet x(dim(), order());
  x.c_[0] = 1.0 / c_[0];
  // Solve (this) * x = 1 degree by degree.
  for (int d = 1; d <= order(); ++d) {
    int lo = sp.size_up_to(d - 1), hi = sp.size_up_to(d);
    for (int k = lo; k < hi; ++k) {
      // sum over splittings kappa = mu + nu with mu != 0
      cplx acc = 0.0;
      for (int i = 1; i < hi; ++i) {
        if (sp.degree(i) > d) break;
        if (c_[i] == cplx(0.0)) continue;
        // need nu with mu + nu = kappa: nu = kappa - exps(i)
        std::array<std::uint8_t, kMaxChartDim> nu{};
        bool ok = true;
        for (int t = 0; t < dim(); ++t) {
          int v = sp.exponents(k)[t] - sp.exponents(i)[t];
          if (v < 0) { ok = false; break; }
          nu[t] = static_cast<std::uint8_t>(v);
        }
        if (!ok) continue;
        acc += c_[i] * x.c_[sp.rank(nu)];
      }
      x.c_[k] = -acc / c_[0];
    }
  }
  return x;
}

Jet operator/(const Jet& a, const Jet& b) { return a * b.inverse(); }

namespace {

/// Recompose f(a) from the scalar Taylor coefficients of f at a's value:
/// f(a) = sum_n coeffs[n] * (a - a0)^n, Horner over jets.
Jet recompose(const Jet& a, const std::vector<cplx>& coeffs) {
  Jet u = a;
  u[0] = 0.0;  // nilpotent part
  int K = a.order();
  Jet acc = Jet::constant(coeffs[K], a.dim(), a.order());
  for (int n = K - 1; n >= 0; --n) {
    acc = acc * u;
    acc += coeffs[n];
  }
  return acc;
}

}  // namespace

Jet jet_exp(const Jet& a) {
  cplx e0 = std::exp(a.value());
  std::vector<cplx> c(a.order() + 1);
  double fact = 1.0;
  for (int n = 0; n <= a.order(); ++n) {
    if (n > 0) fact *= n;
    c[n] = e0 / fact;
  }
  return recompose(a, c);
}

Jet jet_log(const Jet& a) {
  cplx a0 = a.value();
  if (std::abs(a0) == 0.0) throw std::domain_error("jet_log: log of zero");
  std::vector<cplx> c(a.order() + 1);
  c[0] = std::log(a0);
  // d^n/dx^n log = (-1)^(n-1) (n-1)! / x^n -> Taylor coeff (-1)^(n-1)/(n x^n)
  cplx p = 1.0;
  for (int n = 1; n <= a.order(); ++n) {
    p /= a0;
    c[n] = ((n % 2 == 1) ? 1.0 : -1.0) * p / static_cast<double>(n);
  }
  return recompose(a, c);
}

Jet jet_pow(const Jet& a, double p) {
  double ip;
  if (std::modf(p, &ip) == 0.0 && ip >= 0 && ip <= 16) {
    // small integer power: repeated multiplication, no domain restriction
    int n = static_cast<int>(ip);
    Jet r = Jet::constant(1.0, a.dim(), a.order());
    for (int i = 0; i < n; ++i) r = r * a;
    return r;
  }
  cplx a0 = a.value();
  if (std::abs(a0) == 0.0) throw std::domain_error("jet_pow: fractional power of zero");
  std::vector<cplx> c(a.order() + 1);
  // Taylor coeffs: binom(p, n) * a0^(p - n)
  cplx base = std::pow(a0, cplx(p));
  cplx binom = 1.0;
  cplx inv = 1.0 / a0;
  for (int n = 0; n <= a.order(); ++n) {
    if (n > 0) {
      binom *= cplx(p - (n - 1)) / static_cast<double>(n);
      base *= inv;
    }
    c[n] = binom * base;
  }
  return recompose(a, c);
}

Jet jet_sqrt(const Jet& a) { return jet_pow(a, 0.5); }

Jet jet_sin(const Jet& a) {
  cplx s0 = std::sin(a.value()), c0 = std::cos(a.value());
  std::vector<cplx> c(a.order() + 1);
  double fact = 1.0;
  for (int n = 0; n <= a.order(); ++n) {
    if (n > 0) fact *= n;
    cplx d;
    switch (n % 4) {
      case 0: d = s0; break;
      case 1: d = c0; break;
      case 2: d = -s0; break;
      default: d = -c0; break;
    }
    c[n] = d / fact;
  }
  return recompose(a, c);
}

Jet jet_cos(const Jet& a) {
  cplx s0 = std::sin(a.value()), c0 = std::cos(a.value());
  std::vector<cplx> c(a.order() + 1);
  double fact = 1.0;
  for (int n = 0; n <= a.order(); ++n) {
    if (n > 0) fact *= n;
    cplx d;
    switch (n % 4) {
      case 0: d = c0; break;
      case 1: d = -s0; break;
      case 2: d = -c0; break;
      default: d = s0; break;
    }
    c[n] = d / fact;
  }
  return recompose(a, c);
}

std::pair<Jet, Jet> wirtinger(const Jet& a, int re_index, int im_index) {
  Jet dx = a.derivative(re_index);
  Jet dy = a.derivative(im_index);
  Jet dz = 0.5 * (dx - cplx(0, 1) * dy);
  Jet dzbar = 0.5 * (dx + cplx(0, 1) * dy);
  return {dz, dzbar};
}

}  // namespace crfeff
