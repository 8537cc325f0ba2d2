#include "crfeff/forms.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace crfeff {

namespace {

void gen_tuples(int dim, int p, int start, std::vector<int>& cur,
                std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == p) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < dim; ++i) {
    cur.push_back(i);
    gen_tuples(dim, p, i + 1, cur, out);
    cur.pop_back();
  }
}

/// Sort a tuple in place, returning the permutation sign; 0 if repeated.
int sort_sign(std::vector<int>& t) {
  int sign = 1;
  for (size_t i = 1; i < t.size(); ++i) {
    size_t j = i;
    while (j > 0 && t[j - 1] > t[j]) {
      std::swap(t[j - 1], t[j]);
      sign = -sign;
      --j;
    }
  }
  for (size_t i = 1; i < t.size(); ++i)
    if (t[i - 1] == t[i]) return 0;
  return sign;
}

}  // namespace

FormSpace::FormSpace(int dim, int degree) : dim_(dim), degree_(degree) {
  if (degree < 0 || degree > dim) throw std::invalid_argument("FormSpace: bad degree");
  std::vector<int> cur;
  gen_tuples(dim, degree, 0, cur, tuples_);
}

const FormSpace& FormSpace::get(int dim, int degree) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<FormSpace>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, degree);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::unique_ptr<FormSpace>(new FormSpace(dim, degree))).first;
  return *it->second;
}

int FormSpace::rank(const std::vector<int>& t) const {
  for (int k = 0; k < size(); ++k)
    if (tuples_[k] == t) return k;
  return -1;
}

FormValue::FormValue(int dim, int degree, int jet_dim, int jet_order)
    : dim_(dim), degree_(degree) {
  c_.assign(FormSpace::get(dim, degree).size(), Jet(jet_dim, jet_order));
}

const FormSpace& FormValue::space() const { return FormSpace::get(dim_, degree_); }

Jet FormValue::component(const std::vector<int>& tuple) const {
  std::vector<int> t = tuple;
  int s = sort_sign(t);
  if (s == 0) return Jet(c_[0].dim(), c_[0].order());
  int k = space().rank(t);
  return s > 0 ? c_[k] : -c_[k];
}

FormValue FormValue::conj() const {
  FormValue r = *this;
  for (auto& j : r.c_) j = j.conj();
  return r;
}

double FormValue::max_abs() const {
  double v = 0.0;
  for (const auto& j : c_) v = std::max(v, j.max_abs());
  return v;
}

FormValue FormValue::operator-() const {
  FormValue r = *this;
  for (auto& j : r.c_) j = -j;
  return r;
}

FormValue& FormValue::operator+=(const FormValue& o) {
  if (dim_ != o.dim_ || degree_ != o.degree_)
    throw std::invalid_argument("FormValue: mismatch in +=");
  for (int k = 0; k < size(); ++k) c_[k] += o.c_[k];
  return *this;
}

FormValue& FormValue::operator-=(const FormValue& o) {
  if (dim_ != o.dim_ || degree_ != o.degree_)
    throw std::invalid_argument("FormValue: mismatch in -=");
  for (int k = 0; k < size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

FormValue operator*(const Jet& s, const FormValue& f) {
  FormValue r = f;
  for (auto& j : r.c_) j = s * j;
  return r;
}

FormValue operator*(cplx s, FormValue f) {
  for (int k = 0; k < f.size(); ++k) f[k] *= s;
  return f;
}

FormValue one_form(const std::vector<Jet>& comps) {
  int dim = static_cast<int>(comps.size());
  FormValue f(dim, 1, comps[0].dim(), comps[0].order());
  for (int i = 0; i < dim; ++i) f[i] = comps[i];
  return f;
}

FormValue wedge(const FormValue& a, const FormValue& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("wedge: dimension mismatch");
  int p = a.degree(), q = b.degree();
  if (p + q > a.dim()) throw std::invalid_argument("wedge: degree exceeds dimension");
  const FormSpace& sa = a.space();
  const FormSpace& sb = b.space();
  const FormSpace& so = FormSpace::get(a.dim(), p + q);
  FormValue out(a.dim(), p + q, a[0].dim(), std::min(a[0].order(), b[0].order()));
  for (int i = 0; i < sa.size(); ++i) {
    if (a[i].max_abs() == 0.0) continue;
    for (int j = 0; j < sb.size(); ++j) {
      if (b[j].max_abs() == 0.0) continue;
      std::vector<int> t = sa.tuple(i);
      t.insert(t.end(), sb.tuple(j).begin(), sb.tuple(j).end());
      int s = sort_sign(t);
      if (s == 0) continue;
      int k = so.rank(t);
      if (s > 0)
        out[k] += a[i] * b[j];
      else
        out[k] -= a[i] * b[j];
    }
  }
  return out;
}

FormValue exterior_derivative(const FormValue& f) {
  int p = f.degree();
  const FormSpace& so = FormSpace::get(f.dim(), p + 1);
  FormValue out(f.dim(), p + 1, f[0].dim(), f[0].order() - 1);
  const FormSpace& si = f.space();
  for (int k = 0; k < so.size(); ++k) {
    const std::vector<int>& U = so.tuple(k);
    Jet acc(f[0].dim(), f[0].order() - 1);
    for (int t = 0; t <= p; ++t) {
      std::vector<int> rest;
      rest.reserve(p);
      for (int s = 0; s <= p; ++s)
        if (s != t) rest.push_back(U[s]);
      int r = si.rank(rest);
      Jet term = f[r].derivative(U[t]);
      if (t % 2 == 0)
        acc += term;
      else
        acc -= term;
    }
    out[k] = acc;
  }
  return out;
}

FormValue interior(const std::vector<Jet>& v, const FormValue& f) {
  int p = f.degree();
  if (p == 0) throw std::invalid_argument("interior: degree-0 form");
  const FormSpace& so = FormSpace::get(f.dim(), p - 1);
  int jd = f[0].dim(), jo = std::min(f[0].order(), v[0].order());
  FormValue out(f.dim(), p - 1, jd, jo);
  for (int k = 0; k < so.size(); ++k) {
    Jet acc(jd, jo);
    for (int i = 0; i < f.dim(); ++i) {
      if (v[i].max_abs() == 0.0) continue;
      std::vector<int> t;
      t.reserve(p);
      t.push_back(i);
      t.insert(t.end(), so.tuple(k).begin(), so.tuple(k).end());
      std::vector<int> ts = t;
      int s = sort_sign(ts);
      if (s == 0) continue;
      int r = f.space().rank(ts);
      if (s > 0)
        acc += v[i] * f[r];
      else
        acc -= v[i] * f[r];
    }
    out[k] = acc;
  }
  return out;
}

Jet contract(const FormValue& f, const std::vector<std::vector<Jet>>& vectors) {
  if (static_cast<int>(vectors.size()) != f.degree())
    throw std::invalid_argument("contract: wrong number of vectors");
  FormValue cur = f;
  for (const auto& v : vectors) {
    if (cur.degree() == 0) break;
    cur = interior(v, cur);
  }
  return cur[0];
}

}  // namespace crfeff
