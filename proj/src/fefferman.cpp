#include "crfeff/fefferman.hpp"

#include <cmath>

namespace crfeff {

FeffermanMetric::FeffermanMetric(CRGeometry geom, double alpha, CRData data,
                                 ExprPtr sigma_factor)
    : geom_(std::make_shared<CRGeometry>(std::move(geom))),
      alpha_(alpha),
      data_(std::move(data)),
      sigma_factor_(std::move(sigma_factor)) {}

std::shared_ptr<const FeffermanMetric::Tower> FeffermanMetric::tower(const Point& bp,
                                                                     int solve_order) const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto key = std::make_pair(bp, solve_order);
  auto it = cache_->map.find(key);
  if (it != cache_->map.end()) return it->second;
  auto t = std::make_shared<Tower>();
  t->sg = solve_webster(*geom_, bp, solve_order);
  t->wc = webster_curvature(t->sg);
  auto sp = std::shared_ptr<const Tower>(t);
  if (cache_->map.size() > 512) cache_->map.clear();
  cache_->map[key] = sp;
  return sp;
}

namespace {

std::vector<int> base_lift_map(int base_dim) {
  std::vector<int> map(base_dim);
  for (int i = 0; i < base_dim; ++i) map[i] = i;
  return map;
}

}  // namespace

JetMat FeffermanMetric::eval(const Point& bp, int order) const {
  const int m = geom_->m;
  const int bdim = geom_->dim();
  const int D = bdim + 1;
  if (static_cast<int>(bp.size()) != D)
    throw std::invalid_argument("FeffermanMetric::eval: bundle point has wrong dimension");
  Point x(bp.begin(), bp.end() - 1);
  double phi = bp.back();

  auto tw = tower(x, order + 1);
  const SolvedGeometry& sg = tw->sg;
  const WebsterCurvature& wc = tw->wc;
  auto lift_map = base_lift_map(bdim);
  auto lift = [&](const Jet& j) { return j.lifted(D, lift_map, order); };

  // theta and theta^alpha coordinate components on the bundle.
  std::vector<Jet> theta(D, Jet(D, order));
  std::vector<std::vector<Jet>> tha(m, std::vector<Jet>(D, Jet(D, order)));
  for (int i = 0; i < bdim; ++i) {
    theta[i] = lift(sg.coframe(0, i));
    for (int a = 0; a < m; ++a) tha[a][i] = lift(sg.coframe(1 + a, i));
  }

  // gauge one-form (i/2)(sigma^{-1} nabla sigma - conj): coframe components
  // (i/2)(gamma_I - conj(gamma)_I) with gamma the reference-density gauge
  // plus dlog of the declared factor.
  std::vector<Jet> gauge_cof(2 * m + 1);
  for (int I = 0; I < 2 * m + 1; ++I) {
    Jet gI = sg.gauge_gamma(I);
    Jet gbarI = sg.gauge_gamma(sg.conj_dir(I)).conj();
    gauge_cof[I] = cplx(0, 0.5) * (gI - gbarI);
  }
  if (sigma_factor_) {
    Jet gf = geom_->eval_scalar(sigma_factor_, x, order + 2);
    for (int I = 0; I < 2 * m + 1; ++I) {
      Jet dI = sg.frame_deriv(I, gf) / gf;
      Jet dbarI = (sg.frame_deriv(sg.conj_dir(I), gf) / gf).conj();
      gauge_cof[I] += cplx(0, 0.5) * (dI - dbarI);
    }
  }
  std::vector<Jet> gauge_base = sg.coordinate_form(gauge_cof);

  // scalar coefficient of theta: -(Rho/(m+2) + alpha ||N||^2/(2m(m+1)))
  Jet coef = -(wc.rho_scalar * cplx(1.0 / (m + 2)) +
               wc.n_norm2 * cplx(alpha_ / (2.0 * m * (m + 1))));

  // lambda-tilde bundle coordinate components
  std::vector<Jet> lambda(D, Jet(D, order));
  for (int i = 0; i < bdim; ++i)
    lambda[i] = lift(gauge_base[i]) + lift(coef) * theta[i];
  lambda[D - 1] = Jet::constant(1.0, D, order);  // dphi

  // perturbation one-form
  if (!data_.empty()) {
    Jet phij = Jet::variable(D - 1, phi, D, order);
    std::vector<Jet> xi_a(m, Jet(D, order));
    for (const auto& [key, fn] : data_.xi_alpha) {
      auto [a, k] = key;
      Jet c = lift(fn(x, order));
      Jet ph = jet_exp(cplx(0, k) * phij);
      xi_a[a - 1] += c * ph;
    }
    Jet xi0(D, order);
    for (const auto& [k, fn] : data_.xi_zero) {
      Jet c = lift(fn(x, order));
      if (k == 0) {
        if (c.imag().max_abs() > 1e-10 * std::max(1.0, c.max_abs()))
          throw std::runtime_error("perturbation: xi_0^(0) must be real");
        xi0 += c.real();
      } else {
        Jet t = c * jet_exp(cplx(0, k) * phij);
        xi0 += t + t.conj();
      }
    }
    for (int i = 0; i < bdim; ++i) {
      Jet acc(D, order);
      for (int a = 0; a < m; ++a) {
        Jet t = xi_a[a] * tha[a][i];
        acc += t + t.conj();
      }
      acc += xi0 * theta[i];
      lambda[i] += acc;
    }
  }

  // g = 2 (theta x lambda + lambda x theta) + h_{a bbar}(th^a x conj th^b + c.c.)
  JetMat g(D, D, D, order);
  for (int i = 0; i < D; ++i)
    for (int j = i; j < D; ++j) {
      Jet v = cplx(2.0) * (theta[i] * lambda[j] + lambda[i] * theta[j]);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          Jet hab = lift(sg.h(a, b));
          Jet t = hab * tha[a][i] * tha[b][j].conj();
          v += t + (hab * tha[a][j] * tha[b][i].conj());
        }
      double scale = std::max(1.0, v.max_abs());
      if (v.imag().max_abs() > 1e-9 * scale)
        throw std::runtime_error("FeffermanMetric: metric components are not real");
      g(i, j) = v.real();
      g(j, i) = g(i, j);
    }
  return g;
}

MetricField FeffermanMetric::field() const {
  auto self = std::make_shared<FeffermanMetric>(*this);
  MetricField mf;
  mf.dim = bundle_dim();
  mf.eval = [self](const Point& p, int order) { return self->eval(p, order); };
  return mf;
}

FeffermanMetric::Lambda FeffermanMetric::lambda_decomposition(const Point& bp) const {
  // Contract the assembled lambda-tilde with the dual frame of the base.
  const int m = geom_->m;
  const int bdim = geom_->dim();
  Point x(bp.begin(), bp.end() - 1);
  auto tw = tower(x, 2);
  const SolvedGeometry& sg = tw->sg;

  JetMat g = eval(bp, 1);
  int D = bdim + 1;
  // lambda_i = g(k, e_i)/2 restricted appropriately: g(k,.) = 2 theta gives
  // theta; instead rebuild lambda from the metric: lambda_j = g_{Dj}/(2) ...
  // Simpler: g(l0, l0) = 4 lambda0, g(l0, e_a) = 2 lambda_a with l0 the
  // dphi-annihilating Reeb lift.
  std::vector<cplx> l0(D, 0.0), ea;
  for (int i = 0; i < bdim; ++i) l0[i] = sg.frame(0, i).value();
  auto gv = [&](const std::vector<cplx>& v, const std::vector<cplx>& w) {
    cplx acc = 0.0;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) acc += g(i, j).value() * v[i] * w[j];
    return acc;
  };
  Lambda out;
  out.lambda0 = gv(l0, l0) / 4.0;
  out.lambda_alpha.resize(m);
  for (int a = 0; a < m; ++a) {
    std::vector<cplx> va(D, 0.0);
    for (int i = 0; i < bdim; ++i) va[i] = sg.frame(1 + a, i).value();
    out.lambda_alpha[a] = gv(l0, va) / 2.0;
  }
  return out;
}

std::vector<Jet> perturbation_one_form(const FeffermanMetric& fm, const Point& bp,
                                       int order) {
  // Difference of the perturbed and unperturbed assemblies along theta:
  // build directly from the data instead, mirroring eval().
  const CRGeometry& geom = fm.base();
  const int m = geom.m, bdim = geom.dim(), D = bdim + 1;
  Point x(bp.begin(), bp.end() - 1);
  double phi = bp.back();
  auto tw = fm.tower(x, order + 1);
  const SolvedGeometry& sg = tw->sg;
  std::vector<int> lift_map(bdim);
  for (int i = 0; i < bdim; ++i) lift_map[i] = i;
  auto lift = [&](const Jet& j) { return j.lifted(D, lift_map, order); };

  // Difference of the perturbed and unperturbed metrics is 4 theta . xi;
  // contracting one slot with the Reeb lift gives xi_j + theta_j xi(l0),
  // and contracting again isolates xi(l0).
  JetMat gp = fm.eval(bp, order);
  FeffermanMetric plain(geom, fm.alpha(), CRData{});
  JetMat g0 = plain.eval(bp, order);
  std::vector<Jet> xi(D, Jet(D, order));
  for (int j = 0; j < D; ++j) {
    Jet acc(D, order);
    for (int i = 0; i < bdim; ++i)
      acc += lift(sg.frame(0, i)) * (gp(i, j) - g0(i, j));
    xi[j] = acc * cplx(0.5);
  }
  Jet xil0(D, order);
  for (int i = 0; i < bdim; ++i) xil0 += lift(sg.frame(0, i)) * xi[i];
  Jet half = xil0 * cplx(0.5);
  std::vector<Jet> theta(D, Jet(D, order));
  for (int i = 0; i < bdim; ++i) theta[i] = lift(sg.coframe(0, i));
  for (int j = 0; j < D; ++j) xi[j] -= theta[j] * half;
  (void)phi;
  return xi;
}

CRData cr_data_transform(const CRData& data, const CRGeometry& geom, const ExprPtr& phi0) {
  CRData out;
  Chart chart = geom.chart;
  LetTable lets = geom.lets;
  for (const auto& [key, fn] : data.xi_alpha) {
    int k = key.second;
    CRGeometry g2 = geom;
    out.xi_alpha[key] = [fn, k, chart, lets, phi0](const Point& p, int order) {
      Jet ph = eval_expr(phi0, chart, lets, p, order);
      return fn(p, order) * jet_exp(cplx(0, k) * ph);
    };
  }
  for (const auto& [k, fn] : data.xi_zero) {
    int kk = k;
    out.xi_zero[k] = [fn, kk, chart, lets, phi0](const Point& p, int order) {
      Jet ph = eval_expr(phi0, chart, lets, p, order);
      return fn(p, order) * jet_exp(cplx(0, kk) * ph);
    };
  }
  return out;
}

MetricField conformally_scaled(MetricField g, ScalarFieldFn omega_squared) {
  MetricField out;
  out.dim = g.dim;
  out.eval = [g, omega_squared](const Point& p, int order) {
    JetMat m = g.eval(p, order);
    Jet w = omega_squared(p, order).real();
    JetMat r = m;
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) r(i, j) = w * m(i, j);
    return r;
  };
  return out;
}

ScalarFieldFn sec2_profile(int bundle_dim, double phi0) {
  return [bundle_dim, phi0](const Point& p, int order) {
    Jet phij = Jet::variable(bundle_dim - 1, p.back() - phi0, bundle_dim, order);
    Jet c = jet_cos(phij);
    return (c * c).inverse();
  };
}

std::map<int, cplx> einstein_xi0_coefficients(int m, double Lambda, double LambdaTilde,
                                              cplx mu) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
  };
  std::map<int, cplx> c;
  cplx top = fact(m) * fact(m + 1) / (2.0 * fact(2 * m + 2)) *
                 ((2 * m + 1) * Lambda - (2 * m + 2) * LambdaTilde) +
             mu;
  c[2 * (m + 1)] = top;
  for (int k = 1; k <= m; ++k) {
    double Ck = 2.0 * fact(2 * m + 1) / (fact(m + 1 - k) * fact(m + 1 + k));
    c[2 * k] = Ck * (cplx(k) * top + (m + 1 - k) * mu.real());
  }
  c[0] = Lambda / (2 * m + 2) + 2.0 * fact(2 * m + 1) / (fact(m) * fact(m + 1)) * mu.real();
  for (int k = 1; k <= m + 1; ++k) c[-2 * k] = std::conj(c[2 * k]);
  return c;
}

}  // namespace crfeff
