#include "crfeff/gallery.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace crfeff {
namespace gallery {

namespace {

const char* kNP = R"(
[chart]
name = nurowski-przanowski
m = 2
coords = u x1 y1 x2 y2
complex z1 = x1 y1
complex z2 = x2 y2
domain = z1 + conj(z1) - 2*z2*conj(z2)
box u = -1 1
box x1 = 0.75 2
box y1 = -0.5 0.5
box x2 = -0.3 0.3
box y2 = -0.3 0.3

[let]
f = 4*(z1 + conj(z1) - 2*z2*conj(z2))

[contact_form]
theta = d(u) + i*z1*d(z2) - i*z2*d(z1) - i*conj(z1)*d(conj(z2)) + i*conj(z2)*d(conj(z1))

[coframe]
theta1 = f^(-1/4)*(d(z1) - 2*conj(z2)*d(z2) + f^(1/2)*d(conj(z2)))
theta2 = f^(-1/4)*(-d(conj(z1)) + 2*z2*d(conj(z2)) + f^(1/2)*d(z2))

[scales]
vol_factor = 1
sigma sigma_hat = f^(1/8)
)";

const char* kHeis1 = R"(
[chart]
name = heisenberg-m1
m = 1
coords = u x1 y1
complex z1 = x1 y1
box u = -1 1
box x1 = -1 1
box y1 = -1 1

[contact_form]
theta = d(u) + i*z1*d(conj(z1)) - i*conj(z1)*d(z1)

[coframe]
theta1 = d(z1)

[scales]
vol_factor = 1.4142135623730951
)";

const char* kHeis2 = R"(
[chart]
name = heisenberg-m2
m = 2
coords = u x1 y1 x2 y2
complex z1 = x1 y1
complex z2 = x2 y2
box u = -1 1
box x1 = -1 1
box y1 = -1 1
box x2 = -1 1
box y2 = -1 1

[contact_form]
theta = d(u) + i*z1*d(conj(z1)) - i*conj(z1)*d(z1) + i*z2*d(conj(z2)) - i*conj(z2)*d(z2)

[coframe]
theta1 = d(z1)
theta2 = d(z2)

[scales]
vol_factor = 2
)";

// Einstein CR data over the Nurowski--Przanowski base (all the Fourier
// coefficients with k != 0 vanish since Lambda, LambdaTilde, mu all vanish):
// xi_alpha^(0) = -i sigma^{-1} nabla_alpha sigma for the volume-normalised
// sigma, and xi_0^(0) = (i/m)(nabla_a xi^a - nabla^a xi_a).
const char* kNPEinstein = R"(
[chart]
name = np-einstein-fefferman
m = 2
coords = u x1 y1 x2 y2
complex z1 = x1 y1
complex z2 = x2 y2
domain = z1 + conj(z1) - 2*z2*conj(z2)
box u = -1 1
box x1 = 0.75 2
box y1 = -0.5 0.5
box x2 = -0.3 0.3
box y2 = -0.3 0.3

[let]
f = 4*(z1 + conj(z1) - 2*z2*conj(z2))

[contact_form]
theta = d(u) + i*z1*d(z2) - i*z2*d(z1) - i*conj(z1)*d(conj(z2)) + i*conj(z2)*d(conj(z1))

[coframe]
theta1 = f^(-1/4)*(d(z1) - 2*conj(z2)*d(z2) + f^(1/2)*d(conj(z2)))
theta2 = f^(-1/4)*(-d(conj(z1)) + 2*z2*d(conj(z2)) + f^(1/2)*d(z2))

[perturbation]
alpha = 1
xi_1[0] = -(i/4)*f^(-3/4)
xi_2[0] = (i/4)*f^(-3/4)
xi_0[0] = (1/2)*f^(-3/2)

[scales]
vol_factor = 1
sigma sigma_hat = f^(1/8)
)";

}  // namespace

CRGeometry nurowski_przanowski() { return load_geometry(kNP); }

CRGeometry heisenberg(int m) {
  if (m == 1) return load_geometry(kHeis1);
  if (m == 2) return load_geometry(kHeis2);
  throw std::invalid_argument("heisenberg: m must be 1 or 2");
}

CRGeometry np_einstein_fefferman() { return load_geometry(kNPEinstein); }

std::vector<std::string> names() {
  return {"nurowski-przanowski", "heisenberg-m1", "heisenberg-m2", "np-einstein-fefferman"};
}

CRGeometry by_name(const std::string& name) {
  if (name == "nurowski-przanowski") return nurowski_przanowski();
  if (name == "heisenberg-m1") return heisenberg(1);
  if (name == "heisenberg-m2") return heisenberg(2);
  if (name == "np-einstein-fefferman") return np_einstein_fefferman();
  throw std::invalid_argument("unknown gallery geometry '" + name + "'");
}

NPOracle np_oracle(const CRGeometry& g, const Point& x) {
  Jet fj = g.eval_scalar(g.lets.at("f"), x, 1);
  double f = fj.value().real();
  NPOracle o;
  o.f = f;
  o.n121 = -std::pow(f, -0.75);
  o.gamma_c = 0.5 * std::pow(f, -0.75);
  o.ric = 2.0 * std::pow(f, -1.5);
  o.sc = 4.0 * std::pow(f, -1.5);
  o.n_norm2 = 4.0 * std::pow(f, -1.5);
  o.xi_c = 0.25 * std::pow(f, -0.75);
  return o;
}

}  // namespace gallery
}  // namespace crfeff
