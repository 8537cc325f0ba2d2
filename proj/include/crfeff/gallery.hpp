#pragma once

#include <string>
#include <vector>

#include "crfeff/geometry.hpp"

namespace crfeff {

/// Built-in geometries with published closed forms, used as oracles.
namespace gallery {

/// Strictly almost CR five-manifold over the Nurowski--Przanowski almost
/// Kaehler--Einstein four-manifold; carries a CR--Einstein structure with
/// A = 0, N_{121} = N_{122} = -f^{-3/4}.
CRGeometry nurowski_przanowski();

/// Flat Heisenberg model, m = 1 or 2 (Levi form 2*Id in this coframe).
CRGeometry heisenberg(int m);

/// Perturbed Fefferman data over the Nurowski--Przanowski base whose
/// sec^2(phi)-rescaling is Ricci flat.
CRGeometry np_einstein_fefferman();

std::vector<std::string> names();
CRGeometry by_name(const std::string& name);

/// Closed-form oracle values for the Nurowski--Przanowski geometry.
struct NPOracle {
  double f;
  double n121;       // = n122 = -f^{-3/4}
  double gamma_c;    // 1/2 f^{-3/4}: Gamma_1^1 components (1,-1,-1,1) on (th1,th2,bar1,bar2)
  double ric;        // Ric_{a b} = 2 f^{-3/2} delta
  double sc;         // 4 f^{-3/2}
  double n_norm2;    // 4 f^{-3/2}
  double xi_c;       // 1/4 f^{-3/4}: xi = -i xi_c (th1 - th2 - bar1 + bar2)
};
NPOracle np_oracle(const CRGeometry& g, const Point& x);

}  // namespace gallery
}  // namespace crfeff
