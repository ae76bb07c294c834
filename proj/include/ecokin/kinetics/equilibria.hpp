#pragma once

#include <cmath>
#include <vector>

#include "ecokin/error.hpp"
#include "ecokin/kernels.hpp"
#include "ecokin/kinetics/solver.hpp"
#include "ecokin/model.hpp"

namespace ecokin::kinetics {

struct Equilibrium {
  double u = 0.0;
  bool stable = false;
  /// d/du of the scalar law at u.
  double slope = 0.0;
};

/// Constant equilibria u >= 0 of du/dt = -m u + (kappa u + <b> u^2) e^{-u<phi>}
/// (with <a> folded into kappa and <b>). u = 0 is always listed first.
inline std::vector<Equilibrium> homogeneous_equilibria(const ModelParams& p) {
  p.validate(false);
  const double P = l1_norm(p.phi);
  if (!(P > 0.0)) throw ParameterError("homogeneous equilibria need <phi> > 0");
  const double A = l1_norm(p.a_plus);
  const double m = p.mortality, kappa = A * p.kappa_plus, B = A * l1_norm(p.enhancement());
  // Nontrivial roots solve h(u) = kappa + B u - m e^{uP} = 0; h is concave, so
  // there are at most two and h < 0 beyond its maximiser once it turns negative.
  auto h = [&](double u) { return kappa + B * u - m * std::exp(u * P); };
  auto f = [&](double u) { return homogeneous_rhs(p, u); };
  auto slope = [&](double u) {
    const double e = std::exp(-u * P);
    return -m + (kappa + 2.0 * B * u) * e - P * (kappa * u + B * u * u) * e;
  };

  std::vector<Equilibrium> out;
  out.push_back({0.0, kappa - m < 0.0, kappa - m});
  double hi = 1.0 / P;
  while (h(hi) >= 0.0 || B - m * P * std::exp(hi * P) >= 0.0) {
    hi *= 2.0;
    if (hi > 1e6 / P) throw ConvergenceError("equilibrium bracket search diverged");
  }
  const int grid = 4000;
  double prev_u = 0.0, prev_h = h(0.0);
  for (int k = 1; k <= grid; ++k) {
    const double u = hi * k / grid;
    const double hu = h(u);
    if ((prev_h > 0.0 && hu <= 0.0) || (prev_h < 0.0 && hu >= 0.0)) {
      double lo = prev_u, up = u;
      if (hu == 0.0) {
        lo = up = u;
      } else {
        const bool rising = prev_h < 0.0;
        for (int it = 0; it < 200 && up - lo > 0.0; ++it) {
          const double mid = 0.5 * (lo + up);
          if (mid <= lo || mid >= up) break;
          if ((h(mid) < 0.0) == rising) lo = mid; else up = mid;
        }
      }
      const double root = std::abs(f(lo)) <= std::abs(f(up)) ? lo : up;
      const double s = slope(root);
      out.push_back({root, s < 0.0, s});
    }
    prev_u = u;
    prev_h = hu;
  }
  return out;
}

}  // namespace ecokin::kinetics
