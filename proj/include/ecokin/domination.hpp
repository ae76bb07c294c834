#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "ecokin/error.hpp"
#include "ecokin/kernels.hpp"
#include "ecokin/model.hpp"

namespace ecokin {

/// Smallest constants found with a+ <= A1 phi (resp. phi e^{-phi}) and the
/// three-point bound on a+ b+ (resp. b+ <= A2 phi).
struct DominationConstants {
  double A1 = 0.0;
  double A2 = 0.0;
  /// "zero" (no enhancement), "ratio" (radial sup), "lemma" (power-law
  /// majorant, A2 = E2^2) or "sampled" (grid sup over (x, y, y')).
  std::string a2_method = "zero";
  /// Relative gain of the refined sup over the coarse grid sup. Small values
  /// mean the grid had already resolved the maximum.
  double a2_margin = 0.0;
};

namespace detail {

inline double to_radius(double t) { return t / (1.0 - t); }

/// Sup over r in [0, R] of num(r)/den(r). Throws StructuralError where num > 0
/// and den == 0. For R = inf the radius is mapped from t in [0, 1).
template <class Num, class Den>
double radial_sup(Num&& num, Den&& den, double R, const std::string& what) {
  auto ratio = [&](double r) {
    const double n = num(r);
    if (n == 0.0) return 0.0;
    const double d = den(r);
    if (!(d > 0.0))
      throw StructuralError("condition structurally violated: " + what +
                            " is unbounded (numerator positive where denominator vanishes)");
    return n / d;
  };
  const bool infinite = std::isinf(R);
  const double tmax = infinite ? 1.0 - 1e-9 : R;
  auto radius = [&](double s) { return infinite ? to_radius(s) : s; };

  constexpr int n = 4000;
  double best = ratio(radius(tmax));
  double best_s = tmax;
  for (int i = 0; i < n; ++i) {
    const double s = tmax * i / n;
    const double v = ratio(radius(s));
    if (v > best) {
      best = v;
      best_s = s;
    }
  }
  // Golden-section refinement on the neighbouring cells.
  double lo = std::max(0.0, best_s - tmax / n);
  double hi = std::min(tmax, best_s + tmax / n);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = ratio(radius(c)), fd = ratio(radius(d));
  for (int it = 0; it < 80; ++it) {
    if (fc > fd) {
      hi = d; d = c; fd = fc;
      c = hi - g * (hi - lo); fc = ratio(radius(c));
    } else {
      lo = c; c = d; fc = fd;
      d = lo + g * (hi - lo); fd = ratio(radius(d));
    }
  }
  return std::max({best, fc, fd});
}

/// Power-law decay exponent of a kernel at infinity, or +inf when it has a
/// finite support.
inline double decay_exponent(const KernelSpec& k) {
  if (k.is_zero() || !std::isinf(k.support_radius())) return std::numeric_limits<double>::infinity();
  return k.shape();
}

inline void require_reach(const KernelSpec& inner, double reach, const std::string& what) {
  if (inner.support_radius() < reach)
    throw StructuralError("condition structurally violated: " + what +
                          " (support of phi is smaller than required reach)");
}

/// Sup over (x, y, y') of a(x-y) b(y-y') / (phi(x-y) phi(x-y')) with
/// u = x-y, v = y-y'. Returns {coarse sup, refined sup}.
inline std::array<double, 2> three_point_sup(const KernelSpec& a, const KernelSpec& b,
                                             const KernelSpec& phi) {
  const int d = a.dimension();
  const double ra = a.support_radius(), rb = b.support_radius();
  const bool ia = std::isinf(ra), ib = std::isinf(rb);
  auto ratio = [&](double ru, double rv, double c) {
    const double num = a.radial(ru) * b.radial(rv);
    if (num == 0.0) return 0.0;
    const double w = std::sqrt(std::max(0.0, ru * ru + rv * rv + 2.0 * ru * rv * c));
    const double den = phi.radial(ru) * phi.radial(w);
    if (!(den > 0.0))
      throw StructuralError("condition structurally violated: a+ b+ not dominated by phi phi");
    return num / den;
  };
  const double su = ia ? 1.0 - 1e-6 : ra;
  const double sv = ib ? 1.0 - 1e-6 : rb;
  auto rad_u = [&](double s) { return ia ? to_radius(s) : s; };
  auto rad_v = [&](double s) { return ib ? to_radius(s) : s; };

  const int nr = 160;
  const int nc = d == 1 ? 2 : 33;
  auto cosine = [&](int k) { return d == 1 ? (k == 0 ? -1.0 : 1.0) : -1.0 + 2.0 * k / (nc - 1); };
  double best = 0.0;
  double bu = 0.0, bv = 0.0;
  int bk = 0;
  for (int i = 0; i <= nr; ++i)
    for (int j = 0; j <= nr; ++j)
      for (int k = 0; k < nc; ++k) {
        const double s = su * i / nr, t = sv * j / nr;
        const double v = ratio(rad_u(s), rad_v(t), cosine(k));
        if (v > best) {
          best = v;
          bu = s;
          bv = t;
          bk = k;
        }
      }
  const double coarse = best;
  // Zoom: shrink a box around the incumbent a few times.
  double hu = su / nr, hv = sv / nr, hc = d == 1 ? 0.0 : 2.0 / (nc - 1);
  double bc = cosine(bk);
  for (int round = 0; round < 6; ++round) {
    const int m = 12;
    const double cu = bu, cv = bv, cc = bc;
    for (int i = -m; i <= m; ++i)
      for (int j = -m; j <= m; ++j)
        for (int k = (d == 1 ? 0 : -m); k <= (d == 1 ? 0 : m); ++k) {
          const double s = std::clamp(cu + hu * i / m, 0.0, su);
          const double t = std::clamp(cv + hv * j / m, 0.0, sv);
          const double c = std::clamp(cc + hc * k / m, -1.0, 1.0);
          const double v = ratio(rad_u(s), rad_v(t), c);
          if (v > best) {
            best = v;
            bu = s;
            bv = t;
            bc = c;
          }
        }
    hu /= 4.0;
    hv /= 4.0;
    hc /= 4.0;
  }
  return {coarse, best};
}

}  // namespace detail

/// Domination constants for the establishment or fecundity existence results.
/// `b_plus` should be the effective enhancement kernel (zero under
/// density-independent dispersal), in which case A2 = 0.
inline DominationConstants domination_constants(const KernelSpec& a_plus, const KernelSpec& b_plus,
                                                 const KernelSpec& phi, Mechanism mechanism) {
  const int d = a_plus.dimension();
  if (b_plus.dimension() != d || phi.dimension() != d)
    throw ParameterError("domination_constants: kernels must share one dimension");
  DominationConstants out;
  auto a = [&](double r) { return a_plus.radial(r); };
  const double ra = a_plus.support_radius();

  if (!a_plus.is_zero()) {
    detail::require_reach(phi, ra, "a+ <= A1 phi");
    if (std::isinf(ra) && detail::decay_exponent(a_plus) < detail::decay_exponent(phi))
      throw StructuralError("condition structurally violated: a+ decays slower than phi");
  }

  if (mechanism == Mechanism::Establishment) {
    if (!a_plus.is_zero())
      out.A1 = detail::radial_sup(a, [&](double r) { return phi.radial(r); }, ra, "a+/phi");
    if (b_plus.is_zero() || a_plus.is_zero()) return out;

    // Power-law route: a+ <= E1 (1+|x|)^{-2 delta}, b+ <= E1 (1+|x|)^{-delta} <= E2 phi.
    if (a_plus.family() == KernelFamily::PowerLaw && b_plus.family() == KernelFamily::PowerLaw) {
      const double e1 = std::max(a_plus.amplitude(), b_plus.amplitude());
      const double delta = std::min(0.5 * a_plus.shape(), b_plus.shape());
      const double reach = ra + b_plus.support_radius();
      if (delta > d && phi.support_radius() >= reach) {
        try {
          const double e2 = detail::radial_sup(
              [&](double r) { return r <= reach ? e1 * std::pow(1.0 + r, -delta) : 0.0; },
              [&](double r) { return phi.radial(r); }, reach, "power-law majorant / phi");
          out.A2 = e2 * e2;
          out.a2_method = "lemma";
          return out;
        } catch (const StructuralError&) {
          // fall through to the sampled sup
        }
      }
    }
    const double rb = b_plus.support_radius();
    detail::require_reach(phi, ra + rb, "a+(x-y) b+(y-y') <= A2 phi(x-y) phi(x-y')");
    if (std::isinf(ra) || std::isinf(rb)) {
      const double da = detail::decay_exponent(a_plus), db = detail::decay_exponent(b_plus);
      const double dp = detail::decay_exponent(phi);
      if (db < dp || da < 2.0 * dp)
        throw StructuralError("condition structurally violated: a+ b+ decays slower than phi phi");
    }
    const auto [coarse, refined] = detail::three_point_sup(a_plus, b_plus, phi);
    out.A2 = refined;
    out.a2_method = "sampled";
    out.a2_margin = refined > 0.0 ? (refined - coarse) / refined : 0.0;
    return out;
  }

  // Fecundity.
  if (!a_plus.is_zero())
    out.A1 = detail::radial_sup(
        a, [&](double r) { const double p = phi.radial(r); return p * std::exp(-p); }, ra,
        "a+/(phi e^{-phi})");
  if (b_plus.is_zero()) return out;
  const double rb = b_plus.support_radius();
  detail::require_reach(phi, rb, "b+ <= A2 phi");
  if (std::isinf(rb) && detail::decay_exponent(b_plus) < detail::decay_exponent(phi))
    throw StructuralError("condition structurally violated: b+ decays slower than phi");
  out.A2 = detail::radial_sup([&](double r) { return b_plus.radial(r); },
                              [&](double r) { return phi.radial(r); }, rb, "b+/phi");
  out.a2_method = "ratio";
  return out;
}

/// Smallest A with max{a+, b+} <= A phi.
inline double picard_domination(const KernelSpec& a_plus, const KernelSpec& b_plus,
                                const KernelSpec& phi) {
  double A = 0.0;
  for (const KernelSpec* k : {&a_plus, &b_plus}) {
    if (k->is_zero()) continue;
    const double r = k->support_radius();
    detail::require_reach(phi, r, "max{a+, b+} <= A phi");
    if (std::isinf(r) && detail::decay_exponent(*k) < detail::decay_exponent(phi))
      throw StructuralError("condition structurally violated: kernel decays slower than phi");
    A = std::max(A, detail::radial_sup([&](double s) { return k->radial(s); },
                                       [&](double s) { return phi.radial(s); }, r,
                                       "max{a+, b+}/phi"));
  }
  return A;
}

}  // namespace ecokin
