#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecokin/error.hpp"
#include "ecokin/geometry.hpp"
#include "ecokin/kernels.hpp"
#include "ecokin/model.hpp"

namespace ecokin {

/// Finite set of distinct points, either in R^d (no box) or on the torus
/// [0, L)^d. Operations treat it as a set; the stored order only fixes the
/// bit positions used by subset enumeration.
template <std::size_t Dim>
class Configuration {
 public:
  using point_type = Point<Dim>;

  Configuration() = default;
  explicit Configuration(std::vector<point_type> points, std::optional<double> box = std::nullopt)
      : points_(std::move(points)), box_(box) {
    if (box_ && !(*box_ > 0.0)) throw ParameterError("box length must be positive");
    if (box_)
      for (auto& p : points_)
        for (auto& c : p) c = wrap(c, *box_);
    auto sorted = points_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ParameterError("configuration points must be distinct");
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const point_type& operator[](std::size_t i) const { return points_[i]; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }
  const std::vector<point_type>& points() const { return points_; }
  std::optional<double> box() const { return box_; }

  point_type displacement(const point_type& a, const point_type& b) const {
    return ecokin::displacement<Dim>(a, b, box_);
  }

  bool contains(const point_type& p) const {
    return std::find(points_.begin(), points_.end(), p) != points_.end();
  }

  /// Subconfiguration selected by the bits of `mask`.
  Configuration subset(std::uint32_t mask) const {
    Configuration out;
    out.box_ = box_;
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (mask >> i & 1u) out.points_.push_back(points_[i]);
    return out;
  }

  Configuration without(std::size_t i) const {
    Configuration out = *this;
    out.points_.erase(out.points_.begin() + static_cast<std::ptrdiff_t>(i));
    return out;
  }

  /// Union with a point not already present.
  Configuration with(const point_type& p) const {
    Configuration out = *this;
    out.points_.push_back(p);
    return out;
  }

  /// Union with a disjoint configuration.
  Configuration merged(const Configuration& other) const {
    Configuration out = *this;
    out.points_.insert(out.points_.end(), other.points_.begin(), other.points_.end());
    return out;
  }

 private:
  std::vector<point_type> points_;
  std::optional<double> box_;
};

/// Model parameters plus the Vlasov scaling parameter eps in (0, 1].
struct RatePackage {
  ModelParams params;
  double epsilon = 1.0;
};

template <class F, std::size_t Dim>
concept ConfigurationFunction = std::invocable<const F&, const Configuration<Dim>&>;

inline constexpr std::size_t kMaxEnumeration = 12;

namespace detail {

inline void check_cardinality(std::size_t n, const char* who) {
  if (n > kMaxEnumeration)
    throw CardinalityError(std::string(who) + ": configuration has " + std::to_string(n) +
                           " points, the subset enumeration cap is 12");
}

template <std::size_t Dim>
void check_disjoint(const Configuration<Dim>& xi, const Configuration<Dim>& eta) {
  for (const auto& p : eta)
    if (xi.contains(p)) throw OverlapError("xi and eta must be disjoint");
}

/// Product of values[i] over indices not in `skip`.
inline double product_except(std::span<const double> values, std::size_t skip1 = SIZE_MAX,
                             std::size_t skip2 = SIZE_MAX) {
  double p = 1.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (i != skip1 && i != skip2) p *= values[i];
  return p;
}

}  // namespace detail

/// E^phi(x, gamma): sum of phi(x - y) over y in gamma other than x itself.
template <std::size_t Dim>
double energy(const Point<Dim>& x, const Configuration<Dim>& gamma, const KernelSpec& phi) {
  double s = 0.0;
  for (const auto& y : gamma)
    if (y != x) s += phi(gamma.displacement(x, y));
  return s;
}

/// Coherent state e_lambda(f, eta) = product of f over eta; 1 on the empty set.
template <std::size_t Dim, class F>
double coherent_state(F&& f, const Configuration<Dim>& eta) {
  double p = 1.0;
  for (const auto& x : eta) p *= f(x);
  return p;
}

/// b_est(x, gamma) = e^{-E^phi(x,gamma)} sum_y a+(x-y) (kappa+ + sum_{y' != y} b+(y-y')).
template <std::size_t Dim>
double birth_rate_establishment(const Point<Dim>& x, const Configuration<Dim>& gamma,
                                const RatePackage& pkg) {
  const auto& p = pkg.params;
  const KernelSpec b = p.enhancement();
  double s = 0.0;
  for (const auto& y : gamma) {
    const double ay = p.a_plus(gamma.displacement(x, y));
    if (ay == 0.0) continue;
    s += ay * (p.kappa_plus + energy(y, gamma, b));
  }
  return s == 0.0 ? 0.0 : std::exp(-energy(x, gamma, p.phi)) * s;
}

/// b_fec(x, gamma) = sum_y e^{-E^phi(y, gamma\y)} a+(x-y) (kappa+ + sum_{y' != y} b+(y-y')).
template <std::size_t Dim>
double birth_rate_fecundity(const Point<Dim>& x, const Configuration<Dim>& gamma,
                            const RatePackage& pkg) {
  const auto& p = pkg.params;
  const KernelSpec b = p.enhancement();
  double s = 0.0;
  for (const auto& y : gamma) {
    const double ay = p.a_plus(gamma.displacement(x, y));
    if (ay == 0.0) continue;
    s += std::exp(-energy(y, gamma, p.phi)) * ay * (p.kappa_plus + energy(y, gamma, b));
  }
  return s;
}

template <std::size_t Dim>
double birth_rate(const Point<Dim>& x, const Configuration<Dim>& gamma, const RatePackage& pkg,
                  Mechanism mechanism) {
  return mechanism == Mechanism::Establishment ? birth_rate_establishment(x, gamma, pkg)
                                               : birth_rate_fecundity(x, gamma, pkg);
}

/// Copy of the parameters with a+, b+, phi multiplied by eps.
inline ModelParams scaled_params(const ModelParams& p, double eps) {
  ModelParams s = p;
  s.a_plus = p.a_plus.scaled(eps);
  s.b_plus = p.b_plus.scaled(eps);
  s.phi = p.phi.scaled(eps);
  return s;
}

// ---------------------------------------------------------------------------
// K-transform and its inverse on finite configurations.

/// (K^{-1} F)(eta) = sum over xi subset of eta of (-1)^{|eta \ xi|} F(xi).
template <std::size_t Dim, class F>
  requires ConfigurationFunction<F, Dim>
double kinv_inclusion_exclusion(F&& f, const Configuration<Dim>& eta) {
  detail::check_cardinality(eta.size(), "kinv_inclusion_exclusion");
  const std::uint32_t full = (1u << eta.size()) - 1u;
  double s = 0.0;
  for (std::uint32_t mask = 0;; ++mask) {
    const int missing = static_cast<int>(eta.size()) - std::popcount(mask);
    const double v = f(eta.subset(mask));
    s += (missing % 2 == 0) ? v : -v;
    if (mask == full) break;
  }
  return s;
}

/// (K G)(gamma) = sum over all subconfigurations eta of gamma of G(eta).
template <std::size_t Dim, class G>
  requires ConfigurationFunction<G, Dim>
double k_transform(G&& g, const Configuration<Dim>& gamma) {
  detail::check_cardinality(gamma.size(), "k_transform");
  const std::uint32_t full = (1u << gamma.size()) - 1u;
  double s = 0.0;
  for (std::uint32_t mask = 0;; ++mask) {
    s += g(gamma.subset(mask));
    if (mask == full) break;
  }
  return s;
}

/// Right-hand side of the sum-form identity: K^{-1} of
/// F(gamma) = sum_{x in gamma} H(x, gamma \ x) equals
/// sum_{x in eta} (K^{-1} H(x, .))(eta \ x).
template <std::size_t Dim, class H>
  requires std::invocable<const H&, const Point<Dim>&, const Configuration<Dim>&>
double kinv_sum_form(H&& h, const Configuration<Dim>& eta) {
  detail::check_cardinality(eta.size(), "kinv_sum_form");
  double s = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const auto& x = eta[i];
    s += kinv_inclusion_exclusion([&](const Configuration<Dim>& c) { return h(x, c); },
                                  eta.without(i));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Closed-form K^{-1} expansions of the birth rates.

/// (K_0^{-1} b(x, xi u .))(eta) by the four-term expansion; xi, eta disjoint.
template <std::size_t Dim>
double kinv_birth_closed_form(const Point<Dim>& x, const Configuration<Dim>& xi,
                              const Configuration<Dim>& eta, const RatePackage& pkg,
                              Mechanism mechanism) {
  detail::check_cardinality(eta.size(), "kinv_birth_closed_form");
  detail::check_disjoint(xi, eta);
  const auto& p = pkg.params;
  const KernelSpec& a = p.a_plus;
  const KernelSpec b = p.enhancement();
  const KernelSpec& phi = p.phi;
  const double kappa = p.kappa_plus;
  auto k = [&](const KernelSpec& ker, const Point<Dim>& u, const Point<Dim>& v) {
    return ker(eta.displacement(u, v));
  };
  const std::size_t n = eta.size();
  std::vector<double> f(n);

  if (mechanism == Mechanism::Establishment) {
    for (std::size_t i = 0; i < n; ++i) f[i] = std::expm1(-k(phi, x, eta[i]));
    const double ex = std::exp(-energy(x, xi, phi));
    double t1 = detail::product_except(f) * birth_rate_establishment(x, xi, pkg);
    double t2 = 0.0, t3 = 0.0, t4 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& yp = eta[j];
      const double sup_j = std::exp(-k(phi, x, yp));
      const double rest = detail::product_except(f, j);
      double ab = 0.0, bsum = 0.0;
      for (const auto& y : xi) {
        const double byy = k(b, y, yp);
        ab += k(a, x, y) * byy;
        bsum += byy;
      }
      t2 += ab * sup_j * rest;
      t3 += rest * k(a, x, yp) * sup_j * (kappa + bsum);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        t4 += k(a, x, eta[i]) * k(b, eta[i], eta[j]) * std::exp(-k(phi, x, eta[i])) *
              std::exp(-k(phi, x, eta[j])) * detail::product_except(f, i, j);
      }
    return t1 + ex * (t2 + t3 + t4);
  }

  // Fecundity: the suppression factor sits on the parent y.
  auto g = [&](const Point<Dim>& y, std::size_t skip1 = SIZE_MAX, std::size_t skip2 = SIZE_MAX) {
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != skip1 && i != skip2) prod *= std::expm1(-k(phi, y, eta[i]));
    return prod;
  };
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& y = eta[i];
    const double ey = std::exp(-energy(y, xi, phi));
    const double ay = k(a, x, y);
    double bxi = 0.0;
    for (const auto& yp : xi) bxi += k(b, y, yp);
    t1 += ey * g(y, i) * ay * (kappa + bxi);
    double inner = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      inner += k(b, y, eta[j]) * std::exp(-k(phi, y, eta[j])) * g(y, i, j);
    }
    t2 += ey * ay * inner;
  }
  for (const auto& y : xi) {
    const double ey = std::exp(-energy(y, xi, phi));  // E^phi(y, xi \ y)
    const double ay = k(a, x, y);
    t3 += g(y) * ey * ay * (kappa + energy(y, xi, b));
    for (std::size_t j = 0; j < n; ++j)
      t4 += g(y, j) * std::exp(-k(phi, y, eta[j])) * ey * ay * k(b, y, eta[j]);
  }
  return t1 + t2 + t3 + t4;
}

/// psi_eps(u) = (e^{-eps u} - 1) / eps, with |psi_eps(u)| <= u for u >= 0.
inline double psi_eps(double phi_value, double eps) { return std::expm1(-eps * phi_value) / eps; }

/// eps^{-|eta|} (K_0^{-1} b_eps(x, xi u .))(eta) where b_eps uses the kernels
/// eps a+, eps b+, eps phi, evaluated by the scaled four-term expansion.
template <std::size_t Dim>
double kinv_birth_scaled(const Point<Dim>& x, const Configuration<Dim>& xi,
                         const Configuration<Dim>& eta, const RatePackage& pkg,
                         Mechanism mechanism) {
  detail::check_cardinality(eta.size(), "kinv_birth_scaled");
  detail::check_disjoint(xi, eta);
  const double eps = pkg.epsilon;
  if (!(eps > 0.0 && eps <= 1.0)) throw ParameterError("epsilon must lie in (0, 1]");
  const auto& p = pkg.params;
  const KernelSpec& a = p.a_plus;
  const KernelSpec b = p.enhancement();
  const KernelSpec& phi = p.phi;
  const double kappa = p.kappa_plus;
  auto k = [&](const KernelSpec& ker, const Point<Dim>& u, const Point<Dim>& v) {
    return ker(eta.displacement(u, v));
  };
  const std::size_t n = eta.size();

  if (mechanism == Mechanism::Establishment) {
    std::vector<double> psi(n);
    for (std::size_t i = 0; i < n; ++i) psi[i] = psi_eps(k(phi, x, eta[i]), eps);
    const double ex = std::exp(-eps * energy(x, xi, phi));
    double head = 0.0;
    for (const auto& y : xi) head += k(a, x, y) * (kappa + eps * energy(y, xi, b));
    const double t1 = eps * detail::product_except(psi) * ex * head;
    double t2 = 0.0, t3 = 0.0, t4 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& yp = eta[j];
      const double sup_j = std::exp(-eps * k(phi, x, yp));
      const double rest = detail::product_except(psi, j);
      double ab = 0.0, bsum = 0.0;
      for (const auto& y : xi) {
        const double byy = k(b, y, yp);
        ab += k(a, x, y) * byy;
        bsum += byy;
      }
      t2 += ab * sup_j * rest;
      t3 += rest * k(a, x, yp) * sup_j * (kappa + eps * bsum);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        t4 += k(a, x, eta[i]) * k(b, eta[i], eta[j]) * std::exp(-eps * k(phi, x, eta[i])) *
              std::exp(-eps * k(phi, x, eta[j])) * detail::product_except(psi, i, j);
      }
    return t1 + eps * ex * t2 + ex * (t3 + t4);
  }

  auto g = [&](const Point<Dim>& y, std::size_t skip1 = SIZE_MAX, std::size_t skip2 = SIZE_MAX) {
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != skip1 && i != skip2) prod *= psi_eps(k(phi, y, eta[i]), eps);
    return prod;
  };
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& y = eta[i];
    const double ey = std::exp(-eps * energy(y, xi, phi));
    const double ay = k(a, x, y);
    double bxi = 0.0;
    for (const auto& yp : xi) bxi += k(b, y, yp);
    t1 += ey * g(y, i) * ay * (kappa + eps * bxi);
    double inner = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      inner += k(b, y, eta[j]) * std::exp(-eps * k(phi, y, eta[j])) * g(y, i, j);
    }
    t2 += ey * ay * inner;
  }
  for (const auto& y : xi) {
    const double ey = std::exp(-eps * energy(y, xi, phi));
    const double ay = k(a, x, y);
    t3 += g(y) * ey * ay * (kappa + eps * energy(y, xi, b));
    for (std::size_t j = 0; j < n; ++j)
      t4 += g(y, j) * std::exp(-eps * k(phi, y, eta[j])) * ey * ay * k(b, y, eta[j]);
  }
  return t1 + t2 + eps * (t3 + t4);
}

/// eps -> 0 limit of kinv_birth_scaled; independent of xi.
template <std::size_t Dim>
double vlasov_kernel(const Point<Dim>& x, const Configuration<Dim>& eta, const RatePackage& pkg,
                     Mechanism mechanism) {
  detail::check_cardinality(eta.size(), "vlasov_kernel");
  const auto& p = pkg.params;
  const KernelSpec& a = p.a_plus;
  const KernelSpec b = p.enhancement();
  const KernelSpec& phi = p.phi;
  auto k = [&](const KernelSpec& ker, const Point<Dim>& u, const Point<Dim>& v) {
    return ker(eta.displacement(u, v));
  };
  const std::size_t n = eta.size();
  // Coherent state of -phi(c - .) over eta minus up to two indices.
  auto coh = [&](const Point<Dim>& c, std::size_t s1, std::size_t s2 = SIZE_MAX) {
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != s1 && i != s2) prod *= -k(phi, c, eta[i]);
    return prod;
  };
  double single = 0.0, pair = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& y = eta[i];
    const auto& centre = mechanism == Mechanism::Establishment ? x : y;
    single += coh(centre, i) * k(a, x, y);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      pair += k(a, x, y) * k(b, y, eta[j]) * coh(centre, i, j);
    }
  }
  return p.kappa_plus * single + pair;
}

// ---------------------------------------------------------------------------
// Generator images on finite configurations. The x-integral is replaced by
// the given quadrature rule (nodes, weights).

template <std::size_t Dim>
struct QuadratureRule {
  std::vector<Point<Dim>> nodes;
  std::vector<double> weights;
};

/// (L^ G)(eta) = -m|eta| G(eta) + sum_{xi subset eta} int G(xi u x) (K^{-1} b(x, . u xi))(eta \ xi) dx.
template <std::size_t Dim, class G>
  requires ConfigurationFunction<G, Dim>
double generator_image(G&& g, const Configuration<Dim>& eta, const RatePackage& pkg,
                       Mechanism mechanism, const QuadratureRule<Dim>& rule) {
  detail::check_cardinality(eta.size(), "generator_image");
  const std::uint32_t full = (1u << eta.size()) - 1u;
  double s = -pkg.params.mortality * static_cast<double>(eta.size()) * g(eta);
  for (std::uint32_t mask = 0;; ++mask) {
    const auto xi = eta.subset(mask);
    const auto rest = eta.subset(full & ~mask);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const auto& x = rule.nodes[q];
      s += rule.weights[q] * g(xi.with(x)) * kinv_birth_closed_form(x, xi, rest, pkg, mechanism);
    }
    if (mask == full) break;
  }
  return s;
}

/// Limit generator: as generator_image with K^{-1} b replaced by B^V_x.
template <std::size_t Dim, class G>
  requires ConfigurationFunction<G, Dim>
double vlasov_generator_image(G&& g, const Configuration<Dim>& eta, const RatePackage& pkg,
                              Mechanism mechanism, const QuadratureRule<Dim>& rule) {
  detail::check_cardinality(eta.size(), "vlasov_generator_image");
  const std::uint32_t full = (1u << eta.size()) - 1u;
  double s = -pkg.params.mortality * static_cast<double>(eta.size()) * g(eta);
  for (std::uint32_t mask = 0;; ++mask) {
    const auto xi = eta.subset(mask);
    const auto rest = eta.subset(full & ~mask);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const auto& x = rule.nodes[q];
      s += rule.weights[q] * g(xi.with(x)) * vlasov_kernel(x, rest, pkg, mechanism);
    }
    if (mask == full) break;
  }
  return s;
}

}  // namespace ecokin
