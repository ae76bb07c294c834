#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "ecokin/configuration.hpp"
#include "ecokin/error.hpp"

namespace ecokin {

/// Cube [lo, hi]^d carrying the integration domain.
struct IntegrationBox {
  double lo = 0.0;
  double hi = 1.0;
  template <std::size_t Dim>
  double volume() const {
    return std::pow(hi - lo, Dim);
  }
};

struct MonteCarloEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  /// Bound on the omitted n > n_max terms; present when a coherent-state
  /// majorant was supplied.
  std::optional<double> truncation_bound;
};

namespace detail {

template <std::size_t Dim, class Rng>
Configuration<Dim> uniform_configuration(std::size_t n, const IntegrationBox& box, Rng& rng) {
  std::uniform_real_distribution<double> u(box.lo, box.hi);
  std::vector<Point<Dim>> pts(n);
  for (auto& p : pts)
    for (auto& c : p) c = u(rng);
  return Configuration<Dim>(std::move(pts));
}

/// sum_{n > n_max} z^n / n!
inline double poisson_tail(double z, int n_max) {
  double term = 1.0, head = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    term *= z / n;
    head += term;
  }
  const double tail = std::exp(z) - head;
  if (tail > 1e-3 * std::exp(z)) return tail;
  // Direct series for small tails, avoiding cancellation.
  double s = 0.0;
  term = 1.0;
  for (int n = 1; n <= n_max; ++n) term *= z / n;
  for (int n = n_max + 1; n < n_max + 400; ++n) {
    term *= z / n;
    s += term;
    if (term < 1e-18 * s) break;
  }
  return s;
}

struct Stratum {
  double mean = 0.0;
  double var_of_mean = 0.0;
};

template <class Sample>
Stratum run_stratum(std::size_t samples, Sample&& draw) {
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double v = draw();
    const double delta = v - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (v - mean);
  }
  const double var = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
  return {mean, var / static_cast<double>(samples)};
}

}  // namespace detail

/// Monte Carlo estimate of the integral of G against the Lebesgue-Poisson
/// measure with intensity `weight`, restricted to configurations in `box`:
///   sum_{n <= n_max} weight^n / n! * int_{box^n} G({x_1..x_n}) dx,
/// each n-stratum estimated with `mc_samples` uniform draws.
/// `majorant_sup`, when given, is a bound M with |G(eta)| <= M^{|eta|}.
template <std::size_t Dim, class G, class Rng>
  requires ConfigurationFunction<G, Dim>
MonteCarloEstimate lp_integral(G&& g, double weight, int n_max, std::size_t mc_samples,
                               const IntegrationBox& box, Rng& rng,
                               std::optional<double> majorant_sup = std::nullopt) {
  if (n_max < 0) throw ParameterError("lp_integral: n_max must be nonnegative");
  if (mc_samples == 0) throw ParameterError("lp_integral: mc_samples must be positive");
  const double vol = box.volume<Dim>();
  MonteCarloEstimate out;
  out.value = g(Configuration<Dim>{});
  double var = 0.0;
  double coeff = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    coeff *= weight * vol / n;
    const auto s = detail::run_stratum(mc_samples, [&] {
      return g(detail::uniform_configuration<Dim>(static_cast<std::size_t>(n), box, rng));
    });
    out.value += coeff * s.mean;
    var += coeff * coeff * s.var_of_mean;
  }
  out.stderr_ = std::sqrt(var);
  if (majorant_sup) out.truncation_bound = detail::poisson_tail(weight * *majorant_sup * vol, n_max);
  return out;
}

/// Double integral of H(xi, eta) against lambda x lambda, stratified by
/// (|xi|, |eta|) with both cardinalities up to n_max.
template <std::size_t Dim, class H, class Rng>
  requires std::invocable<const H&, const Configuration<Dim>&, const Configuration<Dim>&>
MonteCarloEstimate lp_double_integral(H&& h, double weight, int n_max, std::size_t mc_samples,
                                      const IntegrationBox& box, Rng& rng) {
  if (n_max < 0) throw ParameterError("lp_double_integral: n_max must be nonnegative");
  if (mc_samples == 0) throw ParameterError("lp_double_integral: mc_samples must be positive");
  const double vol = box.volume<Dim>();
  MonteCarloEstimate out;
  double var = 0.0;
  double c1 = 1.0;
  for (int n1 = 0; n1 <= n_max; ++n1) {
    if (n1 > 0) c1 *= weight * vol / n1;
    double c2 = 1.0;
    for (int n2 = 0; n2 <= n_max; ++n2) {
      if (n2 > 0) c2 *= weight * vol / n2;
      const double coeff = c1 * c2;
      const std::size_t samples = (n1 == 0 && n2 == 0) ? 1 : mc_samples;
      const auto s = detail::run_stratum(samples, [&] {
        const auto xi = detail::uniform_configuration<Dim>(static_cast<std::size_t>(n1), box, rng);
        const auto eta = detail::uniform_configuration<Dim>(static_cast<std::size_t>(n2), box, rng);
        return h(xi, eta);
      });
      out.value += coeff * s.mean;
      var += coeff * coeff * s.var_of_mean;
    }
  }
  out.stderr_ = std::sqrt(var);
  return out;
}

}  // namespace ecokin
