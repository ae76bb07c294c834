#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "ecokin/error.hpp"
#include "ecokin/geometry.hpp"
#include "ecokin/model.hpp"

namespace ecokin::ibm {

/// Parameters of the eps-scaled microscopic model: kernels multiplied by eps,
/// the birth part of the generator by 1/eps, initial intensity by 1/eps.
struct ScaledModel {
  ModelParams params;
  double epsilon = 1.0;
  double birth_prefactor = 1.0;
  double density_multiplier = 1.0;
};

inline ScaledModel apply_vlasov_scaling(const ModelParams& p, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ParameterError("scaling parameter eps must lie in (0, 1]");
  ScaledModel s;
  s.params = p;
  s.epsilon = eps;
  if (eps != 1.0) {
    s.params.a_plus = p.a_plus.scaled(eps);
    s.params.b_plus = p.b_plus.scaled(eps);
    s.params.phi = p.phi.scaled(eps);
  }
  s.birth_prefactor = 1.0 / eps;
  s.density_multiplier = 1.0 / eps;
  s.params.validate(false);
  return s;
}

/// Poisson field on the torus with intensity multiplier * rho(x), where rho is
/// frozen at the centre of each of `cells`^d cells.
template <std::size_t Dim, class Rng>
std::vector<Point<Dim>> sample_poisson_field(const std::function<double(const Point<Dim>&)>& rho,
                                             double box, std::size_t cells, double multiplier, Rng& rng) {
  if (!(box > 0.0) || cells == 0) throw ParameterError("Poisson field: bad box or cell count");
  if (!(multiplier >= 0.0)) throw ParameterError("Poisson field: multiplier must be nonnegative");
  const double h = box / static_cast<double>(cells);
  double vol = 1.0;
  for (std::size_t i = 0; i < Dim; ++i) vol *= h;
  std::size_t total = 1;
  for (std::size_t i = 0; i < Dim; ++i) total *= cells;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point<Dim>> out;
  for (std::size_t c = 0; c < total; ++c) {
    Point<Dim> lo{};
    std::size_t rest = c;
    for (std::size_t i = 0; i < Dim; ++i) {
      lo[i] = static_cast<double>(rest % cells) * h;
      rest /= cells;
    }
    Point<Dim> centre = lo;
    for (auto& x : centre) x += 0.5 * h;
    const double r = rho(centre);
    if (!(r >= 0.0) || !std::isfinite(r)) throw ParameterError("Poisson field: density must be finite and nonnegative");
    const double mean = multiplier * r * vol;
    if (mean == 0.0) continue;
    const auto n = std::poisson_distribution<long>(mean)(rng);
    for (long k = 0; k < n; ++k) {
      Point<Dim> x = lo;
      for (auto& v : x) v = std::min(v + h * u(rng), std::nextafter(box, 0.0));
      out.push_back(x);
    }
  }
  return out;
}

/// n points uniform on the torus.
template <std::size_t Dim, class Rng>
std::vector<Point<Dim>> sample_uniform(std::size_t n, double box, Rng& rng) {
  if (!(box > 0.0)) throw ParameterError("box length must be positive");
  std::uniform_real_distribution<double> u(0.0, box);
  std::vector<Point<Dim>> out(n);
  for (auto& p : out)
    for (auto& x : p) x = u(rng);
  return out;
}

}  // namespace ecokin::ibm
