#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "ecokin/error.hpp"
#include "ecokin/geometry.hpp"

namespace ecokin::kinetics {

/// Uniform periodic grid of n^d cells on [0, L)^d. Flat index with the first
/// coordinate fastest.
template <std::size_t Dim>
struct Grid {
  double length = 1.0;
  std::size_t n = 1;

  Grid() = default;
  Grid(double L, std::size_t cells) : length(L), n(cells) {
    if (!(L > 0.0) || !std::isfinite(L)) throw ParameterError("grid length must be positive");
    if (cells == 0) throw ParameterError("grid needs at least one cell per side");
  }

  double spacing() const { return length / static_cast<double>(n); }
  double cell_volume() const { return std::pow(spacing(), static_cast<double>(Dim)); }
  std::size_t size() const {
    std::size_t s = 1;
    for (std::size_t i = 0; i < Dim; ++i) s *= n;
    return s;
  }

  std::array<std::size_t, Dim> multi_index(std::size_t flat) const {
    std::array<std::size_t, Dim> idx{};
    for (std::size_t i = 0; i < Dim; ++i) {
      idx[i] = flat % n;
      flat /= n;
    }
    return idx;
  }

  std::size_t flat_index(const std::array<std::size_t, Dim>& idx) const {
    std::size_t f = 0;
    for (std::size_t i = Dim; i-- > 0;) f = f * n + idx[i];
    return f;
  }

  Point<Dim> centre(std::size_t flat) const {
    const auto idx = multi_index(flat);
    Point<Dim> x{};
    for (std::size_t i = 0; i < Dim; ++i) x[i] = (static_cast<double>(idx[i]) + 0.5) * spacing();
    return x;
  }

  bool operator==(const Grid& o) const { return length == o.length && n == o.n; }
};

/// Cell values of a density on a periodic grid.
template <std::size_t Dim>
struct DensityField {
  Grid<Dim> grid;
  std::vector<double> values;

  DensityField() = default;
  explicit DensityField(Grid<Dim> g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

  static DensityField from_function(Grid<Dim> g, const std::function<double(const Point<Dim>&)>& f) {
    DensityField out(g);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = f(g.centre(k));
    out.check_finite();
    return out;
  }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t k) { return values[k]; }
  double operator[](std::size_t k) const { return values[k]; }

  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max() const { return *std::max_element(values.begin(), values.end()); }
  double sup_norm() const {
    double s = 0.0;
    for (double v : values) s = std::max(s, std::abs(v));
    return s;
  }
  double mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.cell_volume();
  }

  void check_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) throw Error("density field holds a non-finite value");
  }

  /// Periodic shift by `cells` along axis 0.
  DensityField shifted(long cells) const {
    DensityField out(grid);
    const auto n = static_cast<long>(grid.n);
    for (std::size_t k = 0; k < values.size(); ++k) {
      auto idx = grid.multi_index(k);
      idx[0] = static_cast<std::size_t>(((static_cast<long>(idx[0]) + cells) % n + n) % n);
      out.values[grid.flat_index(idx)] = values[k];
    }
    return out;
  }
};

template <std::size_t Dim>
double sup_distance(const DensityField<Dim>& a, const DensityField<Dim>& b) {
  if (a.size() != b.size()) throw ParameterError("fields live on different grids");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s = std::max(s, std::abs(a[k] - b[k]));
  return s;
}

/// Discrete L2 distance, sqrt(sum |a - b|^2 * cell volume).
template <std::size_t Dim>
double l2_distance(const DensityField<Dim>& a, const DensityField<Dim>& b) {
  if (a.size() != b.size()) throw ParameterError("fields live on different grids");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s * a.grid.cell_volume());
}

}  // namespace ecokin::kinetics
