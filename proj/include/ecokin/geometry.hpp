#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>

namespace ecokin {

template <std::size_t Dim>
using Point = std::array<double, Dim>;

template <std::size_t Dim>
inline double norm(const Point<Dim>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < Dim; ++i) s += p[i] * p[i];
  return std::sqrt(s);
}

template <std::size_t Dim>
inline Point<Dim> operator+(Point<Dim> a, const Point<Dim>& b) {
  for (std::size_t i = 0; i < Dim; ++i) a[i] += b[i];
  return a;
}

template <std::size_t Dim>
inline Point<Dim> operator-(Point<Dim> a, const Point<Dim>& b) {
  for (std::size_t i = 0; i < Dim; ++i) a[i] -= b[i];
  return a;
}

template <std::size_t Dim>
inline Point<Dim> operator-(Point<Dim> a) {
  for (std::size_t i = 0; i < Dim; ++i) a[i] = -a[i];
  return a;
}

/// Wraps a coordinate into [0, L).
inline double wrap(double x, double length) {
  double r = std::fmod(x, length);
  if (r < 0.0) r += length;
  if (r >= length) r -= length;  // fmod of tiny negatives
  return r;
}

/// Minimal-image difference a - b on a torus of side `box`, or the plain
/// difference when `box` is empty (R^d).
template <std::size_t Dim>
inline Point<Dim> displacement(const Point<Dim>& a, const Point<Dim>& b,
                               std::optional<double> box) {
  Point<Dim> d = a - b;
  if (box) {
    const double l = *box;
    for (std::size_t i = 0; i < Dim; ++i) d[i] -= l * std::nearbyint(d[i] / l);
  }
  return d;
}

/// Surface area of the unit sphere S^{d-1}: 2, 2*pi, 4*pi, ...
inline double unit_sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Volume of the d-dimensional ball of radius r.
inline double ball_volume(int d, double r) {
  return unit_sphere_area(d) / d * std::pow(r, d);
}

}  // namespace ecokin
