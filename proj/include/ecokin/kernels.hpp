#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "ecokin/error.hpp"
#include "ecokin/geometry.hpp"

namespace ecokin {

enum class KernelFamily { TopHat, Gaussian, Exponential, PowerLaw };

inline const char* to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::TopHat: return "tophat";
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Exponential: return "exponential";
    case KernelFamily::PowerLaw: return "powerlaw";
  }
  return "?";
}

/// Isotropic, nonnegative kernel on R^d with a hard cutoff radius.
///
/// Each family has an amplitude and a length parameter:
///   TopHat(height h, radius r):        h * 1{|x| <= r}
///   Gaussian(mass w, stddev s):        w * N(0, s^2 I)(x)
///   Exponential(mass w, scale s):      w * exp(-|x|/s) / (|S^{d-1}| s^d (d-1)!)
///   PowerLaw(E1, delta):               E1 / (1 + |x|)^delta,  delta > d
///
/// Gaussian and Exponential kernels are truncated where the tail mass drops
/// below 1e-10 of the total; the default cutoff puts it at 1e-11. PowerLaw
/// kernels are untruncated unless a cutoff is given.
class KernelSpec {
 public:
  static constexpr double kMaxTailFraction = 1e-10;
  static constexpr double kDefaultTailFraction = 1e-11;

  static KernelSpec top_hat(int dim, double height, double radius) {
    check_dim(dim);
    if (!(height >= 0.0) || !(radius >= 0.0) || !std::isfinite(height) || !std::isfinite(radius))
      throw ParameterError("tophat: height and radius must be finite and nonnegative");
    return KernelSpec(KernelFamily::TopHat, dim, height, radius, radius);
  }

  static KernelSpec gaussian(int dim, double mass, double sigma,
                             std::optional<double> cutoff = std::nullopt) {
    check_dim(dim);
    check_amplitude(mass, "gaussian");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw ParameterError("gaussian: sigma must be positive");
    KernelSpec k(KernelFamily::Gaussian, dim, mass, sigma, 0.0);
    k.cutoff_ = cutoff ? *cutoff : k.cutoff_for_tail(kDefaultTailFraction);
    k.check_tail();
    return k;
  }

  static KernelSpec exponential(int dim, double mass, double scale,
                                std::optional<double> cutoff = std::nullopt) {
    check_dim(dim);
    check_amplitude(mass, "exponential");
    if (!(scale > 0.0) || !std::isfinite(scale))
      throw ParameterError("exponential: scale must be positive");
    KernelSpec k(KernelFamily::Exponential, dim, mass, scale, 0.0);
    k.cutoff_ = cutoff ? *cutoff : k.cutoff_for_tail(kDefaultTailFraction);
    k.check_tail();
    return k;
  }

  static KernelSpec power_law(int dim, double e1, double delta,
                              double cutoff = std::numeric_limits<double>::infinity()) {
    check_dim(dim);
    check_amplitude(e1, "powerlaw");
    if (!(delta > dim))
      throw DivergenceError("powerlaw: delta must exceed the dimension for integrability");
    if (!(cutoff > 0.0)) throw ParameterError("powerlaw: cutoff must be positive");
    return KernelSpec(KernelFamily::PowerLaw, dim, e1, delta, cutoff);
  }

  /// The identically-zero kernel.
  static KernelSpec zero(int dim) { return top_hat(dim, 0.0, 0.0); }

  KernelFamily family() const { return family_; }
  int dimension() const { return dim_; }
  double amplitude() const { return amplitude_; }
  double shape() const { return shape_; }
  double cutoff() const { return cutoff_; }

  bool is_zero() const { return amplitude_ == 0.0 || (family_ == KernelFamily::TopHat && shape_ == 0.0); }

  /// Radius of the closed support; 0 for the zero kernel.
  double support_radius() const { return is_zero() ? 0.0 : cutoff_; }

  /// Kernel value as a function of the radius |x|.
  double radial(double r) const {
    if (r > cutoff_) return 0.0;
    switch (family_) {
      case KernelFamily::TopHat:
        return amplitude_;
      case KernelFamily::Gaussian:
        return amplitude_ * norm_ * std::exp(-0.5 * r * r / (shape_ * shape_));
      case KernelFamily::Exponential:
        return amplitude_ * norm_ * std::exp(-r / shape_);
      case KernelFamily::PowerLaw:
        return amplitude_ * std::pow(1.0 + r, -shape_);
    }
    return 0.0;
  }

  template <std::size_t Dim>
  double operator()(const Point<Dim>& x) const {
    return radial(norm<Dim>(x));
  }

  /// Same family and cutoff with the amplitude multiplied by `factor`.
  KernelSpec scaled(double factor) const {
    if (!(factor >= 0.0)) throw ParameterError("kernel scale factor must be nonnegative");
    KernelSpec k = *this;
    k.amplitude_ *= factor;
    return k;
  }

  /// Fraction of the untruncated mass lying beyond the cutoff.
  double tail_fraction() const {
    using boost::math::gamma_q;
    switch (family_) {
      case KernelFamily::TopHat:
        return 0.0;
      case KernelFamily::Gaussian:
        return gamma_q(0.5 * dim_, 0.5 * cutoff_ * cutoff_ / (shape_ * shape_));
      case KernelFamily::Exponential:
        return gamma_q(static_cast<double>(dim_), cutoff_ / shape_);
      case KernelFamily::PowerLaw: {
        if (std::isinf(cutoff_)) return 0.0;
        // Regularized incomplete beta of r^{d-1}(1+r)^{-delta} on [cutoff, inf):
        // substitute t = r/(1+r).
        const double t = cutoff_ / (1.0 + cutoff_);
        return boost::math::ibetac(static_cast<double>(dim_), shape_ - dim_, t);
      }
    }
    return 0.0;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(family_) << "(d=" << dim_ << ", amplitude=" << amplitude_
       << ", shape=" << shape_ << ", cutoff=" << cutoff_ << ")";
    return os.str();
  }

 private:
  KernelSpec(KernelFamily f, int dim, double amp, double shape, double cutoff)
      : family_(f), dim_(dim), amplitude_(amp), shape_(shape), cutoff_(cutoff) {
    if (f == KernelFamily::Gaussian)
      norm_ = std::pow(2.0 * std::numbers::pi * shape * shape, -0.5 * dim);
    else if (f == KernelFamily::Exponential)
      norm_ = 1.0 / (unit_sphere_area(dim) * std::pow(shape, dim) * std::tgamma(dim));
  }

  static void check_dim(int dim) {
    if (dim < 1 || dim > 3) throw ParameterError("kernel dimension must be 1, 2 or 3");
  }
  static void check_amplitude(double a, const char* who) {
    if (!(a >= 0.0) || !std::isfinite(a))
      throw ParameterError(std::string(who) + ": amplitude must be finite and nonnegative");
  }

  double cutoff_for_tail(double fraction) const {
    using boost::math::gamma_q_inv;
    if (family_ == KernelFamily::Gaussian)
      return shape_ * std::sqrt(2.0 * gamma_q_inv(0.5 * dim_, fraction));
    return shape_ * gamma_q_inv(static_cast<double>(dim_), fraction);
  }

  void check_tail() const {
    if (!(cutoff_ > 0.0)) throw ParameterError(to_string(family_) + std::string(": cutoff must be positive"));
    if (tail_fraction() >= kMaxTailFraction)
      throw ParameterError(std::string(to_string(family_)) +
                           ": cutoff too small, truncated tail mass must stay below 1e-10");
  }

  KernelFamily family_;
  int dim_;
  double amplitude_;
  double shape_;
  double cutoff_;
  double norm_ = 1.0;
};

template <std::size_t Dim>
double evaluate(const KernelSpec& k, const Point<Dim>& x) {
  return k(x);
}

namespace detail {

/// Integral over R^d of g(k(|x|)) using the radial form and adaptive
/// Gauss-Kronrod quadrature.
template <class G>
double radial_integral(const KernelSpec& k, G&& g, double* error_estimate = nullptr) {
  using boost::math::quadrature::gauss_kronrod;
  const int d = k.dimension();
  auto integrand = [&](double r) {
    const double v = g(k.radial(r));
    if (v == 0.0 || d == 1) return v;
    return v * std::pow(r, d - 1);
  };
  double err = 0.0;
  const double upper = k.cutoff();
  double value = 0.0;
  if (std::isinf(upper)) {
    // Head on [0, 1]; the algebraic tail is integrated in s = log r, where it
    // decays exponentially.
    value = gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 20, 1e-13, &err);
    double e2 = 0.0;
    auto tail = [&](double s) {
      const double r = std::exp(s);
      const double w = std::isfinite(r) ? integrand(r) * r : 0.0;
      return std::isfinite(w) ? w : 0.0;
    };
    value += gauss_kronrod<double, 61>::integrate(tail, 0.0, upper, 30, 1e-13, &e2);
    err += e2;
  } else {
    value = gauss_kronrod<double, 61>::integrate(integrand, 0.0, upper, 20, 1e-13, &err);
  }
  if (error_estimate) *error_estimate = err * unit_sphere_area(d);
  return unit_sphere_area(d) * value;
}

}  // namespace detail

/// <f> = integral of the kernel over R^d.
inline double l1_norm(const KernelSpec& k) {
  if (k.is_zero()) return 0.0;
  switch (k.family()) {
    case KernelFamily::TopHat:
      return k.amplitude() * ball_volume(k.dimension(), k.shape());
    case KernelFamily::Gaussian:
    case KernelFamily::Exponential:
      return k.amplitude();
    case KernelFamily::PowerLaw:
      return detail::radial_integral(k, [](double v) { return v; });
  }
  return 0.0;
}

struct CPhi {
  double value = 0.0;
  /// phi is identically zero: simulable, but outside the existence results.
  bool degenerate = false;
};

/// c_phi = integral of (1 - exp(-phi)).
inline CPhi c_phi(const KernelSpec& phi) {
  if (phi.is_zero()) return {0.0, true};
  double v = 0.0;
  if (phi.family() == KernelFamily::TopHat)
    v = ball_volume(phi.dimension(), phi.shape()) * -std::expm1(-phi.amplitude());
  else
    v = detail::radial_integral(phi, [](double u) { return -std::expm1(-u); });
  if (!std::isfinite(v) || v <= 0.0) return {v, true};
  return {v, false};
}

struct KernelMoments {
  double l1_norm = 0.0;
  double c_phi = 0.0;
  bool c_phi_degenerate = false;
};

inline KernelMoments moments(const KernelSpec& k) {
  const CPhi c = c_phi(k);
  return {l1_norm(k), c.value, c.degenerate};
}

namespace detail {

template <std::size_t Dim, class Rng>
Point<Dim> random_direction(Rng& rng) {
  Point<Dim> u{};
  if constexpr (Dim == 1) {
    u[0] = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  } else if constexpr (Dim == 2) {
    const double t = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    u = {std::cos(t), std::sin(t)};
  } else {
    std::normal_distribution<double> n;
    double s = 0.0;
    do {
      for (auto& c : u) c = n(rng);
      s = norm<Dim>(u);
    } while (s == 0.0);
    for (auto& c : u) c /= s;
  }
  return u;
}

}  // namespace detail

/// Draws a displacement from the kernel normalized to a probability density.
template <std::size_t Dim, class Rng>
Point<Dim> sample_displacement(const KernelSpec& k, Rng& rng) {
  if (k.is_zero()) throw ParameterError("cannot sample from the zero kernel");
  if (k.dimension() != Dim) throw ParameterError("kernel dimension mismatch");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double r = 0.0;
  switch (k.family()) {
    case KernelFamily::TopHat:
      r = k.shape() * std::pow(unif(rng), 1.0 / Dim);
      break;
    case KernelFamily::Gaussian: {
      std::normal_distribution<double> n(0.0, k.shape());
      for (;;) {
        Point<Dim> x;
        for (auto& c : x) c = n(rng);
        if (norm<Dim>(x) <= k.cutoff()) return x;
      }
    }
    case KernelFamily::Exponential: {
      std::gamma_distribution<double> g(static_cast<double>(Dim), k.shape());
      do r = g(rng);
      while (r > k.cutoff());
      break;
    }
    case KernelFamily::PowerLaw: {
      // Pareto envelope (1+r)^{-beta} with beta = delta - d + 1 > 1, accepted
      // with probability (r/(1+r))^{d-1}.
      const double beta = k.shape() - Dim + 1.0;
      const double tail = std::isinf(k.cutoff()) ? 0.0 : std::pow(1.0 + k.cutoff(), 1.0 - beta);
      for (;;) {
        const double u = unif(rng);
        r = std::pow(1.0 - u * (1.0 - tail), 1.0 / (1.0 - beta)) - 1.0;
        if (r > k.cutoff()) continue;
        if constexpr (Dim == 1) break;
        if (unif(rng) <= std::pow(r / (1.0 + r), Dim - 1)) break;
      }
      break;
    }
  }
  Point<Dim> x = detail::random_direction<Dim>(rng);
  for (auto& c : x) c *= r;
  return x;
}

}  // namespace ecokin
