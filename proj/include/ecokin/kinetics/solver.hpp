#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ecokin/error.hpp"
#include "ecokin/kernels.hpp"
#include "ecokin/kinetics/convolution.hpp"
#include "ecokin/kinetics/density_field.hpp"
#include "ecokin/model.hpp"

namespace ecokin::kinetics {

enum class Scheme { RK4, ExponentialEuler };

inline const char* to_string(Scheme s) { return s == Scheme::RK4 ? "rk4" : "exponential-euler"; }

inline Scheme parse_scheme(const std::string& s) {
  if (s == "rk4") return Scheme::RK4;
  if (s == "exponential-euler") return Scheme::ExponentialEuler;
  throw ParameterError("unknown scheme '" + s + "' (expected rk4|exponential-euler)");
}

struct PicardConfig {
  int max_iters = 100;
  double tol = 1e-10;
};

struct SolverConfig {
  Scheme scheme = Scheme::RK4;
  double dt = 0.01;
  double t_end = 1.0;
  /// Keep every record_every-th step (the initial field is always kept).
  std::size_t record_every = 1;
  PicardConfig picard;
  /// Density bound c used in the stability estimate; <= 0 means sup rho0.
  double density_bound = 0.0;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ParameterError("t_end must be nonnegative");
    if (record_every == 0) throw ParameterError("record_every must be at least 1");
    if (picard.max_iters < 1) throw ParameterError("picard.max_iters must be at least 1");
    if (!(picard.tol > 0.0)) throw ParameterError("picard.tol must be positive");
    if (std::abs(static_cast<double>(steps()) * dt - t_end) > 1e-9 * std::max(1.0, t_end))
      throw ParameterError("t_end must be an integer multiple of dt");
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }
};

/// Right-hand sides of the two kinetic equations on a fixed grid.
template <std::size_t Dim>
class KineticModel {
 public:
  KineticModel(const ModelParams& p, const Grid<Dim>& grid)
      : p_(p), grid_(grid), a_(p.a_plus, grid), b_(p.enhancement(), grid), phi_(p.phi, grid) {
    p.validate(false);
    if (p.dimension() != static_cast<int>(Dim)) throw ParameterError("kinetic model: kernel dimension mismatch");
  }

  const ModelParams& params() const { return p_; }
  const Grid<Dim>& grid() const { return grid_; }
  double mortality() const { return p_.mortality; }
  const Convolver<Dim>& dispersal() const { return a_; }

  /// Birth part, rhs + m rho.
  void birth(Mechanism mech, const std::vector<double>& rho, std::vector<double>& out) const {
    const std::size_t n = rho.size();
    phi_.apply(rho, tmp_phi_);
    b_.apply(rho, tmp_b_);
    const double kappa = p_.kappa_plus;
    if (mech == Mechanism::Establishment) {
      // kappa (rho * a) e^{-rho*phi} + ({(rho*b) rho} * a) e^{-rho*phi}
      tmp_u_.resize(n);
      for (std::size_t i = 0; i < n; ++i) tmp_u_[i] = (kappa + tmp_b_[i]) * rho[i];
      a_.apply(tmp_u_, out);
      for (std::size_t i = 0; i < n; ++i) out[i] *= std::exp(-tmp_phi_[i]);
    } else {
      // ({kappa rho e^{-rho*phi} + (rho*b) rho e^{-rho*phi}} * a)
      tmp_u_.resize(n);
      for (std::size_t i = 0; i < n; ++i) tmp_u_[i] = (kappa + tmp_b_[i]) * rho[i] * std::exp(-tmp_phi_[i]);
      a_.apply(tmp_u_, out);
    }
  }

  void rhs(Mechanism mech, const std::vector<double>& rho, std::vector<double>& out) const {
    birth(mech, rho, out);
    for (std::size_t i = 0; i < rho.size(); ++i) out[i] -= p_.mortality * rho[i];
  }

  DensityField<Dim> rhs(Mechanism mech, const DensityField<Dim>& rho) const {
    if (!(rho.grid == grid_)) throw ParameterError("field grid does not match the model grid");
    DensityField<Dim> out(grid_);
    rhs(mech, rho.values, out.values);
    return out;
  }

  DensityField<Dim> rhs_establishment(const DensityField<Dim>& rho) const {
    return rhs(Mechanism::Establishment, rho);
  }
  DensityField<Dim> rhs_fecundity(const DensityField<Dim>& rho) const { return rhs(Mechanism::Fecundity, rho); }

 private:
  ModelParams p_;
  Grid<Dim> grid_;
  Convolver<Dim> a_, b_, phi_;
  mutable std::vector<double> tmp_phi_, tmp_b_, tmp_u_;
};

/// Scalar law shared by both equations at a constant density u:
/// du/dt = -m u + kappa u e^{-u<phi>} + <b> u^2 e^{-u<phi>}.
inline double homogeneous_rhs(const ModelParams& p, double u) {
  const double P = l1_norm(p.phi);
  const double B = l1_norm(p.enhancement());
  const double A = l1_norm(p.a_plus);
  return -p.mortality * u + A * (p.kappa_plus * u + B * u * u) * std::exp(-u * P);
}

template <std::size_t Dim>
struct Solution {
  std::vector<double> times;
  std::vector<DensityField<Dim>> fields;
  /// Per step (including t = 0).
  std::vector<double> step_times;
  std::vector<double> min_values;
  std::vector<double> sup_norms;
  std::vector<std::string> warnings;
};

/// Explicit time stepping of one kinetic equation.
template <std::size_t Dim>
Solution<Dim> integrate(const DensityField<Dim>& rho0, const KineticModel<Dim>& model, const SolverConfig& cfg,
                        Mechanism mech) {
  cfg.validate();
  rho0.check_finite();
  if (!(rho0.grid == model.grid())) throw ParameterError("initial field grid does not match the model grid");
  const auto& p = model.params();
  const double m = p.mortality;
  const double c = cfg.density_bound > 0.0 ? cfg.density_bound : rho0.sup_norm();
  const double stiffness = cfg.dt * (m + p.kappa_plus + c * l1_norm(p.enhancement()));

  Solution<Dim> sol;
  if (stiffness > 0.5)
    sol.warnings.push_back("stability: dt*(m + kappa + c<b>) = " + std::to_string(stiffness) + " exceeds 0.5");
  const double blowup = 1e3 * std::max(rho0.sup_norm(), 1e-300);
  const std::size_t steps = cfg.steps();
  const std::size_t n = rho0.size();

  std::vector<double> u = rho0.values, k1(n), k2(n), k3(n), k4(n), w(n);
  bool warned_negative = false;
  auto observe = [&](std::size_t step, double t) {
    double lo = u[0], hi = 0.0;
    for (double v : u) {
      if (!std::isfinite(v)) throw BlowUpError("non-finite density at t=" + std::to_string(t));
      lo = std::min(lo, v);
      hi = std::max(hi, std::abs(v));
    }
    sol.step_times.push_back(t);
    sol.min_values.push_back(lo);
    sol.sup_norms.push_back(hi);
    if (hi > blowup) throw BlowUpError("sup norm exceeded 1e3 x its initial value at t=" + std::to_string(t));
    if (lo < -1e-8 && !warned_negative) {
      sol.warnings.push_back("negativity: min density " + std::to_string(lo) + " at t=" + std::to_string(t));
      warned_negative = true;
    }
    if (step % cfg.record_every == 0 || step == steps) {
      sol.times.push_back(t);
      DensityField<Dim> f(rho0.grid);
      f.values = u;
      sol.fields.push_back(std::move(f));
    }
  };

  observe(0, 0.0);
  const double h = cfg.dt;
  const double decay = std::exp(-m * h);
  const double phi1 = -std::expm1(-m * h) / m;  // (1 - e^{-mh}) / m
  for (std::size_t s = 1; s <= steps; ++s) {
    if (cfg.scheme == Scheme::RK4) {
      model.rhs(mech, u, k1);
      for (std::size_t i = 0; i < n; ++i) w[i] = u[i] + 0.5 * h * k1[i];
      model.rhs(mech, w, k2);
      for (std::size_t i = 0; i < n; ++i) w[i] = u[i] + 0.5 * h * k2[i];
      model.rhs(mech, w, k3);
      for (std::size_t i = 0; i < n; ++i) w[i] = u[i] + h * k3[i];
      model.rhs(mech, w, k4);
      for (std::size_t i = 0; i < n; ++i) u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    } else {
      model.birth(mech, u, k1);
      for (std::size_t i = 0; i < n; ++i) u[i] = decay * u[i] + phi1 * k1[i];
    }
    observe(s, static_cast<double>(s) * h);
  }
  return sol;
}

}  // namespace ecokin::kinetics
