#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ecokin/error.hpp"
#include "ecokin/kinetics/solver.hpp"

namespace ecokin::kinetics {

struct PicardDiagnostics {
  /// deltas[n] = ||v^{n+1} - v^n||_T, ratios[n] = deltas[n] / deltas[n-1].
  std::vector<double> deltas;
  std::vector<double> ratios;
  int iterations = 0;
  bool converged = false;
  bool stayed_nonnegative = true;
  /// Largest ||v^n||_T over the iterates.
  double max_norm = 0.0;
};

template <std::size_t Dim>
struct PicardResult {
  std::vector<double> times;
  std::vector<DensityField<Dim>> fields;
  PicardDiagnostics diagnostics;
};

/// Fixed point of the mild-solution map
///   (Phi v)_t = e^{-mt} rho0 + int_0^t e^{-m(t-s)} N(v_s) ds,
/// N the birth part, on the time nodes k*dt with the composite trapezoid rule.
/// ||.||_T is the max over nodes of the sup norm. Starts from v = rho0 for
/// all t.
template <std::size_t Dim>
PicardResult<Dim> picard_solve(const DensityField<Dim>& rho0, const KineticModel<Dim>& model,
                               const SolverConfig& cfg, Mechanism mech) {
  cfg.validate();
  rho0.check_finite();
  if (!(rho0.grid == model.grid())) throw ParameterError("initial field grid does not match the model grid");
  const std::size_t K = cfg.steps();
  const std::size_t n = rho0.size();
  const double h = cfg.dt;
  const double decay = std::exp(-model.mortality() * h);

  std::vector<std::vector<double>> v(K + 1, rho0.values), next(K + 1, std::vector<double>(n));
  std::vector<std::vector<double>> N(K + 1, std::vector<double>(n));
  PicardResult<Dim> out;
  auto& diag = out.diagnostics;
  diag.max_norm = rho0.sup_norm();
  int increasing = 0;

  for (int it = 1; it <= cfg.picard.max_iters; ++it) {
    for (std::size_t k = 0; k <= K; ++k) model.birth(mech, v[k], N[k]);
    // I_k = e^{-mh} I_{k-1} + h/2 (e^{-mh} N_{k-1} + N_k); v_k = e^{-m t_k} rho0 + I_k.
    std::vector<double> integral(n, 0.0), damped(rho0.values);
    next[0] = rho0.values;
    for (std::size_t k = 1; k <= K; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        integral[i] = decay * integral[i] + 0.5 * h * (decay * N[k - 1][i] + N[k][i]);
        damped[i] *= decay;
        next[k][i] = damped[i] + integral[i];
      }
    }
    double delta = 0.0, norm = 0.0, lo = 0.0;
    for (std::size_t k = 0; k <= K; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        delta = std::max(delta, std::abs(next[k][i] - v[k][i]));
        norm = std::max(norm, std::abs(next[k][i]));
        lo = std::min(lo, next[k][i]);
      }
    if (!std::isfinite(delta)) throw ConvergenceError("Picard iterate became non-finite");
    if (lo < -1e-12) diag.stayed_nonnegative = false;
    diag.max_norm = std::max(diag.max_norm, norm);
    if (!diag.deltas.empty()) {
      const double prev = diag.deltas.back();
      const double r = prev > 0.0 ? delta / prev : 0.0;
      diag.ratios.push_back(r);
      increasing = r >= 1.0 ? increasing + 1 : 0;
    }
    diag.deltas.push_back(delta);
    diag.iterations = it;
    std::swap(v, next);
    if (delta < cfg.picard.tol) {
      diag.converged = true;
      break;
    }
    if (increasing >= 5)
      throw ConvergenceError("Picard map is not contracting: ratio >= 1 for 5 iterations (last delta " +
                             std::to_string(delta) + ")");
  }
  if (!diag.converged)
    throw ConvergenceError("Picard iteration did not reach tol " + std::to_string(cfg.picard.tol) + " in " +
                           std::to_string(cfg.picard.max_iters) + " iterations (last delta " +
                           std::to_string(diag.deltas.back()) + ")");
  for (std::size_t k = 0; k <= K; ++k) {
    if (k % cfg.record_every != 0 && k != K) continue;
    out.times.push_back(static_cast<double>(k) * h);
    DensityField<Dim> f(rho0.grid);
    f.values = v[k];
    out.fields.push_back(std::move(f));
  }
  return out;
}

/// Trapezoid errors expand in even powers of dt, so combining runs at dt and
/// dt/2 as (4 fine - coarse) / 3 removes the leading term. Returns the
/// extrapolated fields on the coarse record times; `error_estimate` is the
/// largest |fine - coarse| / 3 over those times.
template <std::size_t Dim>
struct Extrapolated {
  std::vector<double> times;
  std::vector<DensityField<Dim>> fields;
  double error_estimate = 0.0;
};

template <std::size_t Dim>
Extrapolated<Dim> richardson(const PicardResult<Dim>& coarse, const PicardResult<Dim>& fine) {
  Extrapolated<Dim> out;
  std::size_t j = 0;
  for (std::size_t k = 0; k < coarse.times.size(); ++k) {
    const double t = coarse.times[k];
    while (j < fine.times.size() && fine.times[j] < t - 1e-12) ++j;
    if (j == fine.times.size() || std::abs(fine.times[j] - t) > 1e-12)
      throw ParameterError("Richardson: fine run lacks the coarse record time " + std::to_string(t));
    DensityField<Dim> f(coarse.fields[k].grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double c = coarse.fields[k][i], d = fine.fields[j][i];
      f[i] = (4.0 * d - c) / 3.0;
      out.error_estimate = std::max(out.error_estimate, std::abs(d - c) / 3.0);
    }
    out.times.push_back(t);
    out.fields.push_back(std::move(f));
  }
  return out;
}

}  // namespace ecokin::kinetics
