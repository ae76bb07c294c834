#include <gtest/gtest.h>

#include <cmath>

#include "ecokin/conditions.hpp"
#include "ecokin/kinetics.hpp"

using namespace ecokin;
using namespace ecokin::kinetics;

namespace {

using P1 = Point<1>;

// A contraction instance: mortality dominates the birth terms.
ModelParams contracting() {
  ModelParams p;
  p.mortality = 2.5;
  p.kappa_plus = 1.0;
  p.dispersal = Dispersal::DensityDependent;
  p.a_plus = KernelSpec::gaussian(1, 1.0, 1.0);
  p.b_plus = KernelSpec::gaussian(1, 0.2, 1.0);
  p.phi = KernelSpec::gaussian(1, 1.0, 1.0);
  return p;
}

DensityField<1> bump(const Grid<1>& g, double base, double height) {
  return DensityField<1>::from_function(g, [&](const P1& x) {
    const double d = x[0] - 0.5 * g.length;
    return base + height * std::exp(-d * d / 8.0);
  });
}

}  // namespace

TEST(Picard, PureDecayIsReachedInOneStep) {
  auto p = contracting();
  p.kappa_plus = 0.0;
  p.b_plus = KernelSpec::zero(1);
  const Grid<1> g(40.0, 64);
  const KineticModel<1> model(p, g);
  SolverConfig cfg;
  cfg.dt = 0.05;
  cfg.t_end = 1.0;
  const auto rho0 = bump(g, 0.1, 0.5);
  const auto res = picard_solve(rho0, model, cfg, Mechanism::Establishment);
  EXPECT_TRUE(res.diagnostics.converged);
  ASSERT_EQ(res.diagnostics.deltas.size(), 2u);
  EXPECT_GT(res.diagnostics.deltas[0], 0.0);
  EXPECT_EQ(res.diagnostics.deltas[1], 0.0);
  for (std::size_t k = 0; k < res.times.size(); ++k)
    for (std::size_t i = 0; i < g.size(); ++i)
      EXPECT_NEAR(res.fields[k][i], std::exp(-p.mortality * res.times[k]) * rho0[i], 1e-14);
}

TEST(Picard, ContractionWithinReportedRate) {
  const auto p = contracting();
  const double c = 1.0;
  const auto report = check_picard(p, c);
  ASSERT_TRUE(report.satisfied);
  const double q = report.constants.at("q");
  const Grid<1> g(64.0, 128);
  const KineticModel<1> model(p, g);
  SolverConfig cfg;
  cfg.dt = 0.02;
  cfg.t_end = 2.0;
  cfg.picard.tol = 1e-11;
  for (auto mech : {Mechanism::Establishment, Mechanism::Fecundity}) {
    const auto res = picard_solve(bump(g, 0.3, 0.6), model, cfg, mech);
    const auto& d = res.diagnostics;
    EXPECT_TRUE(d.converged);
    EXPECT_TRUE(d.stayed_nonnegative);
    EXPECT_LE(d.max_norm, c);
    for (double r : d.ratios) EXPECT_LE(r, q + 0.05);
    // Geometric decay: least-squares slope of log delta past n = 2.
    double st = 0, sy = 0, stt = 0, sty = 0, n = 0;
    for (std::size_t k = 2; k < d.deltas.size(); ++k) {
      if (d.deltas[k] <= 0.0) continue;
      const double y = std::log(d.deltas[k]);
      st += k;
      sy += y;
      stt += double(k) * k;
      sty += k * y;
      n += 1;
    }
    ASSERT_GE(n, 3);
    EXPECT_LE((n * sty - st * sy) / (n * stt - st * st), std::log(q) + 0.05);
  }
}

TEST(Picard, AgreesWithTimeStepping) {
  const auto p = contracting();
  const Grid<1> g(64.0, 128);
  const KineticModel<1> model(p, g);
  SolverConfig cfg;
  cfg.dt = 0.02;
  cfg.t_end = 1.0;
  cfg.record_every = 5;
  cfg.picard.tol = 1e-12;
  const auto rho0 = bump(g, 0.3, 0.6);
  auto fine_cfg = cfg;
  fine_cfg.dt = cfg.dt / 2;
  fine_cfg.record_every = 2 * cfg.record_every;
  for (auto mech : {Mechanism::Establishment, Mechanism::Fecundity}) {
    const auto coarse = picard_solve(rho0, model, cfg, mech);
    const auto fine = picard_solve(rho0, model, fine_cfg, mech);
    const auto ex = richardson(coarse, fine);
    auto rk_cfg = cfg;
    rk_cfg.dt = 0.005;
    rk_cfg.record_every = 20;
    const auto rk = integrate(rho0, model, rk_cfg, mech);
    ASSERT_EQ(rk.times.size(), ex.times.size());
    // Unextrapolated trapezoid error is O(dt^2) and visible; the extrapolated
    // one is far below it.
    double raw = 0.0, err = 0.0;
    for (std::size_t k = 0; k < ex.times.size(); ++k) {
      EXPECT_NEAR(rk.times[k], ex.times[k], 1e-12);
      raw = std::max(raw, sup_distance(coarse.fields[k], rk.fields[k]));
      err = std::max(err, sup_distance(ex.fields[k], rk.fields[k]));
    }
    EXPECT_GT(ex.error_estimate, 0.0);
    EXPECT_LE(err, std::max(5.0 * cfg.picard.tol, ex.error_estimate));
    EXPECT_LT(err, 0.05 * raw);
  }
}

TEST(Picard, NonConvergenceIsReported) {
  const auto p = contracting();
  const Grid<1> g(64.0, 64);
  const KineticModel<1> model(p, g);
  SolverConfig cfg;
  cfg.dt = 0.05;
  cfg.t_end = 1.0;
  cfg.picard.max_iters = 2;
  EXPECT_THROW(picard_solve(bump(g, 0.3, 0.6), model, cfg, Mechanism::Establishment), ConvergenceError);
  auto wild = p;
  wild.mortality = 0.1;
  wild.kappa_plus = 5.0;
  wild.b_plus = KernelSpec::gaussian(1, 4.0, 1.0);
  wild.phi = KernelSpec::gaussian(1, 0.01, 1.0);
  cfg.picard.max_iters = 200;
  cfg.t_end = 3.0;
  EXPECT_THROW(picard_solve(bump(g, 1.0, 1.0), KineticModel<1>(wild, g), cfg, Mechanism::Establishment),
               ConvergenceError);
}
