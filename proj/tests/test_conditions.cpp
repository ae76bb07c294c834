#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ecokin/conditions.hpp"

using namespace ecokin;

namespace {

constexpr double kE = 2.718281828459045;

struct TopHatInstance {
  double ra, rb, hb, rphi, hphi, kappa, m;
  bool dependent;
};

ModelParams make(const TopHatInstance& t, Mechanism mech) {
  ModelParams p;
  p.mortality = t.m;
  p.kappa_plus = t.kappa;
  p.a_plus = KernelSpec::top_hat(1, 1.0 / (2.0 * t.ra), t.ra);
  p.b_plus = KernelSpec::top_hat(1, t.hb, t.rb);
  p.phi = KernelSpec::top_hat(1, t.hphi, t.rphi);
  p.mechanism = mech;
  p.dispersal = t.dependent ? Dispersal::DensityDependent : Dispersal::Independent;
  return p;
}

TopHatInstance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TopHatInstance t;
  t.ra = 0.2 + 0.3 * u(rng);
  t.rb = 0.1 + 0.3 * u(rng);
  t.rphi = t.ra + t.rb + 0.5 * u(rng);
  t.hb = 2.0 * u(rng);
  t.hphi = 0.2 + 2.0 * u(rng);
  t.kappa = 3.0 * u(rng);
  t.m = 0.1 + 30.0 * u(rng);
  t.dependent = u(rng) < 0.5;
  return t;
}

// Spreadsheet-style oracle: every constant written out by hand for 1-d
// top-hat kernels, formulas typed independently of the library.
struct Oracle {
  double lhs, rhs, rhs_vlasov;
};

Oracle oracle(const TopHatInstance& t, Mechanism mech, double C) {
  const double ha = 1.0 / (2.0 * t.ra);
  const double cphi = 2.0 * t.rphi * (1.0 - std::exp(-t.hphi));
  const double phim = 2.0 * t.rphi * t.hphi;
  const double B = t.dependent ? 2.0 * t.rb * t.hb : 0.0;
  const double k = t.kappa;
  double lhs = 0.0;
  if (mech == Mechanism::Establishment) {
    const double A1 = ha / t.hphi;
    const double A2 = t.dependent ? ha * t.hb / (t.hphi * t.hphi) : 0.0;
    lhs = A1 * k / (kE * C) + 4 * A2 / (kE * kE * C) + A1 * B / kE + k + A2 * phim / kE + C * B;
  } else {
    const double A1 = ha / (t.hphi * std::exp(-t.hphi));
    const double A2 = t.dependent ? t.hb / t.hphi : 0.0;
    lhs = k + A2 / kE + C * B + (k / C + B) * A1 / kE + 4 * A1 * A2 * C / (kE * kE);
  }
  return {lhs, t.m / 2 * std::exp(-cphi * C), t.m / 2 * std::exp(-phim * C)};
}

}  // namespace

TEST(Conditions, ThresholdArithmeticExample) {
  // b+ = 0, A1 = 1, C = 1, c_phi = 0.5, kappa+ = 1: threshold m* = 2(1/e + 1)e^{0.5}.
  const double lhs = detail::establishment_lhs(1.0, 0.0, 0.0, 1.0, 0.0, 1.0);
  EXPECT_NEAR(lhs, 1.0 / kE + 1.0, 1e-15);
  const double m_star = 2.0 * lhs * std::exp(0.5);
  EXPECT_NEAR(m_star, 4.510, 1e-3);
}

TEST(Conditions, OracleReevaluation) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_instance(rng);
    const double C = 1.0 + 2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (auto mech : {Mechanism::Establishment, Mechanism::Fecundity}) {
      const auto o = oracle(t, mech, C);
      const auto p = make(t, mech);
      const auto r = mech == Mechanism::Establishment ? check_establishment(p, C) : check_fecundity(p, C);
      ASSERT_NEAR(r.lhs, o.lhs, 1e-12 * std::max(1.0, o.lhs));
      ASSERT_NEAR(r.rhs, o.rhs, 1e-12 * std::max(1.0, o.rhs));
      const auto v = check_vlasov_scaling(p, C);
      ASSERT_NEAR(v.lhs, o.lhs, 1e-12 * std::max(1.0, o.lhs));
      ASSERT_NEAR(v.rhs, o.rhs_vlasov, 1e-12 * std::max(1.0, o.rhs_vlasov));
      EXPECT_EQ(r.satisfied, o.lhs < o.rhs);
      for (const auto& [name, value] : r.constants) {
        EXPECT_TRUE(std::isfinite(value)) << name;
        EXPECT_GE(value, 0.0) << name;
      }
    }
  }
}

TEST(Conditions, DensityIndependentReductions) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    auto t = random_instance(rng);
    t.dependent = false;
    const double C = 1.0 + std::uniform_real_distribution<double>(0.0, 3.0)(rng);
    const auto est = check_establishment(make(t, Mechanism::Establishment), C);
    const auto fec = check_fecundity(make(t, Mechanism::Fecundity), C);
    const double A1e = est.constants.at("A1"), A1f = fec.constants.at("A1");
    EXPECT_EQ(est.constants.at("A2"), 0.0);
    EXPECT_EQ(est.constants.at("B"), 0.0);
    EXPECT_NEAR(est.lhs, A1e * t.kappa / (kE * C) + t.kappa, 1e-13);
    EXPECT_NEAR(fec.lhs, t.kappa * (1.0 + A1f / (kE * C)), 1e-13);
  }
}

TEST(Conditions, ZeroBirthAlwaysSatisfied) {
  TopHatInstance t{0.3, 0.2, 0.0, 0.6, 1.0, 0.0, 1e-3, false};
  EXPECT_TRUE(check_establishment(make(t, Mechanism::Establishment)).satisfied);
  EXPECT_TRUE(check_fecundity(make(t, Mechanism::Fecundity)).satisfied);
  EXPECT_EQ(check_establishment(make(t, Mechanism::Establishment)).lhs, 0.0);
}

TEST(Conditions, MortalityBisectionFlipsOnce) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto t = random_instance(rng);
    for (auto mech : {Mechanism::Establishment, Mechanism::Fecundity}) {
      auto verdict = [&](double m) {
        auto tt = t;
        tt.m = m;
        const auto p = make(tt, mech);
        return (mech == Mechanism::Establishment ? check_establishment(p) : check_fecundity(p)).satisfied;
      };
      int flips = 0;
      bool prev = verdict(0.01);
      for (double m = 0.01; m < 200.0; m *= 1.05) {
        const bool cur = verdict(m);
        if (cur != prev) ++flips;
        EXPECT_TRUE(!prev || cur) << "satisfied must be monotone upward in m";
        prev = cur;
      }
      EXPECT_LE(flips, 1);
      // The bisected threshold matches m* = 2 lhs e^{c_phi C}.
      double lo = 1e-3, hi = 1e4;
      if (verdict(lo)) continue;
      for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (verdict(mid) ? hi : lo) = mid;
      }
      const auto o = oracle(t, mech, kDefaultC);
      const double cphi = 2.0 * t.rphi * (1.0 - std::exp(-t.hphi));
      EXPECT_NEAR(hi, 2.0 * o.lhs * std::exp(cphi * kDefaultC), 1e-9 * hi);
    }
  }
}

TEST(Conditions, AntitoneInKappaAndB) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    auto t = random_instance(rng);
    t.dependent = true;
    for (auto mech : {Mechanism::Establishment, Mechanism::Fecundity}) {
      bool prev = true;
      for (double k = 0.0; k < 10.0; k += 0.1) {
        t.kappa = k;
        const bool cur = check_vlasov_scaling(make(t, mech)).satisfied;
        EXPECT_TRUE(prev || !cur);
        prev = cur;
      }
      t.kappa = 0.5;
      prev = true;
      for (double hb = 0.0; hb < 5.0; hb += 0.05) {
        t.hb = hb;
        const auto p = make(t, mech);
        const bool cur = (mech == Mechanism::Establishment ? check_establishment(p) : check_fecundity(p)).satisfied;
        EXPECT_TRUE(prev || !cur);
        prev = cur;
      }
    }
  }
}

TEST(Conditions, AntitoneInCWhenEffectiveVolumeAtLeastOne) {
  // With c_phi >= 1 every term of lhs * e^{c_phi C} increases with C > 1.
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    auto t = random_instance(rng);
    t.rphi = 1.0;
    t.hphi = 2.0;
    for (auto mech : {Mechanism::Establishment, Mechanism::Fecundity}) {
      bool prev = true;
      for (double C = 1.0 + 1e-6; C < 5.0; C += 0.02) {
        const auto p = make(t, mech);
        const bool cur = (mech == Mechanism::Establishment ? check_establishment(p, C) : check_fecundity(p, C)).satisfied;
        EXPECT_TRUE(prev || !cur);
        prev = cur;
      }
    }
  }
}

TEST(Conditions, VlasovAtLeastAsStrict) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_instance(rng);
    for (auto mech : {Mechanism::Establishment, Mechanism::Fecundity}) {
      const auto p = make(t, mech);
      const auto v = check_vlasov_scaling(p);
      const auto plain = mech == Mechanism::Establishment ? check_establishment(p) : check_fecundity(p);
      EXPECT_LE(v.rhs, plain.rhs);
      EXPECT_EQ(v.constants.at("rhs_plain"), plain.rhs);
      if (v.satisfied) {
        EXPECT_TRUE(plain.satisfied);
      }
    }
  }
}

TEST(Conditions, VlasovTopHatThresholdRatio) {
  TopHatInstance t{0.5, 0.2, 0.0, 0.5, 1.0, 1.0, 10.0, false};
  const auto p = make(t, Mechanism::Establishment);
  for (double C : {1.0 + 1e-6, 2.0}) {
    const auto v = check_vlasov_scaling(p, C);
    const auto plain = check_establishment(p, C);
    EXPECT_NEAR(v.constants.at("phi_mean"), 1.0, 1e-15);
    EXPECT_NEAR(plain.constants.at("c_phi"), 0.63212, 1e-5);
    EXPECT_NEAR(plain.rhs / v.rhs, std::exp(std::exp(-1.0) * C), 1e-12);
  }
  // Weak suppression: eps phi with eps = 0.01, thresholds nearly coincide.
  auto q = p;
  q.phi = p.phi.scaled(0.01);
  q.a_plus = KernelSpec::top_hat(1, 1.0, 0.5);
  const auto v = check_vlasov_scaling(q);
  const auto plain = check_establishment(q);
  EXPECT_NEAR(plain.rhs / v.rhs, 1.0, 1e-4);
}

TEST(Conditions, BoundaryTie) {
  TopHatInstance t{0.5, 0.2, 0.0, 0.5, 1.0, 1.0, 1.0, false};
  const auto o = oracle(t, Mechanism::Establishment, kDefaultC);
  t.m = 2.0 * o.lhs * std::exp(2.0 * 0.5 * (1.0 - std::exp(-1.0)) * kDefaultC);
  const auto r = check_establishment(make(t, Mechanism::Establishment));
  EXPECT_EQ(r.verdict, Verdict::Boundary);
  EXPECT_FALSE(r.satisfied);
}

TEST(Conditions, DegenerateAndStructural) {
  ModelParams p;
  p.mortality = 1.0;
  p.kappa_plus = 1.0;
  p.a_plus = KernelSpec::top_hat(1, 0.5, 1.0);
  p.phi = KernelSpec::zero(1);
  EXPECT_EQ(check_establishment(p).verdict, Verdict::Degenerate);
  EXPECT_EQ(check_picard(p, 1.0).verdict, Verdict::Degenerate);
  p.phi = KernelSpec::top_hat(1, 1.0, 0.5);
  const auto r = check_establishment(p);
  EXPECT_EQ(r.verdict, Verdict::Structural);
  EXPECT_NE(r.notes.front().find("condition structurally violated"), std::string::npos);
  EXPECT_EQ(check_picard(p, 1.0).verdict, Verdict::Structural);
}

TEST(Conditions, RejectsBadInputs) {
  TopHatInstance t{0.5, 0.2, 0.0, 0.5, 1.0, 1.0, 1.0, false};
  auto p = make(t, Mechanism::Establishment);
  EXPECT_THROW(check_establishment(p, 1.0), ParameterError);
  p.mortality = 0.0;
  try {
    check_establishment(p);
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_STREQ(e.what(), "mortality must be strictly positive");
  }
}

TEST(Picard, ArithmeticExample) {
  ModelParams p;
  p.mortality = 2.0;
  p.kappa_plus = 1.0;
  p.a_plus = KernelSpec::top_hat(1, 1.0, 0.5);
  p.phi = KernelSpec::top_hat(1, 1.0, 0.5);
  const auto r = check_picard(p, 1.0);
  EXPECT_NEAR(r.constants.at("A"), 1.0, 1e-15);
  EXPECT_NEAR(r.constants.at("q"), (1.0 + 1.0 / kE) / 2.0, 1e-15);
  EXPECT_NEAR(r.constants.at("q"), 0.684, 1e-3);
  EXPECT_TRUE(r.satisfied);
}

TEST(Picard, DensityIndependentAndBall) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    auto t = random_instance(rng);
    t.dependent = false;
    const auto p = make(t, Mechanism::Establishment);
    const auto r = check_picard(p, 0.7);
    const double A = r.constants.at("A");
    const double phim = 2.0 * t.rphi * t.hphi;
    EXPECT_NEAR(A, 1.0 / (2.0 * t.ra) / t.hphi, 1e-13);
    EXPECT_NEAR(r.constants.at("q"), t.kappa / t.m * (1.0 + A / kE * phim), 1e-13);
    const bool ball = A / kE * t.kappa <= t.m;
    EXPECT_EQ(r.satisfied, r.constants.at("q") < 1.0 && ball);
  }
}

TEST(Picard, FullFormulaAndAlphaCoupling) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    auto t = random_instance(rng);
    t.dependent = true;
    const auto p = make(t, Mechanism::Establishment);
    const double alpha = 0.5, C = 1.7;
    const auto r = check_picard(p, alpha * C);
    const double ha = 1.0 / (2.0 * t.ra);
    const double A = std::max(ha, t.hb) / t.hphi;
    const double B = 2.0 * t.rb * t.hb, phim = 2.0 * t.rphi * t.hphi;
    const double lhs = t.kappa * (1 + A / kE * phim) + alpha * C * B * (2 + A / kE * phim);
    EXPECT_NEAR(r.lhs, lhs, 1e-12 * std::max(1.0, lhs));
    EXPECT_EQ(r.constants.at("c"), alpha * C);
  }
}

TEST(Conditions, ScanC) {
  TopHatInstance t{0.5, 0.2, 0.0, 0.5, 1.0, 1.0, 4.0, false};
  const auto p = make(t, Mechanism::Establishment);
  std::vector<double> grid;
  for (double C = 1.0 + 1e-6; C < 4.0; C += 0.1) grid.push_back(C);
  const auto best = scan_C([&](double C) { return check_establishment(p, C); }, grid);
  for (double C : grid) {
    const auto r = check_establishment(p, C);
    EXPECT_LE(r.rhs - r.lhs, best.rhs - best.lhs + 1e-15);
  }
}
