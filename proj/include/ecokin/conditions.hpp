#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ecokin/domination.hpp"
#include "ecokin/error.hpp"
#include "ecokin/kernels.hpp"
#include "ecokin/model.hpp"

namespace ecokin {

enum class TheoremId { EstablishmentThm, FecundityThm, VlasovScalingLemma, PicardExistence };

inline const char* to_string(TheoremId t) {
  switch (t) {
    case TheoremId::EstablishmentThm: return "EstablishmentThm";
    case TheoremId::FecundityThm: return "FecundityThm";
    case TheoremId::VlasovScalingLemma: return "VlasovScalingLemma";
    case TheoremId::PicardExistence: return "PicardExistence";
  }
  return "?";
}

/// Degenerate: phi == 0, outside every existence result. Structural: a
/// domination constant does not exist.
enum class Verdict { Satisfied, Violated, Boundary, Structural, Degenerate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::Violated: return "violated";
    case Verdict::Boundary: return "boundary";
    case Verdict::Structural: return "structural";
    case Verdict::Degenerate: return "degenerate";
  }
  return "?";
}

struct ConditionReport {
  TheoremId theorem_id = TheoremId::EstablishmentThm;
  double lhs = 0.0;
  double rhs = 0.0;
  Verdict verdict = Verdict::Violated;
  bool satisfied = false;
  std::map<std::string, double> constants;
  std::vector<std::string> notes;
};

inline constexpr double kDefaultC = 1.0 + 1e-6;
inline constexpr double kBoundaryTolerance = 1e-12;

namespace detail {

inline void decide(ConditionReport& r) {
  if (std::abs(r.lhs - r.rhs) < kBoundaryTolerance)
    r.verdict = Verdict::Boundary;
  else
    r.verdict = r.lhs < r.rhs ? Verdict::Satisfied : Verdict::Violated;
  r.satisfied = r.verdict == Verdict::Satisfied;
}

inline ConditionReport special(TheoremId id, Verdict v, std::string note) {
  ConditionReport r;
  r.theorem_id = id;
  r.verdict = v;
  r.satisfied = false;
  r.lhs = std::numeric_limits<double>::quiet_NaN();
  r.rhs = std::numeric_limits<double>::quiet_NaN();
  r.notes.push_back(std::move(note));
  return r;
}

inline void check_C(double C) {
  if (!(C > 1.0) || !std::isfinite(C)) throw ParameterError("C must be finite and greater than 1");
}

/// Left-hand sides of the two semigroup conditions.
inline double establishment_lhs(double A1, double A2, double B, double kappa, double phi_mean,
                                double C) {
  const double e = std::numbers::e;
  return A1 * kappa / (e * C) + 4.0 * A2 / (e * e * C) + A1 * B / e + kappa + A2 * phi_mean / e +
         C * B;
}

inline double fecundity_lhs(double A1, double A2, double B, double kappa, double C) {
  const double e = std::numbers::e;
  return kappa + A2 / e + C * B + (kappa / C + B) * A1 / e + 4.0 * A1 * A2 * C / (e * e);
}

/// Shared body of the semigroup checks; `volume` is c_phi (plain) or <phi>
/// (Vlasov scaling).
inline ConditionReport semigroup_check(const ModelParams& p, double C, bool vlasov) {
  p.validate();
  check_C(C);
  const Mechanism mech = p.mechanism;
  const TheoremId id = vlasov ? TheoremId::VlasovScalingLemma
                              : (mech == Mechanism::Establishment ? TheoremId::EstablishmentThm
                                                                  : TheoremId::FecundityThm);
  const CPhi cphi = c_phi(p.phi);
  if (cphi.degenerate)
    return special(id, Verdict::Degenerate,
                   "degenerate: phi is identically zero, c_phi = 0; excluded from condition checks");
  const KernelSpec b = p.enhancement();
  DominationConstants dc;
  try {
    dc = domination_constants(p.a_plus, b, p.phi, mech);
  } catch (const StructuralError& e) {
    return special(id, Verdict::Structural, e.what());
  }
  const double B = l1_norm(b);
  const double phi_mean = l1_norm(p.phi);
  const double kappa = p.kappa_plus;

  ConditionReport r;
  r.theorem_id = id;
  r.lhs = mech == Mechanism::Establishment
              ? establishment_lhs(dc.A1, dc.A2, B, kappa, phi_mean, C)
              : fecundity_lhs(dc.A1, dc.A2, B, kappa, C);
  const double volume = vlasov ? phi_mean : cphi.value;
  r.rhs = 0.5 * p.mortality * std::exp(-volume * C);
  const double D = std::exp(volume * C) * C * r.lhs;
  r.constants = {{"c_phi", cphi.value}, {"phi_mean", phi_mean}, {"A1", dc.A1},
                 {"A2", dc.A2},        {"B", B},               {"C", C},
                 {"D", D},             {"a", D / p.mortality}, {"kappa_plus", kappa},
                 {"m", p.mortality}};
  if (dc.a2_method == "sampled") r.constants["A2_margin"] = dc.a2_margin;
  r.notes.push_back("mechanism=" + std::string(to_string(mech)));
  r.notes.push_back("A2_method=" + dc.a2_method);
  if (b.is_zero()) r.notes.push_back("density-independent reduction (A2 = B = 0)");
  if (vlasov) {
    const double rhs_plain = 0.5 * p.mortality * std::exp(-cphi.value * C);
    r.constants["rhs_plain"] = rhs_plain;
    if (r.rhs > rhs_plain)
      r.notes.push_back("warning: Vlasov threshold looser than the plain one");
  }
  decide(r);
  return r;
}

}  // namespace detail

/// Establishment semigroup condition; uses the establishment domination
/// constants whatever the mechanism tag of `p` says.
inline ConditionReport check_establishment(ModelParams p, double C = kDefaultC) {
  p.mechanism = Mechanism::Establishment;
  return detail::semigroup_check(p, C, false);
}

inline ConditionReport check_fecundity(ModelParams p, double C = kDefaultC) {
  p.mechanism = Mechanism::Fecundity;
  return detail::semigroup_check(p, C, false);
}

/// The semigroup condition of p.mechanism with <phi> in place of c_phi.
inline ConditionReport check_vlasov_scaling(const ModelParams& p, double C = kDefaultC) {
  return detail::semigroup_check(p, C, true);
}

/// Contraction and ball-invariance conditions for the Picard map on the
/// ball of radius c.
inline ConditionReport check_picard(const ModelParams& p, double c) {
  p.validate();
  if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("Picard radius c must be positive");
  const TheoremId id = TheoremId::PicardExistence;
  if (c_phi(p.phi).degenerate)
    return detail::special(id, Verdict::Degenerate,
                           "degenerate: phi is identically zero; excluded from condition checks");
  const KernelSpec b = p.enhancement();
  double A = 0.0;
  try {
    A = picard_domination(p.a_plus, b, p.phi);
  } catch (const StructuralError& e) {
    return detail::special(id, Verdict::Structural, e.what());
  }
  const double e = std::numbers::e;
  const double B = l1_norm(b);
  const double phi_mean = l1_norm(p.phi);
  const double kappa = p.kappa_plus;
  ConditionReport r;
  r.theorem_id = id;
  r.lhs = kappa * (1.0 + A / e * phi_mean) + c * B * (2.0 + A / e * phi_mean);
  r.rhs = p.mortality;
  const double ball = A / e * (kappa + B);
  r.constants = {{"A", A},         {"B", B},         {"phi_mean", phi_mean},
                 {"c", c},         {"q", r.lhs / p.mortality},
                 {"ball_lhs", ball}, {"kappa_plus", kappa}, {"m", p.mortality}};
  if (p.mechanism == Mechanism::Fecundity)
    r.notes.push_back("constants derived for the establishment equation, applied to fecundity");
  detail::decide(r);
  if (ball > p.mortality) {
    r.notes.push_back("ball invariance fails: (A/e)(kappa+ + <b+>) > m");
    if (r.verdict == Verdict::Satisfied) {
      r.verdict = Verdict::Violated;
      r.satisfied = false;
    }
  }
  return r;
}

/// Runs `check` over a grid of C values and returns the report with the
/// largest margin rhs - lhs (the first satisfied one on ties).
template <class Check>
ConditionReport scan_C(Check&& check, const std::vector<double>& grid) {
  if (grid.empty()) throw ParameterError("C grid must not be empty");
  std::optional<ConditionReport> best;
  for (double C : grid) {
    ConditionReport r = check(C);
    if (r.verdict == Verdict::Structural || r.verdict == Verdict::Degenerate) return r;
    if (!best || r.rhs - r.lhs > best->rhs - best->lhs) best = std::move(r);
  }
  best->notes.push_back("C selected from a grid of " + std::to_string(grid.size()) + " values");
  return *best;
}

}  // namespace ecokin
