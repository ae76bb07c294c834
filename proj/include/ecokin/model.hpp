#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "ecokin/error.hpp"
#include "ecokin/kernels.hpp"

namespace ecokin {

/// Where the suppression factor exp(-E^phi) acts: on the newborn's landing
/// site (establishment) or on the parent's own site (fecundity).
enum class Mechanism { Establishment, Fecundity };

/// Density-independent dispersal uses kappa+ a+(x-y); density-dependent
/// dispersal adds the neighbour enhancement sum of b+ to kappa+.
enum class Dispersal { Independent, DensityDependent };

inline const char* to_string(Mechanism m) {
  return m == Mechanism::Establishment ? "establishment" : "fecundity";
}
inline const char* to_string(Dispersal d) {
  return d == Dispersal::Independent ? "independent" : "density-dependent";
}

inline Mechanism parse_mechanism(std::string_view s) {
  if (s == "establishment" || s == "est") return Mechanism::Establishment;
  if (s == "fecundity" || s == "fec") return Mechanism::Fecundity;
  throw ParameterError("unknown mechanism '" + std::string(s) + "' (expected establishment|fecundity)");
}
inline Dispersal parse_dispersal(std::string_view s) {
  if (s == "independent" || s == "density-independent") return Dispersal::Independent;
  if (s == "density-dependent" || s == "dependent") return Dispersal::DensityDependent;
  throw ParameterError("unknown dispersal '" + std::string(s) +
                       "' (expected independent|density-dependent)");
}

/// Rates and kernels of an establishment or fecundity birth-death model.
struct ModelParams {
  double mortality = 1.0;   ///< m > 0
  double kappa_plus = 0.0;  ///< baseline birth intensity, >= 0
  KernelSpec a_plus = KernelSpec::zero(1);  ///< dispersal density
  KernelSpec b_plus = KernelSpec::zero(1);  ///< fecundity enhancement
  KernelSpec phi = KernelSpec::zero(1);     ///< suppression
  Mechanism mechanism = Mechanism::Establishment;
  Dispersal dispersal = Dispersal::Independent;

  int dimension() const { return a_plus.dimension(); }

  /// b+ as seen by the dynamics: identically zero under independent dispersal.
  KernelSpec enhancement() const {
    return dispersal == Dispersal::Independent ? KernelSpec::zero(b_plus.dimension()) : b_plus;
  }

  /// Throws ParameterError on the first violated constraint. The unit-mass
  /// requirement on a+ is optional because scaled models carry eps * a+.
  void validate(bool require_unit_dispersal = true) const {
    if (!(mortality > 0.0) || !std::isfinite(mortality))
      throw ParameterError("mortality must be strictly positive");
    if (!(kappa_plus >= 0.0) || !std::isfinite(kappa_plus))
      throw ParameterError("kappa_plus must be finite and nonnegative");
    const int d = a_plus.dimension();
    if (b_plus.dimension() != d || phi.dimension() != d)
      throw ParameterError("a_plus, b_plus and phi must share one dimension");
    if (require_unit_dispersal && std::abs(l1_norm(a_plus) - 1.0) > 1e-8)
      throw ParameterError("a_plus must be a probability density (integral 1), got " +
                           std::to_string(l1_norm(a_plus)));
  }
};

}  // namespace ecokin
