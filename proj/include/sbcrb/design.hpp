#pragma once

#include <optional>

#include "sbcrb/asymptotics.hpp"
#include "sbcrb/model.hpp"
#include "sbcrb/types.hpp"

namespace sbcrb {

enum class DesignVariable { Beta, Power, PilotCount };

enum class RootBranch {
  Minus,  // (-b - sqrt(disc)) / 2a
  Plus,   // (-b + sqrt(disc)) / 2a
  Linear, // leading coefficient vanished
  Search, // integer search, no quadratic involved
};

struct DesignSolution {
  DesignVariable variable = DesignVariable::Beta;
  double value = 0.0;
  bool feasible = false;
  /// |bound(value) - target|
  double residual = 0.0;
  RootBranch branch = RootBranch::Search;
  /// Bound evaluated at the returned value.
  double achieved = 0.0;
  /// The sufficient-looking condition MSE beta P - s2 c alpha + q >= 0 (q the
  /// linear coefficient of the identity-pilot root). Diagnostic only: the
  /// solver itself requires MSE beta P > s2 c alpha.
  bool printed_feasibility = false;
};

/// Training fraction beta in (0, 1] whose identity-pilot asymptotic bound equals
/// target_mse. Smallest verified root wins. Throws Infeasible.
DesignSolution solve_beta_for_mse(double target_mse, const PowerConfig& p, double c, double alpha);

/// Pilot power P > 0 for fixed beta. Smallest verified root wins. Throws Infeasible.
DesignSolution solve_power_for_mse(double target_mse, double beta, double Ps, double c, double alpha, double sigma_v2);

enum class PilotScheme { Training, SemiblindDet, SemiblindStoch };

/// Deterministic semi-blind bound with pilots P I and data Gram replaced by Ps I.
double det_crb_expected_gram(const SystemDims& d, const PowerConfig& p);

/// Bound of `scheme` at pilot count L. The stochastic scheme needs the channel spectrum.
double scheme_bound(PilotScheme scheme, const SystemDims& d, const PowerConfig& p,
                    const std::optional<RVector>& spectrum);

/// Smallest L in [K, N] whose bound does not exceed target_gamma. Throws Infeasible.
DesignSolution required_pilots(double target_gamma, int M, int K, int N, const PowerConfig& p, PilotScheme scheme,
                               const std::optional<RVector>& spectrum = std::nullopt);

CMatrix optimal_pilot_gram(double P, int K);

struct OptimalityCertificate {
  double general = 0.0;   // bound with the supplied pilot spectrum
  double identity = 0.0;  // bound with P I at the same mean power
  bool holds = false;     // general >= identity - 1e-10
};

OptimalityCertificate certify_optimality(const RVector& pilot_eigs, const AsymptoticRatios& r, double Ps,
                                         double sigma_v2);

}  // namespace sbcrb
