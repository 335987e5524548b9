#include "sbcrb/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sbcrb/errors.hpp"
#include "sbcrb/exact_crb.hpp"

namespace sbcrb {

namespace {

struct Root {
  double x;
  RootBranch branch;
};

std::vector<Root> real_roots(double a, double b, double d) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(d)});
  if (scale == 0.0) return {};
  if (std::abs(a) <= 1e-14 * scale) {
    if (b == 0.0) return {};
    return {{-d / b, RootBranch::Linear}};
  }
  const double disc = b * b - 4.0 * a * d;
  if (disc < 0.0) return {};
  const double sq = std::sqrt(disc);
  // stable pair: one root from the quadratic formula, the other from Vieta
  const double qv = -0.5 * (b + std::copysign(sq, b));
  double r1 = qv / a;
  double r2 = qv != 0.0 ? d / qv : -b / (2.0 * a);
  Root minus{0, RootBranch::Minus}, plus{0, RootBranch::Plus};
  // identify which is the '-' and '+' branch for a > 0 ordering
  const double lo = std::min(r1, r2), hi = std::max(r1, r2);
  if (a > 0) {
    minus.x = lo;
    plus.x = hi;
  } else {
    minus.x = hi;
    plus.x = lo;
  }
  return {minus, plus};
}

double tol_for(double target) { return 1e-8 * std::max(1.0, target); }

void check_target(double t) {
  if (!(std::isfinite(t) && t > 0.0)) throw DomainError("target bound must be positive and finite");
}

}  // namespace

DesignSolution solve_beta_for_mse(double mse, const PowerConfig& p, double c, double alpha) {
  check_target(mse);
  validate_powers(p);
  validate_ratios({c, alpha, 1.0});
  const double P = p.P, Ps = p.Ps, s2 = p.sigma_v2;
  const double a = mse * P / (c * Ps) * (mse * c * P * Ps + (1.0 - c) * s2 * (P - Ps));
  const double b = -s2 / (c * Ps) * ((1.0 - c) * (s2 * alpha * (P - c * Ps) - mse * P * Ps) + mse * P * Ps * c * alpha * (c + 1.0));
  const double d = s2 * s2 * alpha * (alpha * c + c - 1.0);

  std::optional<DesignSolution> best;
  for (Root r : real_roots(a, b, d)) {
    double beta = r.x;
    if (!(beta > 0.0) || beta > 1.0 + 1e-12) continue;
    beta = std::min(beta, 1.0);
    if (!(mse * beta * P > s2 * c * alpha)) continue;
    const double got = det_crb_asymptotic({c, alpha, beta}, p).value;
    const double res = std::abs(got - mse);
    if (res > tol_for(mse)) continue;
    if (best && best->value <= beta) continue;
    DesignSolution s;
    s.variable = DesignVariable::Beta;
    s.value = beta;
    s.feasible = true;
    s.residual = res;
    s.branch = r.branch;
    s.achieved = got;
    s.printed_feasibility = mse * beta * P - s2 * c * alpha + beta * P - c * alpha * Ps + (1.0 - beta) * Ps >= 0.0;
    best = s;
  }
  if (!best) throw Infeasible("no training fraction in (0, 1] attains the target bound " + std::to_string(mse));
  return *best;
}

DesignSolution solve_power_for_mse(double mse, double beta, double Ps, double c, double alpha, double s2) {
  check_target(mse);
  validate_ratios({c, alpha, beta});
  validate_powers({1.0, Ps, s2});
  const double b2 = beta * beta;
  const double a1 = mse * b2 / (c * Ps) * (mse * c * Ps + s2 * (1.0 - c));
  const double b1 = -s2 * beta / (c * Ps) *
                    ((1.0 - c) * (alpha * s2 - mse * Ps + Ps * beta * mse) + c * alpha * Ps * mse * (1.0 + c));
  const double d1 = s2 * s2 * ((1.0 - c) * (beta * alpha - alpha) + alpha * alpha * c);

  std::optional<DesignSolution> best;
  for (Root r : real_roots(a1, b1, d1)) {
    const double P = r.x;
    if (!(P > 0.0) || !std::isfinite(P)) continue;
    if (!(mse * beta * P > s2 * c * alpha)) continue;
    const double got = det_crb_asymptotic({c, alpha, beta}, {P, Ps, s2}).value;
    const double res = std::abs(got - mse);
    if (res > tol_for(mse)) continue;
    if (best && best->value <= P) continue;
    DesignSolution s;
    s.variable = DesignVariable::Power;
    s.value = P;
    s.feasible = true;
    s.residual = res;
    s.branch = r.branch;
    s.achieved = got;
    s.printed_feasibility = mse * beta * P - s2 * c * alpha + beta * P - c * alpha * Ps + (1.0 - beta) * Ps >= 0.0;
    best = s;
  }
  if (!best) throw Infeasible("no positive pilot power attains the target bound " + std::to_string(mse));
  return *best;
}

double det_crb_expected_gram(const SystemDims& d, const PowerConfig& p) {
  validate_dims(d);
  validate_powers(p);
  const double L = d.L, N = d.N, s2 = p.sigma_v2;
  // N tr(X~^-1)/K collapses to N/(LP + (N-L)Ps) for a scaled identity Gram
  return static_cast<double>(d.M - d.K) * s2 / (L * p.P + (N - L) * p.Ps) + s2 * d.K / (L * p.P);
}

double scheme_bound(PilotScheme scheme, const SystemDims& d, const PowerConfig& p,
                    const std::optional<RVector>& spectrum) {
  switch (scheme) {
    case PilotScheme::Training:
      return det_training_crb_avg(p.P, d, p.sigma_v2).value;
    case PilotScheme::SemiblindDet:
      return det_crb_expected_gram(d, p);
    case PilotScheme::SemiblindStoch:
      if (!spectrum) throw DomainError("the stochastic pilot budget needs a channel spectrum");
      return stoch_crb_avg_closed(*spectrum, d, p).value;
  }
  throw DomainError("unknown pilot scheme");
}

DesignSolution required_pilots(double gamma, int M, int K, int N, const PowerConfig& p, PilotScheme scheme,
                               const std::optional<RVector>& spectrum) {
  check_target(gamma);
  validate_dims({M, K, K, N});
  validate_powers(p);
  auto f = [&](int L) { return scheme_bound(scheme, {M, K, L, N}, p, spectrum); };

  const double at_full = f(N);
  if (at_full > gamma)
    throw Infeasible("target " + std::to_string(gamma) + " is below the bound with every symbol used as pilot (" +
                     std::to_string(at_full) + ")");
  int found = N;
  if (p.P >= p.Ps) {
    int lo = K, hi = N;  // invariant: f(hi) <= gamma
    if (f(lo) <= gamma) {
      hi = lo;
    } else {
      while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (f(mid) <= gamma ? hi : lo) = mid;
      }
    }
    found = hi;
  } else {
    for (int L = K; L <= N; ++L) {
      if (f(L) <= gamma) {
        found = L;
        break;
      }
    }
  }
  DesignSolution s;
  s.variable = DesignVariable::PilotCount;
  s.value = found;
  s.feasible = true;
  s.branch = RootBranch::Search;
  s.achieved = f(found);
  s.residual = std::abs(s.achieved - gamma);
  s.printed_feasibility = true;
  return s;
}

CMatrix optimal_pilot_gram(double P, int K) {
  if (!(std::isfinite(P) && P > 0.0)) throw DomainError("pilot power P must be positive and finite");
  if (K <= 0) throw DimensionError(DimensionViolation::NonPositive, "user count must be positive");
  return P * CMatrix::Identity(K, K);
}

OptimalityCertificate certify_optimality(const RVector& eigs, const AsymptoticRatios& r, double Ps, double s2) {
  if (eigs.size() == 0) throw EmptyInput("pilot spectrum is empty");
  const double P = eigs.mean();
  const PowerConfig pw{P, Ps, s2};
  OptimalityCertificate c;
  c.general = det_crb_asymptotic(eigs, r, pw).value;
  c.identity = det_crb_asymptotic(r, pw).value;
  c.holds = c.general >= c.identity - 1e-10;
  return c;
}

}  // namespace sbcrb
