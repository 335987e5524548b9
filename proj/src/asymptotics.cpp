#include "sbcrb/asymptotics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sbcrb/errors.hpp"

namespace sbcrb {

namespace {

void check_positive_spectrum(const RVector& e, const char* what) {
  if (e.size() == 0) throw EmptyInput(std::string(what) + " is empty");
  for (double v : e)
    if (!(std::isfinite(v) && v > 0.0)) throw DomainError(std::string(what) + " entries must be strictly positive");
}

void check_c(double c) {
  if (!(c > 0.0 && c < 1.0)) throw DomainError("ratio c must lie in (0, 1)");
}

}  // namespace

StieltjesSolution fixed_point_m0(const RVector& lam, const AsymptoticRatios& r, double Ps,
                                 const FixedPointOptions& opts) {
  validate_ratios(r);
  check_positive_spectrum(lam, "pilot Gram spectrum");
  if (!(std::isfinite(Ps) && Ps > 0.0)) throw DomainError("data power Ps must be positive and finite");
  if (!(opts.eps > 0.0)) throw DomainError("fixed-point tolerance must be positive");

  const double ca = r.c * r.alpha;
  auto T = [&](double x) {
    const double data = (1.0 - r.beta) * Ps / (1.0 + ca * Ps * x);
    return (1.0 / (r.beta * lam.array() + data)).mean();
  };
  double prev = 0.0;
  double cur = T(prev);
  int it = 1;
  while (std::abs(cur - prev) > opts.eps) {
    if (it >= opts.max_iter)
      throw NoConvergence("fixed point did not converge within " + std::to_string(opts.max_iter) + " iterations", it,
                          std::abs(cur - prev));
    prev = cur;
    cur = T(prev);
    ++it;
  }
  return {cur, it, std::abs(cur - prev)};
}

double m0_closed_identity(double P, double Ps, const AsymptoticRatios& r) {
  validate_ratios(r);
  const double ca = r.c * r.alpha;
  const double q = r.beta * P - ca * Ps + Ps * (1.0 - r.beta);
  const double k = ca * r.beta * P * Ps;
  const double root = std::sqrt(q * q + 4.0 * k);
  // rationalized branch avoids cancellation when q dominates
  return q >= 0.0 ? 2.0 / (root + q) : (root - q) / (2.0 * k);
}

CrbReport det_crb_asymptotic(const RVector& lam, const AsymptoticRatios& r, const PowerConfig& p,
                             const FixedPointOptions& opts) {
  validate_powers(p);
  const StieltjesSolution m = fixed_point_m0(lam, r, p.Ps, opts);
  const double value = (1.0 - r.c) * r.alpha * p.sigma_v2 * m.value +
                       p.sigma_v2 * r.c * r.alpha / r.beta * (1.0 / lam.array()).mean();
  return {value, CrbMethod::DetAsym, std::nullopt, p, r, "fixed-point root, " + std::to_string(m.iterations) + " iterations"};
}

CrbReport det_crb_asymptotic(const AsymptoticRatios& r, const PowerConfig& p) {
  validate_powers(p);
  const double m = m0_closed_identity(p.P, p.Ps, r);
  const double value = (1.0 - r.c) * r.alpha * p.sigma_v2 * m + p.sigma_v2 * r.c * r.alpha / (r.beta * p.P);
  return {value, CrbMethod::DetAsym, std::nullopt, p, r, "identity pilot Gram"};
}

namespace {

void check_regime2(const Regime2Params& q) {
  if (!(std::isfinite(q.alpha) && q.alpha > 0.0)) throw DomainError("ratio alpha must be positive");
  if (q.kind == Regime2Case::FixedPilots) {
    if (q.K <= 0 || q.L <= 0) throw DimensionError(DimensionViolation::NonPositive, "K and L must be positive");
    if (q.L < q.K)
      throw DimensionError(DimensionViolation::PilotsBelowUsers,
                           "pilot count L below user count K: the Fisher matrix is singular, need L >= K");
  } else if (!(q.beta > 0.0 && q.beta <= 1.0)) {
    throw DomainError("ratio beta must lie in (0, 1]");
  }
}

}  // namespace

CrbReport det_crb_regime2(const Regime2Params& q, const PowerConfig& p) {
  validate_powers(p);
  check_regime2(q);
  const double s2 = p.sigma_v2;
  double v;
  if (q.kind == Regime2Case::FixedPilots)
    v = s2 * q.K / (static_cast<double>(q.L) * p.P) + q.alpha * s2 / p.Ps;
  else
    v = q.alpha * s2 / (p.Ps * (1.0 - q.beta) + q.beta * p.P);
  return {v, CrbMethod::DetAsym, std::nullopt, p, std::nullopt,
          q.kind == Regime2Case::FixedPilots ? "fixed pilot count" : "pilot count proportional to block"};
}

TaylorExpansion det_crb_taylor_beta1(const AsymptoticRatios& r, const PowerConfig& p) {
  validate_ratios(r);
  validate_powers(p);
  const double lead = r.alpha * p.sigma_v2 / p.P;
  TaylorExpansion t;
  t.zeroth = lead;
  t.first = lead * (1.0 - (1.0 - r.c) * p.Ps / (p.P + r.c * r.alpha * p.Ps));
  t.offset = 1.0 - r.beta;
  t.value = t.zeroth + t.first * t.offset;
  return t;
}

double det_taylor_beta1_threshold(double c, double alpha, double Ps) { return Ps * (1.0 - c - c * alpha); }

TaylorExpansion det_crb_taylor_beta0(double beta, double theta, double alpha, const PowerConfig& p) {
  validate_powers(p);
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("beta must lie in [0, 1]");
  if (!(theta > 0.0 && alpha > 0.0)) throw DomainError("theta and alpha must be positive");
  const double s2 = p.sigma_v2, P = p.P, Ps = p.Ps;
  TaylorExpansion t;
  t.stieltjes_slope = (theta + 1.0) / Ps - P / (Ps * Ps);
  t.zeroth = s2 * theta / P + alpha * s2 / Ps;
  t.first = alpha * s2 * t.stieltjes_slope - theta * s2 / Ps;
  t.offset = beta;
  t.value = t.zeroth + t.first * t.offset;
  return t;
}

double det_taylor_beta0_threshold(double theta, double Ps) { return Ps * (theta + 1.0); }

MpSupport mp_support(double c) {
  check_c(c);
  const double s = std::sqrt(c);
  return {(1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s), c};
}

double mp_stieltjes(double z, double c) {
  check_c(c);
  if (!(std::isfinite(z) && z < 0.0)) throw DomainError("Marchenko-Pastur transform evaluated only for z < 0");
  const double B = 1.0 - c - z;
  return 2.0 / (B + std::sqrt(B * B - 4.0 * c * z));
}

double mp_density(double x, double c) {
  const MpSupport s = mp_support(c);
  if (x <= s.a || x >= s.b) return 0.0;
  return std::sqrt((x - s.a) * (s.b - x)) / (2.0 * c * std::numbers::pi * x);
}

double mp_density_integral(const std::function<double(double)>& f, double c, int nodes) {
  if (nodes < 2) throw QuadratureError("quadrature needs at least 2 nodes");
  const MpSupport s = mp_support(c);
  const double mid = 0.5 * (s.a + s.b);
  const double h = 0.5 * (s.b - s.a);
  const double step = std::numbers::pi / (nodes + 1);
  double acc = 0.0;
  for (int i = 1; i <= nodes; ++i) {
    const double th = i * step;
    const double sn = std::sin(th);
    const double x = mid + h * std::cos(th);
    const double fx = f(x);
    if (!std::isfinite(fx)) throw QuadratureError("integrand is not finite at x = " + std::to_string(x));
    acc += step * sn * sn * fx / x;
  }
  return acc * h * h / (2.0 * c * std::numbers::pi);
}

CrbReport stoch_crb_asymptotic_mp(const AsymptoticRatios& r, const PowerConfig& p, int nodes) {
  validate_ratios(r);
  validate_powers(p);
  const double c = r.c, a = r.alpha, b = r.beta, P = p.P, Ps = p.Ps, s2 = p.sigma_v2;
  const double D = (P - Ps) * b + Ps;
  const double t1 = s2 * c * a / (P * b);
  const double t2 = s2 * (1.0 - c) * a / D;
  double t3 = 0.0, t4 = 0.0;
  if (b < 1.0) {
    t3 = s2 * s2 * (1.0 - b) * (1.0 - c) * a / (D * D) * mp_stieltjes(-s2 * P * b / (Ps * D), c);
    auto f = [&](double x) {
      const double w = c * a * (1.0 - b) * Ps * x * s2 * s2 / (P * b * (P * b * Ps * x + D * s2));
      const double z = -s2 * (Ps * D * x + P * b * s2) / (P * b * Ps * Ps * x + Ps * D * s2);
      return w * mp_stieltjes(z, c);
    };
    t4 = mp_density_integral(f, c, nodes);
  }
  return {t1 + t2 + t3 - t4, CrbMethod::StochAsym, std::nullopt, p, r, "i.i.d. channel, quadrature"};
}

CrbReport stoch_crb_regime2(const RVector& lam, const Regime2Params& q, const PowerConfig& p) {
  validate_powers(p);
  check_positive_spectrum(lam, "large-scale profile");
  check_regime2(q);
  const double s2 = p.sigma_v2, P = p.P, Ps = p.Ps, a = q.alpha;
  auto mB = [&](double x) { return (1.0 / (lam.array() - x)).mean(); };
  double v;
  if (q.kind == Regime2Case::FixedPilots) {
    const double K = static_cast<double>(lam.size());
    const double L = q.L;
    v = s2 * K / (P * L) + s2 * a / Ps + a * s2 * s2 / (Ps * Ps) * mB(0.0);
    for (double li : lam) v -= li * s2 / (P * L) * mB(-li);
  } else {
    const double b = q.beta;
    const double D = b * (P - Ps) + Ps;
    v = a * s2 / D + a * (1.0 - b) * s2 * s2 / (D * D) * mB(-s2 * P * b / (Ps * D));
  }
  return {v, CrbMethod::StochAsym, std::nullopt, p, std::nullopt,
          q.kind == Regime2Case::FixedPilots ? "fixed pilot count" : "pilot count proportional to block"};
}

TaylorExpansion stoch_crb_taylor_beta1(const AsymptoticRatios& r, const PowerConfig& p) {
  validate_ratios(r);
  validate_powers(p);
  const double c = r.c, a = r.alpha, P = p.P, Ps = p.Ps, s2 = p.sigma_v2;
  const double m = mp_stieltjes(-s2 / Ps, c);
  TaylorExpansion t;
  t.zeroth = s2 * a / P;
  t.first = s2 * a / P - (1.0 - c) * s2 * a * Ps / (P * P) + s2 * s2 * (1.0 - c) * a * m / (P * P) -
            c * a * s2 * s2 * m * (1.0 - s2 / Ps * m) / (P * P);
  t.offset = 1.0 - r.beta;
  t.value = t.zeroth + t.first * t.offset;
  return t;
}

}  // namespace sbcrb
