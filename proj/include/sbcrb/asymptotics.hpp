#pragma once

#include <functional>

#include "sbcrb/exact_crb.hpp"
#include "sbcrb/model.hpp"
#include "sbcrb/types.hpp"

namespace sbcrb {

// ---- deterministic bound, large-system regime (K, L, M, N grow together) ----

struct StieltjesSolution {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

struct FixedPointOptions {
  double eps = 1e-12;
  int max_iter = 500;
};

/// Solves m = (1/K) sum 1/(beta l_k + (1-beta) Ps/(1 + c alpha Ps m)) by plain
/// iteration from m = 0. Throws NoConvergence after max_iter steps.
StieltjesSolution fixed_point_m0(const RVector& pilot_eigs, const AsymptoticRatios& r, double Ps,
                                 const FixedPointOptions& opts = {});

/// Positive root of the fixed point when every pilot eigenvalue equals P.
double m0_closed_identity(double P, double Ps, const AsymptoticRatios& r);

/// (1-c) alpha s2 m + s2 (c alpha/beta) mean(1/l_k), with m from fixed_point_m0.
CrbReport det_crb_asymptotic(const RVector& pilot_eigs, const AsymptoticRatios& r, const PowerConfig& p,
                             const FixedPointOptions& opts = {});
/// Identity pilot Gram P I, using the closed-form root.
CrbReport det_crb_asymptotic(const AsymptoticRatios& r, const PowerConfig& p);

// ---- fixed user count, growing block ----

enum class Regime2Case {
  FixedPilots,   // L stays fixed
  ScaledPilots,  // L/N -> beta
};

struct Regime2Params {
  Regime2Case kind = Regime2Case::FixedPilots;
  double alpha = 0.5;
  double beta = 0.5;  // ScaledPilots only
  int K = 1;          // FixedPilots only
  int L = 1;          // FixedPilots only
};

CrbReport det_crb_regime2(const Regime2Params& q, const PowerConfig& p);

// ---- first-order expansions ----

/// value = zeroth + first * offset, where offset is (1 - beta) or beta.
struct TaylorExpansion {
  double zeroth = 0.0;
  double first = 0.0;
  double offset = 0.0;
  double value = 0.0;
  /// Slope of the Stieltjes root itself (beta -> 0 expansion only).
  double stieltjes_slope = 0.0;
};

/// Deterministic bound near beta = 1, identity pilots.
TaylorExpansion det_crb_taylor_beta1(const AsymptoticRatios& r, const PowerConfig& p);
/// Pilot power at which the beta -> 1 slope changes sign: Ps (1 - c - c alpha).
double det_taylor_beta1_threshold(double c, double alpha, double Ps);

/// Deterministic bound as beta -> 0 with c alpha = theta beta and alpha fixed.
TaylorExpansion det_crb_taylor_beta0(double beta, double theta, double alpha, const PowerConfig& p);
/// Pilot power at which the Stieltjes-root slope changes sign: Ps (theta + 1).
double det_taylor_beta0_threshold(double theta, double Ps);

// ---- Marchenko-Pastur machinery (unit-mean law, ratio c) ----

struct MpSupport {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

MpSupport mp_support(double c);

/// Stieltjes transform of the law, for z < 0.
double mp_stieltjes(double z, double c);

/// Density on [a, b]; zero outside.
double mp_density(double x, double c);

inline constexpr int kMpDefaultNodes = 512;

/// Integral of f against the law by Gauss-Chebyshev (second kind) quadrature.
double mp_density_integral(const std::function<double(double)>& f, double c, int nodes = kMpDefaultNodes);

// ---- stochastic bound ----

/// Large-system stochastic bound under i.i.d. channels.
CrbReport stoch_crb_asymptotic_mp(const AsymptoticRatios& r, const PowerConfig& p, int nodes = kMpDefaultNodes);

/// Fixed-K stochastic bound with G^H G replaced by the large-scale profile B.
/// The user count is the length of b_eigs.
CrbReport stoch_crb_regime2(const RVector& b_eigs, const Regime2Params& q, const PowerConfig& p);

/// Stochastic bound near beta = 1 (i.i.d. channels).
TaylorExpansion stoch_crb_taylor_beta1(const AsymptoticRatios& r, const PowerConfig& p);

}  // namespace sbcrb
