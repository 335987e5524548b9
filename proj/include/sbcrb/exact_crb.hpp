#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "sbcrb/model.hpp"
#include "sbcrb/types.hpp"

namespace sbcrb {

enum class CrbMethod {
  DetExact,
  DetOracle,
  DetTraining,
  StochClosed,
  StochBlockwise,
  StochFimOracle,
  DetAsym,
  StochAsym,
  Taylor,
};

std::string_view to_string(CrbMethod m);

/// A per-user average bound together with the path that produced it.
struct CrbReport {
  double value = 0.0;
  CrbMethod method = CrbMethod::DetExact;
  std::optional<SystemDims> dims;
  std::optional<PowerConfig> powers;
  std::optional<AsymptoticRatios> ratios;
  std::string notes;
};

/// Largest K*M accepted by the deterministic brute-force oracle.
inline constexpr int kDetOracleMaxKM = 200;
/// Largest 2*K*M accepted by the stochastic Fisher-matrix oracle.
inline constexpr int kStochOracleMaxReal = 400;

// ---- deterministic data model ----

/// (M-K) s2/(KN) tr(X~^-1) + s2/L tr(X~p^-1).
CrbReport det_crb_avg(const SignalBlock& block, const SystemDims& dims, double sigma_v2);

/// Brute-force: assembles the full KM x KM Schur complement of the joint Fisher
/// matrix (channel plus deterministic data) and inverts it.
CrbReport det_crb_avg_oracle(const CMatrix& Sp, const CMatrix& Sd, const CMatrix& G, double sigma_v2);

/// s2 M/(KL) tr(X~p^-1).
CrbReport det_training_crb_avg(const CMatrix& Xp_tilde, const SystemDims& dims, double sigma_v2);
/// s2 M/(LP), i.e. the training bound with X~p = P I.
CrbReport det_training_crb_avg(double P, const SystemDims& dims, double sigma_v2);

/// Training bound minus semi-blind bound, evaluated from its own closed form.
CrbReport det_crb_gain(const SignalBlock& block, const SystemDims& dims, double sigma_v2);

// ---- stochastic (Gaussian data) model, orthogonal power-P pilots ----

/// (1/K) sum 1/(eigs_i - x); requires x < min(eigs).
double empirical_stieltjes(const RVector& eigs, double x);

/// Closed form in the eigenvalues of G^H G.
CrbReport stoch_crb_avg_closed(const RVector& spectrum, const SystemDims& dims, const PowerConfig& powers);

/// Entry-wise construction of the rotated Fisher matrix, inverted as diagonal
/// entries and coupled 2x2 pairs.
CrbReport stoch_crb_avg_blockwise(const RVector& spectrum, const SystemDims& dims, const PowerConfig& powers);

/// Brute-force: real 2KM x 2KM Fisher matrix built directly from G.
CrbReport stoch_crb_avg_fim_oracle(const CMatrix& G, const SystemDims& dims, const PowerConfig& powers);

/// Training bound s2 M/(PL) minus the stochastic bound, from its own closed form.
CrbReport stoch_crb_gain(const RVector& spectrum, const SystemDims& dims, const PowerConfig& powers);

}  // namespace sbcrb
