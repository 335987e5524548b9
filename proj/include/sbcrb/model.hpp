#pragma once

#include <optional>

#include "sbcrb/types.hpp"

namespace sbcrb {

/// Block dimensions: M antennas, K users, L pilot slots, N block length.
struct SystemDims {
  int M = 0;
  int K = 0;
  int L = 0;
  int N = 0;

  friend bool operator==(const SystemDims&, const SystemDims&) = default;
};

/// Linear-scale pilot power, data power and noise variance.
struct PowerConfig {
  double P = 1.0;
  double Ps = 1.0;
  double sigma_v2 = 1.0;

  friend bool operator==(const PowerConfig&, const PowerConfig&) = default;
};

/// Large-system ratios c = K/M, alpha = M/N, beta = L/N.
struct AsymptoticRatios {
  double c = 0.5;
  double alpha = 0.5;
  double beta = 0.5;

  friend bool operator==(const AsymptoticRatios&, const AsymptoticRatios&) = default;
};

/// Throws DimensionError unless K <= M and K <= L <= N.
void validate_dims(const SystemDims& dims);

/// Throws DomainError unless P, Ps and sigma_v2 are positive and finite.
void validate_powers(const PowerConfig& powers);

/// Throws DomainError unless 0 < c < 1, alpha > 0 and 0 < beta <= 1.
void validate_ratios(const AsymptoticRatios& ratios);

AsymptoticRatios derive_ratios(const SystemDims& dims);

/// SNR is 1/sigma_v2.
double snr_db_to_noise_variance(double snr_db);

/// First K rows of the L-point DFT matrix scaled by sqrt(P); Sp * Sp^H = P L I_K.
CMatrix make_orthogonal_pilots(int K, int L, double P);

/// Pilot and data symbols of one coherence block with their normalized Grams.
class SignalBlock {
 public:
  SignalBlock(CMatrix Sp, CMatrix Sd);

  int K() const noexcept { return static_cast<int>(sp_.rows()); }
  int L() const noexcept { return static_cast<int>(sp_.cols()); }
  int N() const noexcept { return static_cast<int>(sp_.cols() + sd_.cols()); }

  const CMatrix& Sp() const noexcept { return sp_; }
  const CMatrix& Sd() const noexcept { return sd_; }
  /// (1/L) Sp Sp^H
  const CMatrix& Xp_tilde() const noexcept { return xp_tilde_; }
  /// (1/N) S S^H with S = [Sp, Sd]
  const CMatrix& X_tilde() const noexcept { return x_tilde_; }
  /// [Sp, Sd]
  CMatrix S() const;

 private:
  CMatrix sp_;
  CMatrix sd_;
  CMatrix xp_tilde_;
  CMatrix x_tilde_;
};

/// Channel matrix G with the ascending eigenvalues of G^H G.
class ChannelRealization {
 public:
  explicit ChannelRealization(CMatrix G, std::optional<RVector> large_scale = std::nullopt);

  int M() const noexcept { return static_cast<int>(g_.rows()); }
  int K() const noexcept { return static_cast<int>(g_.cols()); }
  const CMatrix& G() const noexcept { return g_; }
  const RVector& spectrum() const noexcept { return spectrum_; }
  const std::optional<RVector>& large_scale() const noexcept { return large_scale_; }

 private:
  CMatrix g_;
  RVector spectrum_;
  std::optional<RVector> large_scale_;
};

/// Ascending eigenvalues of G^H G, clamped at zero.
RVector gram_spectrum(const CMatrix& G);

}  // namespace sbcrb
