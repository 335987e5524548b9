#include "sbcrb/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sbcrb/errors.hpp"
#include "sbcrb/linalg.hpp"

namespace sbcrb {

namespace {

std::string dims_text(const SystemDims& d) {
  return "(M=" + std::to_string(d.M) + ", K=" + std::to_string(d.K) + ", L=" + std::to_string(d.L) +
         ", N=" + std::to_string(d.N) + ")";
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void validate_dims(const SystemDims& d) {
  if (d.M <= 0 || d.K <= 0 || d.L <= 0 || d.N <= 0)
    throw DimensionError(DimensionViolation::NonPositive, "all dimensions must be positive " + dims_text(d));
  if (d.K > d.M)
    throw DimensionError(DimensionViolation::AntennasBelowUsers,
                         "user count K exceeds antenna count M " + dims_text(d));
  if (d.L < d.K)
    throw DimensionError(DimensionViolation::PilotsBelowUsers,
                         "pilot count L below user count K: the Fisher matrix is singular, need L >= K " +
                             dims_text(d));
  if (d.L > d.N)
    throw DimensionError(DimensionViolation::PilotsExceedBlock,
                         "pilot count L exceeds block length N " + dims_text(d));
}

void validate_powers(const PowerConfig& p) {
  if (!positive_finite(p.P)) throw DomainError("pilot power P must be positive and finite");
  if (!positive_finite(p.Ps)) throw DomainError("data power Ps must be positive and finite");
  if (!positive_finite(p.sigma_v2)) throw DomainError("noise variance sigma_v2 must be positive and finite");
}

void validate_ratios(const AsymptoticRatios& r) {
  if (!(r.c > 0.0 && r.c < 1.0)) throw DomainError("ratio c must lie in (0, 1)");
  if (!positive_finite(r.alpha)) throw DomainError("ratio alpha must be positive");
  if (!(r.beta > 0.0 && r.beta <= 1.0)) throw DomainError("ratio beta must lie in (0, 1]");
}

AsymptoticRatios derive_ratios(const SystemDims& d) {
  validate_dims(d);
  return {static_cast<double>(d.K) / d.M, static_cast<double>(d.M) / d.N, static_cast<double>(d.L) / d.N};
}

double snr_db_to_noise_variance(double snr_db) {
  if (!std::isfinite(snr_db)) throw DomainError("SNR must be finite");
  return std::pow(10.0, -snr_db / 10.0);
}

CMatrix make_orthogonal_pilots(int K, int L, double P) {
  if (K <= 0 || L <= 0)
    throw DimensionError(DimensionViolation::NonPositive, "pilot matrix needs K > 0 and L > 0");
  if (L < K)
    throw DimensionError(DimensionViolation::PilotsBelowUsers,
                         "pilot count L below user count K: orthogonal pilots need L >= K");
  if (!positive_finite(P)) throw DomainError("pilot power P must be positive and finite");
  const double amp = std::sqrt(P);
  CMatrix Sp(K, L);
  for (int k = 0; k < K; ++k) {
    for (int n = 0; n < L; ++n) {
      // reduce k*n mod L first so the phase stays exact for large indices
      const long long r = (static_cast<long long>(k) * n) % L;
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(r) / L;
      Sp(k, n) = std::polar(amp, phase);
    }
  }
  return Sp;
}

SignalBlock::SignalBlock(CMatrix Sp, CMatrix Sd) : sp_(std::move(Sp)), sd_(std::move(Sd)) {
  if (sp_.rows() == 0 || sp_.cols() == 0) throw ShapeError("pilot matrix is empty");
  if (sd_.cols() > 0 && sd_.rows() != sp_.rows())
    throw ShapeError("pilot and data matrices have different user counts");
  if (sd_.cols() == 0) sd_.resize(sp_.rows(), 0);
  const double L = static_cast<double>(sp_.cols());
  const double N = static_cast<double>(sp_.cols() + sd_.cols());
  CMatrix gp = sp_ * sp_.adjoint();
  xp_tilde_ = gp / L;
  CMatrix g = gp;
  if (sd_.cols() > 0) g.noalias() += sd_ * sd_.adjoint();
  x_tilde_ = g / N;
}

CMatrix SignalBlock::S() const {
  CMatrix s(sp_.rows(), sp_.cols() + sd_.cols());
  s << sp_, sd_;
  return s;
}

RVector gram_spectrum(const CMatrix& G) {
  RVector e = hermitian_eigenvalues(G.adjoint() * G);
  return e.cwiseMax(0.0);
}

ChannelRealization::ChannelRealization(CMatrix G, std::optional<RVector> large_scale)
    : g_(std::move(G)), large_scale_(std::move(large_scale)) {
  if (g_.rows() == 0 || g_.cols() == 0) throw ShapeError("channel matrix is empty");
  if (large_scale_ && large_scale_->size() != g_.cols())
    throw ShapeError("large-scale profile length differs from the user count");
  if (!g_.allFinite()) throw NonFinite("channel matrix has non-finite entries");
  spectrum_ = gram_spectrum(g_);
}

}  // namespace sbcrb
