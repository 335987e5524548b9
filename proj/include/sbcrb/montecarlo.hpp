#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sbcrb/model.hpp"
#include "sbcrb/rng.hpp"
#include "sbcrb/types.hpp"

namespace sbcrb {

// ---- channels ----

/// Entries i.i.d. circular Gaussian with variance 1/M.
ChannelRealization gen_channel_iid(int M, int K, std::uint64_t seed);

/// G = H B^{1/2} with H as in gen_channel_iid and B = diag(rho).
ChannelRealization gen_channel_large_scale(int M, const RVector& rho, std::uint64_t seed);

/// Two user classes placed area-uniformly in discs of radius r_inner / r_outer.
struct GeometryConfig {
  double r_inner = 100.0;
  double r_outer = 500.0;
  double inner_fraction = 0.5;
  double f_mhz = 1900.0;
  double h_b = 15.0;
  double h_r = 1.65;
  double d0 = 10.0;
  double d1 = 50.0;
  double shadow_db = 8.0;
};

void validate_geometry(const GeometryConfig& g);

/// Three-slope path loss: c0 inside d0, c1/d^2 up to d1, c2 z/d^3.5 beyond, with
/// 10 log10 z ~ N(0, shadow_db^2).
class ThreeSlopeModel {
 public:
  explicit ThreeSlopeModel(const GeometryConfig& g);

  double c0() const noexcept { return c0_; }
  double c1() const noexcept { return c1_; }
  double c2() const noexcept { return c2_; }
  const GeometryConfig& geometry() const noexcept { return g_; }

  /// Unnormalized gain at distance d with shadowing factor z (used beyond d1 only).
  double gain(double d, double z) const;
  /// E[z] for the log-normal shadowing.
  double mean_shadowing() const;
  /// Exact E{gain} over user class, position and shadowing.
  double mean_gain() const;
  /// Sample mean over `draws` users, for cross-checking mean_gain.
  double mean_gain_monte_carlo(std::size_t draws, std::uint64_t seed) const;

  /// One user: class, distance and shadowing drawn from rng.
  double draw_gain(Rng& rng) const;

 private:
  GeometryConfig g_;
  double c0_ = 0.0, c1_ = 0.0, c2_ = 0.0;
};

/// K normalized coefficients rho_k = gain_k / E{gain}.
RVector gen_large_scale_threeslope(int K, const GeometryConfig& g, std::uint64_t seed);

/// G = Phi_r^{1/2} H Phi_t^{1/2}, H with variance-1/M entries.
ChannelRealization gen_channel_kronecker(int M, int K, const CMatrix& phi_r, const CMatrix& phi_t, std::uint64_t seed);

/// Ascending eigenvalues of Phi_t (1/M) tr(Phi_r), the large-M limit of G^H G
/// under gen_channel_kronecker's normalization.
RVector kronecker_limit_spectrum(const CMatrix& phi_r, const CMatrix& phi_t);

/// rho^|i-j|
CMatrix exponential_correlation(int n, double rho);

// ---- signals and receiver ----

enum class DataKind { Qpsk, Gaussian };

/// DFT pilots of power P plus i.i.d. data of power Ps.
SignalBlock gen_signals(const SystemDims& d, const PowerConfig& p, DataKind kind, std::uint64_t seed);

/// Y = G S + V with i.i.d. noise of variance sigma_v2.
CMatrix simulate_rx(const CMatrix& G, const CMatrix& S, double sigma_v2, std::uint64_t seed);

/// Yp Sp^H (Sp Sp^H)^{-1}
CMatrix ml_training_estimate(const CMatrix& Yp, const CMatrix& Sp);

/// Gaussian-prior EM: LMMSE data inference alternating with least-squares
/// channel refits over pilots and inferred data, started from the training
/// estimate. Y holds all N columns, the first L being pilots.
CMatrix em_semiblind_estimate(const CMatrix& Y, const CMatrix& Sp, const PowerConfig& p, int iters);

/// (1/K) ||G_hat - G||_F^2
double mse_per_user(const CMatrix& G_hat, const CMatrix& G);

/// mean |x - asym|^2 / mean x^2
double ncae(const std::vector<double>& crb_true, double crb_asym);

// ---- trial plumbing ----

struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

SampleStats sample_stats(const std::vector<double>& x);

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware).
/// Bodies must write only to slot i of their outputs, so results do not
/// depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads = 0);

struct TrialRecord {
  std::uint64_t seed = 0;
  SystemDims dims;
  PowerConfig powers;
  double crb_true = 0.0;
  double crb_asym = 0.0;
  double mse = 0.0;
  std::string estimator;
};

/// Deterministic bound per trial: fresh data block, DFT pilots.
std::vector<double> sample_det_crb(const SystemDims& d, const PowerConfig& p, DataKind kind, std::size_t trials,
                                   std::uint64_t master_seed);

/// Stochastic bound per trial: fresh i.i.d. channel.
std::vector<double> sample_stoch_crb(const SystemDims& d, const PowerConfig& p, std::size_t trials,
                                     std::uint64_t master_seed);

struct MseTrial {
  double training_mse = 0.0;
  double em_mse = 0.0;  // NaN when EM was skipped
  double det_crb = 0.0;
  double stoch_crb = 0.0;
};

/// One full receiver trial with an i.i.d. channel. em_iters = 0 skips EM and
/// simulates only the pilot part of the block.
MseTrial run_mse_trial(const SystemDims& d, const PowerConfig& p, DataKind kind, int em_iters,
                       std::uint64_t master_seed, std::uint64_t trial);

}  // namespace sbcrb
