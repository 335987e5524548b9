#include "sbcrb/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sbcrb/errors.hpp"
#include "sbcrb/exact_crb.hpp"
#include "sbcrb/linalg.hpp"

namespace sbcrb {

namespace {

void check_mk(int M, int K) {
  if (M <= 0 || K <= 0) throw DimensionError(DimensionViolation::NonPositive, "M and K must be positive");
  if (K > M) throw DimensionError(DimensionViolation::AntennasBelowUsers, "user count K exceeds antenna count M");
}

CMatrix hermitian_sqrt(const CMatrix& A, const char* label) {
  if (A.rows() != A.cols()) throw ShapeError(std::string(label) + " must be square");
  if (!A.isApprox(A.adjoint(), 1e-10)) throw ShapeError(std::string(label) + " must be Hermitian");
  if (A.isDiagonal()) {
    const RVector d = A.diagonal().real();
    if (d.minCoeff() < 0.0) throw DomainError(std::string(label) + " must be positive semidefinite");
    return d.cwiseSqrt().cast<cdouble>().asDiagonal();
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(A);
  if (es.info() != Eigen::Success) throw NonFinite(std::string(label) + " eigen-decomposition failed");
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw DomainError(std::string(label) + " must be positive semidefinite");
  const RVector s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

ChannelRealization gen_channel_iid(int M, int K, std::uint64_t seed) {
  check_mk(M, K);
  Rng rng(seed);
  return ChannelRealization(rng.cnormal_matrix(M, K, 1.0 / M));
}

ChannelRealization gen_channel_large_scale(int M, const RVector& rho, std::uint64_t seed) {
  const int K = static_cast<int>(rho.size());
  check_mk(M, K);
  for (double r : rho)
    if (!(std::isfinite(r) && r > 0.0)) throw DomainError("large-scale coefficients must be positive");
  Rng rng(seed);
  CMatrix G = rng.cnormal_matrix(M, K, 1.0 / M) * rho.cwiseSqrt().asDiagonal();
  return ChannelRealization(std::move(G), rho);
}

void validate_geometry(const GeometryConfig& g) {
  const double rmax = std::max(g.r_inner, g.r_outer);
  if (!(g.r_inner > 0.0 && g.r_outer > 0.0)) throw DomainError("cell radii must be positive");
  if (!(g.d0 > 0.0 && g.d0 < g.d1 && g.d1 < rmax)) throw DomainError("breakpoints need 0 < d0 < d1 < max radius");
  if (!(g.f_mhz > 0.0 && g.h_b > 0.0 && g.h_r > 0.0)) throw DomainError("frequency and antenna heights must be positive");
  if (!(g.shadow_db >= 0.0)) throw DomainError("shadowing deviation must be nonnegative");
  if (!(g.inner_fraction >= 0.0 && g.inner_fraction <= 1.0)) throw DomainError("inner-class fraction must lie in [0, 1]");
}

ThreeSlopeModel::ThreeSlopeModel(const GeometryConfig& g) : g_(g) {
  validate_geometry(g);
  const double lf = std::log10(g.f_mhz);
  const double c2_db = -46.3 - 33.9 * lf + 13.82 * std::log10(g.h_b) + (1.1 * lf - 0.7) * g.h_r - (1.56 * lf - 0.8);
  const double c1_db = c2_db - 15.0 * std::log10(g.d1);
  const double c0_db = c1_db - 20.0 * std::log10(g.d0);
  c2_ = std::pow(10.0, c2_db / 10.0);
  c1_ = std::pow(10.0, c1_db / 10.0);
  c0_ = std::pow(10.0, c0_db / 10.0);
}

double ThreeSlopeModel::gain(double d, double z) const {
  if (d <= g_.d0) return c0_;
  if (d <= g_.d1) return c1_ / (d * d);
  return c2_ * z / std::pow(d, 3.5);
}

double ThreeSlopeModel::mean_shadowing() const {
  const double s = g_.shadow_db * std::log(10.0) / 10.0;
  return std::exp(0.5 * s * s);
}

double ThreeSlopeModel::mean_gain() const {
  const double ez = mean_shadowing();
  auto disc_mean = [&](double R) {
    const double R2 = R * R;
    const double a = std::min(g_.d0, R);
    double m = c0_ * a * a / R2;
    if (R > g_.d0) m += 2.0 * c1_ / R2 * std::log(std::min(g_.d1, R) / g_.d0);
    if (R > g_.d1) m += 2.0 * c2_ * ez / R2 * (std::pow(g_.d1, -1.5) - std::pow(R, -1.5)) / 1.5;
    return m;
  };
  return g_.inner_fraction * disc_mean(g_.r_inner) + (1.0 - g_.inner_fraction) * disc_mean(g_.r_outer);
}

double ThreeSlopeModel::draw_gain(Rng& rng) const {
  const bool inner = rng.uniform() < g_.inner_fraction;
  const double R = inner ? g_.r_inner : g_.r_outer;
  const double d = R * std::sqrt(rng.uniform());
  const double z = std::pow(10.0, g_.shadow_db * rng.normal() / 10.0);
  return gain(d, z);
}

double ThreeSlopeModel::mean_gain_monte_carlo(std::size_t draws, std::uint64_t seed) const {
  if (draws == 0) throw EmptyInput("Monte-Carlo mean needs at least one draw");
  Rng rng(seed);
  double acc = 0.0;
  for (std::size_t i = 0; i < draws; ++i) acc += draw_gain(rng);
  return acc / static_cast<double>(draws);
}

RVector gen_large_scale_threeslope(int K, const GeometryConfig& g, std::uint64_t seed) {
  if (K <= 0) throw DimensionError(DimensionViolation::NonPositive, "user count must be positive");
  const ThreeSlopeModel model(g);
  const double mean = model.mean_gain();
  Rng rng(seed);
  RVector rho(K);
  for (int k = 0; k < K; ++k) rho[k] = model.draw_gain(rng) / mean;
  return rho;
}

ChannelRealization gen_channel_kronecker(int M, int K, const CMatrix& phi_r, const CMatrix& phi_t, std::uint64_t seed) {
  check_mk(M, K);
  if (phi_r.rows() != M || phi_t.rows() != K) throw ShapeError("correlation matrices must be M x M and K x K");
  const CMatrix rr = hermitian_sqrt(phi_r, "receive correlation");
  const CMatrix rt = hermitian_sqrt(phi_t, "transmit correlation");
  Rng rng(seed);
  return ChannelRealization(rr * rng.cnormal_matrix(M, K, 1.0 / M) * rt);
}

RVector kronecker_limit_spectrum(const CMatrix& phi_r, const CMatrix& phi_t) {
  if (phi_r.rows() != phi_r.cols() || phi_t.rows() != phi_t.cols()) throw ShapeError("correlation matrices must be square");
  const double scale = phi_r.trace().real() / static_cast<double>(phi_r.rows());
  return hermitian_eigenvalues(phi_t) * scale;
}

CMatrix exponential_correlation(int n, double rho) {
  if (n <= 0) throw ShapeError("correlation size must be positive");
  if (!(std::abs(rho) < 1.0)) throw DomainError("correlation coefficient must lie in (-1, 1)");
  CMatrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = std::pow(rho, std::abs(i - j));
  return out;
}

SignalBlock gen_signals(const SystemDims& d, const PowerConfig& p, DataKind kind, std::uint64_t seed) {
  validate_dims(d);
  validate_powers(p);
  CMatrix Sp = make_orthogonal_pilots(d.K, d.L, p.P);
  Rng rng(seed);
  CMatrix Sd(d.K, d.N - d.L);
  if (kind == DataKind::Qpsk) {
    const double a = std::sqrt(p.Ps / 2.0);
    for (Eigen::Index j = 0; j < Sd.cols(); ++j)
      for (Eigen::Index i = 0; i < Sd.rows(); ++i) {
        const double re = rng.coin() ? a : -a;
        const double im = rng.coin() ? a : -a;
        Sd(i, j) = {re, im};
      }
  } else {
    Sd = rng.cnormal_matrix(d.K, d.N - d.L, p.Ps);
  }
  return SignalBlock(std::move(Sp), std::move(Sd));
}

CMatrix simulate_rx(const CMatrix& G, const CMatrix& S, double sigma_v2, std::uint64_t seed) {
  if (G.cols() != S.rows()) throw ShapeError("channel columns must match signal rows");
  if (!(std::isfinite(sigma_v2) && sigma_v2 >= 0.0)) throw DomainError("noise variance must be nonnegative");
  CMatrix Y = G * S;
  if (sigma_v2 > 0.0) {
    Rng rng(seed);
    Y += rng.cnormal_matrix(G.rows(), S.cols(), sigma_v2);
  }
  return Y;
}

CMatrix ml_training_estimate(const CMatrix& Yp, const CMatrix& Sp) {
  if (Yp.cols() != Sp.cols()) throw ShapeError("received pilots and pilot matrix have different lengths");
  const CMatrix gram = Sp * Sp.adjoint();
  const RVector e = hermitian_eigenvalues(gram);
  if (e[0] <= 0.0 || e[e.size() - 1] / e[0] > kMaxCondition) throw SingularGram("pilot Gram is singular");
  // G = Yp Sp^H gram^-1  <=>  G^H = gram^-1 Sp Yp^H
  return Eigen::LDLT<CMatrix>(gram).solve(Sp * Yp.adjoint()).adjoint();
}

CMatrix em_semiblind_estimate(const CMatrix& Y, const CMatrix& Sp, const PowerConfig& p, int iters) {
  validate_powers(p);
  if (iters < 1) throw DomainError("EM needs at least one iteration");
  const Eigen::Index M = Y.rows(), K = Sp.rows(), L = Sp.cols(), N = Y.cols();
  if (L > N) throw ShapeError("pilot length exceeds the received block");
  const CMatrix Yp = Y.leftCols(L);
  CMatrix Gh = ml_training_estimate(Yp, Sp);
  if (L == N) return Gh;

  const double s2 = p.sigma_v2;
  const double nd = static_cast<double>(N - L);
  const CMatrix Zp = Yp * Sp.adjoint();
  const CMatrix Gp = Sp * Sp.adjoint();
  // The data enter only through Q = Yd Yd^H: Yd Sh^H = Q G A^-1 and
  // Sh Sh^H = A^-1 G^H Q G A^-1 with Sh = A^-1 G^H Yd.
  CMatrix Q = CMatrix::Zero(M, M);
  Q.selfadjointView<Eigen::Lower>().rankUpdate(Y.rightCols(N - L));
  Q = Q.selfadjointView<Eigen::Lower>();
  const CMatrix IK = CMatrix::Identity(K, K);
  for (int it = 0; it < iters; ++it) {
    const CMatrix A = Gh.adjoint() * Gh + (s2 / p.Ps) * IK;
    const CMatrix Ai = Eigen::LLT<CMatrix>(A).solve(IK);
    const CMatrix QG = Q * Gh;
    const CMatrix cross = QG * Ai;                         // Yd Sh^H
    const CMatrix energy = Ai * (Gh.adjoint() * QG) * Ai;  // Sh Sh^H
    CMatrix R = Gp + energy + nd * s2 * Ai;
    R = 0.5 * (R + R.adjoint()).eval();
    Gh = Eigen::LDLT<CMatrix>(R).solve((Zp + cross).adjoint()).adjoint();
    if (!Gh.allFinite()) throw NonFinite("EM iterate diverged at iteration " + std::to_string(it + 1));
  }
  return Gh;
}

double mse_per_user(const CMatrix& G_hat, const CMatrix& G) {
  if (G_hat.rows() != G.rows() || G_hat.cols() != G.cols()) throw ShapeError("estimate and channel shapes differ");
  return (G_hat - G).squaredNorm() / static_cast<double>(G.cols());
}

double ncae(const std::vector<double>& x, double asym) {
  if (x.empty()) throw EmptyInput("NCAE needs at least one sample");
  double num = 0.0, den = 0.0;
  for (double v : x) {
    num += (v - asym) * (v - asym);
    den += v * v;
  }
  return num / den;
}

SampleStats sample_stats(const std::vector<double>& x) {
  SampleStats s;
  s.count = x.size();
  if (x.empty()) return s;
  double acc = 0.0;
  for (double v : x) acc += v;
  s.mean = acc / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  }
  return s;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lk(err_mu);
          if (!err) err = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::vector<double> sample_det_crb(const SystemDims& d, const PowerConfig& p, DataKind kind, std::size_t trials,
                                   std::uint64_t master) {
  validate_dims(d);
  std::vector<double> out(trials);
  parallel_for(trials, [&](std::size_t t) {
    const SignalBlock b = gen_signals(d, p, kind, derive_seed(master, t, Stream::Data));
    out[t] = det_crb_avg(b, d, p.sigma_v2).value;
  });
  return out;
}

std::vector<double> sample_stoch_crb(const SystemDims& d, const PowerConfig& p, std::size_t trials,
                                     std::uint64_t master) {
  validate_dims(d);
  std::vector<double> out(trials);
  parallel_for(trials, [&](std::size_t t) {
    const ChannelRealization ch = gen_channel_iid(d.M, d.K, derive_seed(master, t, Stream::Channel));
    out[t] = stoch_crb_avg_closed(ch.spectrum(), d, p).value;
  });
  return out;
}

MseTrial run_mse_trial(const SystemDims& d, const PowerConfig& p, DataKind kind, int em_iters, std::uint64_t master,
                       std::uint64_t trial) {
  validate_dims(d);
  validate_powers(p);
  const ChannelRealization ch = gen_channel_iid(d.M, d.K, derive_seed(master, trial, Stream::Channel));
  const SignalBlock blk = gen_signals(d, p, kind, derive_seed(master, trial, Stream::Data));
  const std::uint64_t noise_seed = derive_seed(master, trial, Stream::Noise);
  MseTrial r;
  r.det_crb = det_crb_avg(blk, d, p.sigma_v2).value;
  r.stoch_crb = stoch_crb_avg_closed(ch.spectrum(), d, p).value;
  if (em_iters > 0) {
    const CMatrix Y = simulate_rx(ch.G(), blk.S(), p.sigma_v2, noise_seed);
    r.training_mse = mse_per_user(ml_training_estimate(Y.leftCols(d.L), blk.Sp()), ch.G());
    r.em_mse = mse_per_user(em_semiblind_estimate(Y, blk.Sp(), p, em_iters), ch.G());
  } else {
    // noise fills column by column, so these are the same draws as the
    // first L columns of a full block
    const CMatrix Yp = simulate_rx(ch.G(), blk.Sp(), p.sigma_v2, noise_seed);
    r.training_mse = mse_per_user(ml_training_estimate(Yp, blk.Sp()), ch.G());
    r.em_mse = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace sbcrb
