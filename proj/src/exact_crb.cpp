#include "sbcrb/exact_crb.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "sbcrb/errors.hpp"
#include "sbcrb/linalg.hpp"

namespace sbcrb {

std::string_view to_string(CrbMethod m) {
  switch (m) {
    case CrbMethod::DetExact: return "det_exact";
    case CrbMethod::DetOracle: return "det_oracle";
    case CrbMethod::DetTraining: return "det_training";
    case CrbMethod::StochClosed: return "stoch_closed";
    case CrbMethod::StochBlockwise: return "stoch_blockwise";
    case CrbMethod::StochFimOracle: return "stoch_fim_oracle";
    case CrbMethod::DetAsym: return "det_asym";
    case CrbMethod::StochAsym: return "stoch_asym";
    case CrbMethod::Taylor: return "taylor";
  }
  return "unknown";
}

namespace {

void check_sigma(double sigma_v2) {
  if (!(std::isfinite(sigma_v2) && sigma_v2 > 0.0)) throw DomainError("noise variance sigma_v2 must be positive and finite");
}

void check_block(const SignalBlock& b, const SystemDims& d) {
  validate_dims(d);
  if (b.K() != d.K || b.L() != d.L || b.N() != d.N)
    throw ShapeError("signal block shape does not match the system dimensions");
}

void check_spectrum(const RVector& e, const SystemDims& d, const PowerConfig& p) {
  validate_dims(d);
  validate_powers(p);
  if (e.size() != d.K) throw ShapeError("spectrum length differs from the user count K");
  for (double v : e)
    if (!(std::isfinite(v) && v > 0.0)) throw DomainError("channel spectrum entries must be strictly positive");
}

double real_trace_inverse(const RMatrix& F, const char* label) {
  RMatrix S = 0.5 * (F + F.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NonFinite(std::string(label) + " eigen-decomposition failed");
  return trace_inverse_spectrum(es.eigenvalues(), label);
}

// Stieltjes evaluation points and weights shared by the closed form and the gain.
struct StochTerms {
  double D = 0.0;       // L(P-Ps) + Ps N
  double arg0 = 0.0;    // argument of the common data term
  std::vector<double> coef;
  std::vector<double> arg;
};

StochTerms stoch_terms(const RVector& e, const SystemDims& d, const PowerConfig& p) {
  const double L = d.L, N = d.N, P = p.P, Ps = p.Ps, s2 = p.sigma_v2;
  StochTerms t;
  t.D = L * (P - Ps) + Ps * N;
  t.arg0 = -s2 * P * L / (Ps * t.D);
  const auto K = e.size();
  t.coef.resize(K);
  t.arg.resize(K);
  for (Eigen::Index i = 0; i < K; ++i) {
    const double si = e[i];
    t.coef[i] = s2 * s2 * Ps * (N - L) * si / (P * L * (P * L * Ps * si + L * s2 * (P - Ps) + Ps * N * s2));
    t.arg[i] = -s2 * (P * L * s2 + Ps * Ps * N * si + Ps * si * L * (P - Ps)) /
               (P * L * Ps * Ps * si + Ps * s2 * (N * Ps + (P - Ps) * L));
  }
  return t;
}

}  // namespace

CrbReport det_crb_avg(const SignalBlock& block, const SystemDims& d, double sigma_v2) {
  check_block(block, d);
  check_sigma(sigma_v2);
  const double trp = trace_inverse_hermitian(block.Xp_tilde(), "pilot Gram");
  double value = sigma_v2 / d.L * trp;
  if (d.M > d.K) {
    const double trx = trace_inverse_hermitian(block.X_tilde(), "signal Gram");
    value += static_cast<double>(d.M - d.K) * sigma_v2 / (static_cast<double>(d.K) * d.N) * trx;
  }
  return {value, CrbMethod::DetExact, d, std::nullopt, std::nullopt, {}};
}

CrbReport det_crb_avg_oracle(const CMatrix& Sp, const CMatrix& Sd, const CMatrix& G, double s2) {
  check_sigma(s2);
  const Eigen::Index M = G.rows(), K = G.cols(), L = Sp.cols(), Nd = Sd.cols();
  if (Sp.rows() != K || (Nd > 0 && Sd.rows() != K)) throw ShapeError("signal and channel user counts differ");
  const SystemDims dims{static_cast<int>(M), static_cast<int>(K), static_cast<int>(L), static_cast<int>(L + Nd)};
  validate_dims(dims);
  if (K * M > kDetOracleMaxKM) throw SizeGuard("deterministic oracle limited to K*M <= 200");

  const CMatrix A = G.adjoint() * G / s2;
  const RVector ae = hermitian_eigenvalues(A);
  if (ae[0] <= 0.0 || ae[ae.size() - 1] / ae[0] > kMaxCondition) throw SingularGram("channel Gram is singular");
  const CMatrix Ainv = Eigen::LDLT<CMatrix>(A).solve(CMatrix::Identity(K, K));

  const CMatrix S = SignalBlock(Sp, Sd).S();
  const CMatrix IM = CMatrix::Identity(M, M);
  const CMatrix Gh = G.adjoint();
  CMatrix schur = CMatrix::Zero(K * M, K * M);
  for (Eigen::Index n = 0; n < S.cols(); ++n) {
    const CVector s = S.col(n);
    schur += kron(s.conjugate() * s.transpose(), IM) / s2;
  }
  for (Eigen::Index n = L; n < S.cols(); ++n) {
    const CMatrix omega = kron(S.col(n).transpose(), Gh) / s2;  // K x KM
    schur -= omega.adjoint() * Ainv * omega;
  }
  const double tr = trace_inverse_hermitian(schur, "deterministic Fisher Schur complement");
  return {tr / K, CrbMethod::DetOracle, dims, std::nullopt, std::nullopt, {}};
}

CrbReport det_training_crb_avg(const CMatrix& Xp_tilde, const SystemDims& d, double s2) {
  validate_dims(d);
  check_sigma(s2);
  if (Xp_tilde.rows() != d.K || Xp_tilde.cols() != d.K) throw ShapeError("pilot Gram must be K x K");
  const double tr = trace_inverse_hermitian(Xp_tilde, "pilot Gram");
  return {s2 * d.M / (static_cast<double>(d.K) * d.L) * tr, CrbMethod::DetTraining, d, std::nullopt, std::nullopt, {}};
}

CrbReport det_training_crb_avg(double P, const SystemDims& d, double s2) {
  validate_dims(d);
  check_sigma(s2);
  if (!(std::isfinite(P) && P > 0.0)) throw DomainError("pilot power P must be positive and finite");
  return {s2 * d.M / (d.L * P), CrbMethod::DetTraining, d, PowerConfig{P, P, s2}, std::nullopt, "identity pilot Gram"};
}

CrbReport det_crb_gain(const SignalBlock& block, const SystemDims& d, double s2) {
  check_block(block, d);
  check_sigma(s2);
  const double trp = trace_inverse_hermitian(block.Xp_tilde(), "pilot Gram");
  const double trx = trace_inverse_hermitian(block.X_tilde(), "signal Gram");
  const double pre = static_cast<double>(d.M - d.K) * s2 / d.K;
  return {pre * (trp / d.L - trx / d.N), CrbMethod::DetExact, d, std::nullopt, std::nullopt, "training minus semi-blind"};
}

double empirical_stieltjes(const RVector& eigs, double x) {
  if (eigs.size() == 0) throw EmptyInput("Stieltjes transform of an empty spectrum");
  if (!std::isfinite(x)) throw DomainError("Stieltjes argument must be finite");
  if (x >= eigs.minCoeff()) throw DomainError("Stieltjes argument must lie strictly below the spectrum");
  return (1.0 / (eigs.array() - x)).mean();
}

CrbReport stoch_crb_avg_closed(const RVector& e, const SystemDims& d, const PowerConfig& p) {
  check_spectrum(e, d, p);
  const double M = d.M, K = d.K, L = d.L, N = d.N, P = p.P, s2 = p.sigma_v2;
  const StochTerms t = stoch_terms(e, d, p);
  const double t1 = s2 * K / (P * L);
  const double t2 = (M - K) * s2 / t.D;
  double t3 = 0.0;
  double t4 = 0.0;
  if (d.N > d.L) {
    t3 = (M - K) * (N - L) * s2 * s2 / (t.D * t.D) * empirical_stieltjes(e, t.arg0);
    for (std::size_t i = 0; i < t.coef.size(); ++i) t4 += t.coef[i] * empirical_stieltjes(e, t.arg[i]);
  }
  return {t1 + t2 + t3 - t4, CrbMethod::StochClosed, d, p, std::nullopt, {}};
}

CrbReport stoch_crb_avg_blockwise(const RVector& e, const SystemDims& d, const PowerConfig& p) {
  check_spectrum(e, d, p);
  const int M = d.M, K = d.K;
  const double P = p.P, Ps = p.Ps, s2 = p.sigma_v2;
  const double a0 = 2.0 * P * d.L / s2;
  const double w = 2.0 * Ps * Ps * (d.N - d.L);
  auto r = [&](int j) { return j < K ? Ps * e[j] + s2 : s2; };
  double tr = 0.0;
  for (int i = 0; i < K; ++i) {
    const double qi = Ps * e[i] + s2;
    for (int j = 0; j < M; ++j) {
      const double base = w * e[i] / (qi * r(j));
      if (j == i) {
        tr += 1.0 / (a0 + 2.0 * base) + 1.0 / a0;
      } else if (j >= K) {
        tr += 2.0 / (a0 + base);
      } else {
        const double qj = Ps * e[j] + s2;
        const double aij = a0 + base;
        const double aji = a0 + w * e[j] / (qj * r(i));
        const double cij = std::sqrt(e[i] * e[j]) / (qi * qj);
        tr += 2.0 * aji / (aij * aji - (w * cij) * (w * cij));
      }
    }
  }
  return {tr / K, CrbMethod::StochBlockwise, d, p, std::nullopt, {}};
}

CrbReport stoch_crb_avg_fim_oracle(const CMatrix& G, const SystemDims& d, const PowerConfig& p) {
  validate_dims(d);
  validate_powers(p);
  if (G.rows() != d.M || G.cols() != d.K) throw ShapeError("channel shape does not match the system dimensions");
  const Eigen::Index M = d.M, K = d.K, n = K * M;
  if (2 * n > kStochOracleMaxReal) throw SizeGuard("stochastic oracle limited to 2*K*M <= 400");
  const double P = p.P, Ps = p.Ps, s2 = p.sigma_v2;

  const CMatrix R = Ps * G * G.adjoint() + s2 * CMatrix::Identity(M, M);
  const CMatrix Ri = Eigen::LLT<CMatrix>(R).solve(CMatrix::Identity(M, M));
  const CMatrix GhRi = G.adjoint() * Ri;  // row i is g_i^H R^-1
  const CMatrix T = kron(GhRi * G, Ri.transpose());
  CMatrix C(n, n);
  for (Eigen::Index i = 0; i < K; ++i)
    for (Eigen::Index j = 0; j < K; ++j)
      C.block(i * M, j * M, M, M) = GhRi.row(j).transpose() * GhRi.row(i);

  RMatrix R1(2 * n, 2 * n), R2(2 * n, 2 * n);
  R1 << T.real(), T.imag(), -T.imag(), T.real();
  R2 << C.real(), -C.imag(), -C.imag(), -C.real();
  RMatrix F = 2.0 * Ps * Ps * (d.N - d.L) * (R1 + R2);
  F.diagonal().array() += 2.0 * P * d.L / s2;
  return {real_trace_inverse(F, "stochastic Fisher matrix") / K, CrbMethod::StochFimOracle, d, p, std::nullopt, {}};
}

CrbReport stoch_crb_gain(const RVector& e, const SystemDims& d, const PowerConfig& p) {
  check_spectrum(e, d, p);
  if (d.N == d.L) return {0.0, CrbMethod::StochClosed, d, p, std::nullopt, "training minus semi-blind"};
  const double M = d.M, K = d.K, L = d.L, N = d.N, P = p.P, Ps = p.Ps, s2 = p.sigma_v2;
  const StochTerms t = stoch_terms(e, d, p);
  double g = s2 * (M - K) * (N - L) / t.D * (Ps / (L * P) - s2 / t.D * empirical_stieltjes(e, t.arg0));
  for (std::size_t i = 0; i < t.coef.size(); ++i) g += t.coef[i] * empirical_stieltjes(e, t.arg[i]);
  return {g, CrbMethod::StochClosed, d, p, std::nullopt, "training minus semi-blind"};
}

}  // namespace sbcrb
