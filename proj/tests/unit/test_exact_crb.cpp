#include <doctest.h>

#include <Eigen/QR>

#include <random>

#include "oracles.hpp"
#include "sbcrb/errors.hpp"
#include "sbcrb/exact_crb.hpp"
#include "sbcrb/linalg.hpp"
#include "sbcrb/model.hpp"

using namespace sbcrb;
using oracle::rel_err;

namespace {

SignalBlock qpsk_block(std::mt19937_64& eng, int K, int L, int N, double P = 1.0, double Ps = 1.0) {
  return SignalBlock(make_orthogonal_pilots(K, L, P), oracle::qpsk(eng, K, N - L, Ps));
}

RVector random_spectrum(std::mt19937_64& eng, int K) {
  RVector e(K);
  for (int i = 0; i < K; ++i) e[i] = oracle::uniform(eng, 0.1, 3.0);
  std::sort(e.data(), e.data() + K);
  return e;
}

}  // namespace

TEST_CASE("deterministic bound: all pilots collapses to the training formula") {
  const SystemDims d{8, 3, 10, 10};
  const SignalBlock b(make_orthogonal_pilots(3, 10, 2.0), CMatrix(3, 0));
  const double v = det_crb_avg(b, d, 0.3).value;
  CHECK(rel_err(v, 0.3 * 8 / (10 * 2.0)) < 1e-12);
}

TEST_CASE("deterministic bound: no excess antennas leaves only the pilot term") {
  std::mt19937_64 eng(1);
  const SystemDims d{3, 3, 4, 12};
  const SignalBlock b = qpsk_block(eng, 3, 4, 12);
  const double pilot_term = 0.2 / 4 * trace_inverse_hermitian(b.Xp_tilde(), "pilot");
  CHECK(rel_err(det_crb_avg(b, d, 0.2).value, pilot_term) < 1e-13);
  CHECK(det_crb_gain(b, d, 0.2).value == 0.0);
}

TEST_CASE("deterministic bound matches the brute-force Schur oracle") {
  std::mt19937_64 eng(2);
  const SystemDims d{6, 2, 3, 8};
  const SignalBlock b = qpsk_block(eng, 2, 3, 8);
  const CMatrix G = oracle::crandn(eng, 6, 2);
  const double fast = det_crb_avg(b, d, 0.1).value;
  const double slow = det_crb_avg_oracle(b.Sp(), b.Sd(), G, 0.1).value;
  CHECK(rel_err(fast, slow) < 1e-9);

  // the average does not depend on which full-rank channel is used
  const CMatrix G2 = oracle::crandn(eng, 6, 2) * 3.0;
  CHECK(rel_err(det_crb_avg_oracle(b.Sp(), b.Sd(), G2, 0.1).value, slow) < 1e-9);
}

TEST_CASE("brute-force oracle with all pilots") {
  std::mt19937_64 eng(4);
  const CMatrix G = oracle::crandn(eng, 5, 2);
  const double v = det_crb_avg_oracle(make_orthogonal_pilots(2, 6, 1.5), CMatrix(2, 0), G, 0.4).value;
  CHECK(rel_err(v, 0.4 * 5 / (6 * 1.5)) < 1e-10);
}

TEST_CASE("brute-force oracle guards its size") {
  std::mt19937_64 eng(4);
  const CMatrix G = oracle::crandn(eng, 80, 3);
  CHECK_THROWS_AS(det_crb_avg_oracle(make_orthogonal_pilots(3, 3, 1), oracle::qpsk(eng, 3, 2, 1), G, 0.1), SizeGuard);
}

TEST_CASE("singular pilot Gram is reported") {
  CMatrix Sp = CMatrix::Zero(2, 3);
  Sp(0, 0) = 1.0;
  Sp(1, 1) = 1e-9;
  const SignalBlock b(Sp, CMatrix::Ones(2, 2));
  CHECK_THROWS_AS(det_crb_avg(b, {4, 2, 3, 5}, 0.1), SingularGram);
  CHECK_THROWS_AS(det_training_crb_avg(b.Xp_tilde(), {4, 2, 3, 5}, 0.1), SingularGram);
}

TEST_CASE("training bound") {
  CHECK(det_training_crb_avg(1.0, {512, 32, 64, 1024}, 0.1).value == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(det_training_crb_avg(1.0, {512, 7, 128, 1024}, 0.1).value == doctest::Approx(0.4).epsilon(1e-14));
  std::mt19937_64 eng(6);
  for (int rep = 0; rep < 10; ++rep) {
    const CMatrix A = oracle::crandn(eng, 4, 9);
    const CMatrix Xp = A * A.adjoint() / 9.0;
    const SystemDims d{10, 4, 9, 20};
    CHECK(rel_err(det_training_crb_avg(Xp, d, 0.7).value, oracle::training_bound_eig(Xp, 10, 9, 0.7)) < 1e-10);
  }
}

TEST_CASE("deterministic gain: identities and sign") {
  std::mt19937_64 eng(7);
  const SystemDims d{6, 2, 3, 8};
  const SignalBlock b = qpsk_block(eng, 2, 3, 8);
  const double train = det_training_crb_avg(b.Xp_tilde(), d, 0.1).value;
  const double semi = det_crb_avg(b, d, 0.1).value;
  const double gain = det_crb_gain(b, d, 0.1).value;
  CHECK(std::abs(gain - (train - semi)) < 1e-12 * train);
  CHECK(gain > 0.0);

  const SignalBlock full(make_orthogonal_pilots(2, 8, 1), CMatrix(2, 0));
  CHECK(std::abs(det_crb_gain(full, {6, 2, 8, 8}, 0.1).value) < 1e-15);
}

TEST_CASE("deterministic bound is nonincreasing as data are appended") {
  std::mt19937_64 eng(8);
  const int M = 10, K = 3, L = 4;
  const CMatrix Sp = make_orthogonal_pilots(K, L, 1.0);
  const CMatrix Sd = oracle::qpsk(eng, K, 60, 1.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int extra : {0, 3, 6, 12, 24, 60}) {
    const SignalBlock b(Sp, Sd.leftCols(extra));
    const double v = det_crb_avg(b, {M, K, L, L + extra}, 0.2).value;
    CHECK(v <= prev + 1e-14);
    prev = v;
  }
}

TEST_CASE("empirical Stieltjes transform") {
  CHECK(empirical_stieltjes(RVector::Ones(4), 0.0) == 1.0);
  RVector e(2);
  e << 1.0, 2.0;
  CHECK(empirical_stieltjes(e, -1.0) == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
  CHECK_THROWS_AS(empirical_stieltjes(e, 1.0), DomainError);
  CHECK_THROWS_AS(empirical_stieltjes(e, 1.5), DomainError);
  CHECK_THROWS_AS(empirical_stieltjes(RVector(), -1.0), EmptyInput);
  std::mt19937_64 eng(9);
  const RVector r = random_spectrum(eng, 50);
  CHECK(rel_err(empirical_stieltjes(r, -0.1), oracle::naive_stieltjes(r, -0.1)) < 1e-14);
  CHECK(empirical_stieltjes(r, -0.1) > 0.0);
}

TEST_CASE("stochastic bound: closed form, blockwise and Fisher oracle agree") {
  std::mt19937_64 eng(10);
  const SystemDims d{8, 3, 4, 16};
  const PowerConfig p{1.0, 1.0, 0.5};
  for (int rep = 0; rep < 5; ++rep) {
    const CMatrix G = oracle::crandn(eng, 8, 3);
    const RVector e = gram_spectrum(G);
    const double closed = stoch_crb_avg_closed(e, d, p).value;
    const double block = stoch_crb_avg_blockwise(e, d, p).value;
    const double fim = stoch_crb_avg_fim_oracle(G, d, p).value;
    const double sb = oracle::stoch_crb_slepian_bangs(G, make_orthogonal_pilots(3, 4, 1.0), 16, 1.0, 0.5);
    CHECK(rel_err(closed, block) < 1e-10);
    CHECK(rel_err(closed, fim) < 1e-8);
    CHECK(rel_err(fim, sb) < 1e-9);
  }
}

TEST_CASE("stochastic paths agree on random powers and shapes") {
  std::mt19937_64 eng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const int K = oracle::uniform_int(eng, 1, 3);
    const int M = oracle::uniform_int(eng, K, 8);
    const int L = oracle::uniform_int(eng, K, 6);
    const int N = oracle::uniform_int(eng, L, 14);
    const PowerConfig p{oracle::uniform(eng, 0.3, 3), oracle::uniform(eng, 0.3, 3), oracle::uniform(eng, 0.05, 1)};
    const SystemDims d{M, K, L, N};
    const CMatrix G = oracle::crandn(eng, M, K);
    const RVector e = gram_spectrum(G);
    const double closed = stoch_crb_avg_closed(e, d, p).value;
    CHECK(rel_err(stoch_crb_avg_blockwise(e, d, p).value, closed) < 1e-10);
    CHECK(rel_err(stoch_crb_avg_fim_oracle(G, d, p).value, closed) < 1e-8);
  }
}

TEST_CASE("stochastic bound: K = 1 reduces to the diagonal sum") {
  const SystemDims d{5, 1, 2, 9};
  const PowerConfig p{1.2, 0.8, 0.3};
  RVector e(1);
  e << 0.7;
  const double a0 = 2 * p.P * d.L / p.sigma_v2, w = 2 * p.Ps * p.Ps * (d.N - d.L);
  const double q = p.Ps * e[0] + p.sigma_v2;
  double tr = 1.0 / (a0 + 2 * w * e[0] / (q * q)) + 1.0 / a0;
  tr += (d.M - 1) * 2.0 / (a0 + w * e[0] / (q * p.sigma_v2));
  CHECK(rel_err(stoch_crb_avg_blockwise(e, d, p).value, tr) < 1e-14);
  CHECK(rel_err(stoch_crb_avg_closed(e, d, p).value, tr) < 1e-10);
}

TEST_CASE("stochastic bound: all pilots gives s2 M/(PL)") {
  std::mt19937_64 eng(12);
  const SystemDims d{8, 3, 16, 16};
  const PowerConfig p{2.0, 1.0, 0.5};
  const CMatrix G = oracle::crandn(eng, 8, 3);
  const RVector e = gram_spectrum(G);
  const double target = 0.5 * 8 / (2.0 * 16);
  CHECK(rel_err(stoch_crb_avg_closed(e, d, p).value, target) < 1e-12);
  CHECK(rel_err(stoch_crb_avg_blockwise(e, d, p).value, target) < 1e-12);
  CHECK(rel_err(stoch_crb_avg_fim_oracle(G, d, p).value, target) < 1e-10);
  CHECK(stoch_crb_gain(e, d, p).value == 0.0);
}

TEST_CASE("stochastic bound: vanishing data power carries no information") {
  std::mt19937_64 eng(13);
  const SystemDims d{8, 3, 4, 16};
  const PowerConfig p{1.0, 1e-8, 0.5};
  const CMatrix G = oracle::crandn(eng, 8, 3);
  CHECK(rel_err(stoch_crb_avg_fim_oracle(G, d, p).value, 0.5 * 8 / (1.0 * 4)) < 1e-6);
}

TEST_CASE("stochastic bound is invariant to unitary rotations of the channel") {
  std::mt19937_64 eng(14);
  const SystemDims d{7, 3, 3, 11};
  const PowerConfig p{1.0, 1.5, 0.2};
  const CMatrix G = oracle::crandn(eng, 7, 3);
  const Eigen::HouseholderQR<CMatrix> qrU(oracle::crandn(eng, 7, 7));
  const Eigen::HouseholderQR<CMatrix> qrV(oracle::crandn(eng, 3, 3));
  const CMatrix U = qrU.householderQ() * CMatrix::Identity(7, 7);
  const CMatrix V = qrV.householderQ() * CMatrix::Identity(3, 3);
  const double v0 = stoch_crb_avg_fim_oracle(G, d, p).value;
  CHECK(rel_err(stoch_crb_avg_fim_oracle(U * G, d, p).value, v0) < 1e-9);
  CHECK(rel_err(stoch_crb_avg_fim_oracle(G * V, d, p).value, v0) < 1e-9);
}

TEST_CASE("stochastic gain equals training minus semi-blind and is nonnegative") {
  std::mt19937_64 eng(15);
  for (int rep = 0; rep < 50; ++rep) {
    const int K = oracle::uniform_int(eng, 1, 6);
    const int M = oracle::uniform_int(eng, K, 20);
    const int L = oracle::uniform_int(eng, K, 20);
    const int N = oracle::uniform_int(eng, L, 60);
    const SystemDims d{M, K, L, N};
    const PowerConfig p{oracle::uniform(eng, 0.2, 4), oracle::uniform(eng, 0.2, 4), oracle::uniform(eng, 0.01, 2)};
    const RVector e = random_spectrum(eng, K);
    const double train = det_training_crb_avg(p.P, d, p.sigma_v2).value;
    const double semi = stoch_crb_avg_closed(e, d, p).value;
    const double gain = stoch_crb_gain(e, d, p).value;
    CHECK(std::abs(gain - (train - semi)) <= 1e-10 * train);
    CHECK(gain >= -1e-12);
  }
  // M = K: only the per-user sum remains, still nonnegative
  RVector e(3);
  e << 0.5, 1.0, 2.0;
  CHECK(stoch_crb_gain(e, {3, 3, 4, 20}, {1, 1, 0.3}).value >= 0.0);
}

TEST_CASE("stochastic operations validate their inputs") {
  RVector e(2);
  e << 0.0, 1.0;
  CHECK_THROWS_AS(stoch_crb_avg_closed(e, {4, 2, 2, 5}, {1, 1, 1}), DomainError);
  CHECK_THROWS_AS(stoch_crb_avg_blockwise(e, {4, 2, 2, 5}, {1, 1, 1}), DomainError);
  CHECK_THROWS_AS(stoch_crb_avg_closed(RVector::Ones(3), {4, 2, 2, 5}, {1, 1, 1}), ShapeError);
  std::mt19937_64 eng(1);
  CHECK_THROWS_AS(stoch_crb_avg_fim_oracle(oracle::crandn(eng, 70, 3), {70, 3, 3, 5}, {1, 1, 1}), SizeGuard);
}

TEST_CASE("report carries method labels") {
  CHECK(to_string(CrbMethod::StochFimOracle) == "stoch_fim_oracle");
  CHECK(to_string(CrbMethod::DetOracle) == "det_oracle");
  const auto r = det_training_crb_avg(1.0, {4, 2, 2, 4}, 1.0);
  CHECK(r.method == CrbMethod::DetTraining);
  REQUIRE(r.dims.has_value());
  CHECK(r.dims->M == 4);
}
