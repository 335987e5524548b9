#include "sbcrb/rng.hpp"

#include <cmath>

namespace sbcrb {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, Stream stream) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ trial);
  return splitmix64(h ^ static_cast<std::uint64_t>(stream));
}

cdouble Rng::cnormal(double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

CMatrix Rng::cnormal_matrix(Eigen::Index rows, Eigen::Index cols, double variance) {
  CMatrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = cnormal(variance);
  return out;
}

}  // namespace sbcrb
