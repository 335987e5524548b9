#pragma once

#include <cstdint>
#include <random>

#include "sbcrb/types.hpp"

namespace sbcrb {

/// Independent random streams inside one trial.
enum class Stream : std::uint64_t {
  Channel = 1,
  LargeScale = 2,
  Data = 3,
  Noise = 4,
  Geometry = 5,
};

/// Mixes (master, trial, stream) into one 64-bit seed, so trial i draws the
/// same numbers whatever the schedule.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, Stream stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  /// Circular complex Gaussian with E|z|^2 = variance.
  cdouble cnormal(double variance = 1.0);
  bool coin() { return (eng_() >> 63) != 0; }

  /// rows x cols matrix of cnormal(variance) entries, filled column by column.
  CMatrix cnormal_matrix(Eigen::Index rows, Eigen::Index cols, double variance = 1.0);

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace sbcrb
