#pragma once

#include <cmath>
#include <cstdint>

namespace qbatt {

// splitmix64 step (Steele/Lea/Vigna). Output sequence is fixed by the
// standard's uint64 arithmetic, so streams are identical across platforms.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives the seed of an independent realization stream from
// (master_seed, num_sites, realization_index). Workers may process
// realizations in any order; each stream depends only on this key.
inline std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t num_sites,
                                 std::uint64_t realization_index) {
  std::uint64_t s = master_seed;
  std::uint64_t a = splitmix64_next(s);
  s = a ^ (num_sites * 0xd1342543de82ef95ULL);
  a = splitmix64_next(s);
  s = a ^ (realization_index * 0xaf251af3b0f025b5ULL);
  return splitmix64_next(s);
}

// Standard-normal stream: splitmix64 uniforms fed through Box-Muller.
// Draw order is part of the file-format contract for seeded runs.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : state_(seed) {}

  // Uniform on (0, 1]; 53-bit mantissa.
  double uniform() {
    const std::uint64_t bits = splitmix64_next(state_);
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qbatt
