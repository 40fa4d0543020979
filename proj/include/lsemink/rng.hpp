#ifndef LSEMINK_RNG_HPP
#define LSEMINK_RNG_HPP

#include "lsemink/types.hpp"

#include <cstdint>
#include <random>

namespace lsemink {

// Seedable generator whose output is identical across standard libraries.
// std::mt19937_64 is fully specified by the standard; the distributions are
// not, so uniform and normal variates are derived here by hand (polar
// Box-Muller for normals).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal();

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  Vector normal_vector(Eigen::Index n);
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lsemink

#endif  // LSEMINK_RNG_HPP
