#ifndef PPFFM_RNG_HPP_
#define PPFFM_RNG_HPP_

#include <cstdint>
#include <string_view>

namespace ppffm {

// Derives a child seed from a root seed and a stream name ("chain/0",
// "sim/3", "thin", ...). Same root + same name gives the same child on
// every platform, so whole experiments replay from one top-level seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

// xoshiro256** (Blackman & Vigna, 2018), seeded through splitmix64.
// The generator is pinned to this algorithm, not to std::mt19937 or the
// standard-library distributions, so seeded runs reproduce bit-for-bit
// across compilers and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01();

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos();

  double exponential();             // rate 1
  double normal();                  // standard normal, Box-Muller (cached pair)
  double gamma(double alpha);       // Gamma(alpha, 1), Marsaglia-Tsang squeeze-accept
  double weibull(double phi);       // unit-scale Weibull, inverse CDF
  double inverse_gaussian(double mu);  // mean mu, shape 1, transformation with roots

  // Derived generator for a named substream.
  Rng stream(std::string_view name) const;

 private:
  std::uint64_t state_[4];
  std::uint64_t root_seed_;
  double cached_normal_ = 0.0;
  bool have_cached_normal_ = false;
};

}  // namespace ppffm

#endif  // PPFFM_RNG_HPP_
