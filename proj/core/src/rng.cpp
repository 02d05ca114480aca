#include "ppffm/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ppffm {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream) {
  std::uint64_t x = root ^ fnv1a64(stream);
  // One extra mixing round decorrelates neighbouring roots and names.
  std::uint64_t s = x;
  return splitmix64(s);
}

Rng::Rng(std::uint64_t seed) : root_seed_(seed) {
  std::uint64_t s = seed;
  for (auto& w : state_) w = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  return 1.0 - uniform01();
}

double Rng::exponential() {
  return -std::log(uniform_pos());
}

double Rng::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
  const double theta = 2.0 * std::numbers::pi * uniform01();
  cached_normal_ = r * std::sin(theta);
  have_cached_normal_ = true;
  return r * std::cos(theta);
}

double Rng::gamma(double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("gamma: alpha must be positive");
  if (alpha < 1.0) {
    // Boost to alpha+1 and scale back (Marsaglia & Tsang, 2000).
    const double u = uniform_pos();
    return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::weibull(double phi) {
  if (!(phi > 0.0)) throw std::domain_error("weibull: phi must be positive");
  return std::pow(exponential(), 1.0 / phi);
}

double Rng::inverse_gaussian(double mu) {
  if (!(mu > 0.0)) throw std::domain_error("inverse_gaussian: mu must be positive");
  // Michael, Schucany & Haas (1976), shape parameter fixed at 1.
  const double n = normal();
  const double w = mu * n * n;
  // Stable form of mu*(1 + w/2 - sqrt(w(w+4))/2) = 4*mu*w / (w + s)^2.
  const double s = std::sqrt(w * (w + 4.0));
  const double x = (w > 0.0) ? mu * 4.0 * w / ((w + s) * (w + s)) : mu;
  const double u = uniform01();
  return (u <= mu / (mu + x)) ? x : mu * mu / x;
}

Rng Rng::stream(std::string_view name) const {
  return Rng(derive_seed(root_seed_, name));
}

}  // namespace ppffm
