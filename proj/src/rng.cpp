#include "ridemp/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ridemp {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, 64 bit.
std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::substream(std::string_view name) const {
  return Rng(splitmix64(seed_ ^ hash_name(name)));
}

Rng Rng::fork() { return Rng(splitmix64(engine_())); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return lo + static_cast<std::int64_t>(draw % span);
}

int Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("poisson: bad mean");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    // Knuth multiplication method.
    const double limit = std::exp(-mean);
    int k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }
  // Inversion by sequential search.
  const double u = uniform();
  int k = 0;
  double cdf = std::exp(-mean);
  double logp = -mean;
  while (cdf < u && k < 100000) {
    ++k;
    logp += std::log(mean) - std::log(static_cast<double>(k));
    cdf += std::exp(logp);
  }
  return k;
}

double Rng::normal(double mean, double stddev) {
  // Box-Muller, one value per call.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw std::invalid_argument("gamma: bad shape");
  if (shape < 1.0) {
    // Boost to shape + 1 and scale back by U^(1/shape).
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia and Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform();
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

std::int64_t Rng::binomial(std::int64_t n, double p) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: bad parameters");
  // Order-statistic splitting: the a-th smallest of n uniforms is Beta(a, n+1-a),
  // and the uniforms below and above it are again binomial.
  std::int64_t k = 0;
  while (n > 32 && p > 0.0 && p < 1.0) {
    const std::int64_t a = 1 + n / 2, b = n + 1 - a;
    const double ga = gamma(static_cast<double>(a));
    const double x = ga / (ga + gamma(static_cast<double>(b)));
    if (x >= p) {
      n = a - 1;
      p /= x;
    } else {
      k += a;
      n = b - 1;
      p = (p - x) / (1.0 - x);
    }
  }
  if (p <= 0.0) return k;
  if (p >= 1.0) return k + n;
  for (std::int64_t i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
  return k;
}

}  // namespace ridemp
