#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ridemp {

// Seeded stream with named substreams. Every distribution here is implemented
// in-house on top of mt19937_64 so draw sequences do not depend on the
// standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  // Independent stream keyed by (seed, name). Does not advance this stream.
  Rng substream(std::string_view name) const;
  // Deterministic child stream; advances this stream by one draw.
  Rng fork();

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }
  int poisson(double mean);
  double normal(double mean = 0.0, double stddev = 1.0);
  double gamma(double shape);  // unit scale
  std::int64_t binomial(std::int64_t n, double p);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_name(std::string_view name);

}  // namespace ridemp
