#ifndef SKEWLINK_RNG_HPP_
#define SKEWLINK_RNG_HPP_

#include <cstdint>
#include <random>

namespace skewlink {

// Deterministic random stream. All variate generation is routed through
// this class so that a chain is reproducible from its 64-bit seed alone,
// independent of library implementation details.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via the inverse CDF (see numerics::std_normal_quantile).
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential(double rate);

  // Gamma(shape, rate) by Marsaglia-Tsang squeezing.
  double gamma(double shape, double rate);

  double beta(double a, double b);

  // Derive the seed of an independent sub-stream. Streams for distinct
  // indices never overlap in practice (SplitMix64 over master ^ f(index)).
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

 private:
  std::mt19937_64 engine_;
};

}  // namespace skewlink

#endif  // SKEWLINK_RNG_HPP_
