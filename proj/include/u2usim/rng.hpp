#ifndef U2USIM_RNG_HPP
#define U2USIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

// Deterministic randomness for the simulator.
//
// Every run is a pure function of (config, seed). Sub-streams are derived
// from the run seed with a SplitMix64 finalizer so that each consumer
// (fire arrivals, fading, exploration, weight init) owns an independent
// stream: adding draws to one stream never perturbs the others.
//
// The engine is std::mt19937_64 (bit-exact across platforms); all
// distributions are hand-rolled on top of its raw 64-bit output, because
// the std::*_distribution classes are implementation-defined.

namespace u2usim {

inline constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Steele et al.). Used only to derive stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += kSplitMixGamma;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed for the i-th derived stream of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base + stream * kSplitMixGamma);
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Unbiased via rejection.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t min = (-n) % n;  // 2^64 mod n
    std::uint64_t r;
    do {
      r = engine_();
    } while (r < min);
    return r % n;
  }

  // Standard normal via Box-Muller. 1 - uniform() keeps the log argument
  // strictly positive.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  double lognormal(double mu, double sigma) {
    return std::exp(mu + sigma * normal());
  }

  // Poisson count via Knuth's product-of-uniforms method. Fine for the
  // small arrival densities used here.
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 engine_;
};

// Stream tags. Documented so a reimplementation can mirror the split,
// even though the draws themselves are engine-specific.
enum class Stream : std::uint64_t {
  kFires = 1,        // arrival counts, fire placement, fire heights
  kFading = 2,       // per-UE per-TTI Rician draws
  kExploration = 3,  // epsilon coins, softmax sampling, minibatch picks
  kInit = 4,         // network weight initialisation
  kEpisode = 5,      // per-episode environment seeds
};

inline RandomStream make_stream(std::uint64_t base_seed, Stream s) {
  return RandomStream(derive_seed(base_seed, static_cast<std::uint64_t>(s)));
}

// Seed for episode `index` of a run. Episodes get fresh fire/fading
// streams; agent streams persist across the whole run.
inline std::uint64_t episode_seed(std::uint64_t run_seed, int index) {
  return splitmix64(derive_seed(run_seed, static_cast<std::uint64_t>(Stream::kEpisode)) +
                    static_cast<std::uint64_t>(index) * kSplitMixGamma);
}

}  // namespace u2usim

#endif  // U2USIM_RNG_HPP
