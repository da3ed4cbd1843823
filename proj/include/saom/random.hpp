#ifndef SAOM_RANDOM_HPP
#define SAOM_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace saom {

// SplitMix64 step; used to whiten seeds and derive substream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives a substream seed from a master seed and a path of indices
// (e.g. {phase, run, period}). Replicate r of a batch always gets the
// same stream whether runs execute serially or in parallel.
inline std::uint64_t substream_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  for (std::uint64_t p : path) {
    s ^= p + 0x9e3779b97f4a7c15ull + (s << 6) + (s >> 2);
    h ^= splitmix64(s);
  }
  return h;
}

// mt19937_64 wrapped with portable variate generation: all variates are
// built from raw 64-bit draws, so streams are reproducible across
// standard library implementations.
class RandomEngine {
 public:
  explicit RandomEngine(std::uint64_t seed) : gen_(whiten(seed)) {}

  static RandomEngine substream(std::uint64_t master,
                                std::initializer_list<std::uint64_t> path) {
    return RandomEngine(substream_seed(master, path));
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint32_t uniform_int(std::uint32_t n) {
    // multiply-shift; bias is < 2^-32 and irrelevant at our n
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  double exponential(double rate) {
    return -std::log1p(-uniform01()) / rate;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  static std::uint64_t whiten(std::uint64_t seed) {
    std::uint64_t s = seed;
    return splitmix64(s);
  }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace saom

#endif
