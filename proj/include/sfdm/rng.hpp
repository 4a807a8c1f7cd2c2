#pragma once
// Deterministic random streams.
//
// Reproducibility contract: every sampled tensor (weight matrix, bias,
// dataset sample, shuffle order) draws from its own substream, derived from
// the root seed and an integer label via a SplitMix64 mix. Substream
// derivation depends only on (seed, label), never on how much of the parent
// stream was consumed, so adding a consumer cannot perturb sibling streams.
//
// The core engine is std::mt19937_64 (sequence fixed by the standard).
// Uniforms take the top 53 bits of the engine output; Gaussians use
// Box-Muller with a cached spare, in that fixed convention, rather than
// std::normal_distribution (whose algorithm is implementation-defined).

#include <cmath>
#include <cstdint>
#include <random>

namespace sfdm {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed)
      : seed_(seed), engine_(splitmix64(seed)) {}

  // One substream per tensor: label values are module-local constants or
  // sample indices. Derivation is order-independent.
  RandomStream substream(std::uint64_t label) const {
    return RandomStream(splitmix64(seed_ ^ splitmix64(label + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; generates pairs, caches the second.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double gaussian(double sigma) { return sigma * gaussian(); }

  // Uniform integer in [0, n), unbiased via rejection below 2^64 mod n.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t min = (0 - n) % n;
    for (;;) {
      std::uint64_t v = next_u64();
      if (v >= min) return v % n;
    }
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates shuffle with the stream's own draws (std::shuffle's use of
// the URBG is unspecified, so it is not reproducible across libraries).
template <typename T>
void deterministic_shuffle(std::vector<T>& v, RandomStream& rs) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rs.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace sfdm
