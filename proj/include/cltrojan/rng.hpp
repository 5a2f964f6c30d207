#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace clt {

// splitmix64 finalizer, used to derive independent stream seeds
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b) { return mix64(a ^ mix64(b)); }

template <class... Rest>
inline std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b, Rest... rest) {
  return mixSeed(mixSeed(a, b), rest...);
}

// mt19937_64 core (bit-exact per the standard) with fixed output mappings.
// std::uniform_*_distribution is implementation-defined, so we do not use it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // [0, 1)
  double uniform() { return (next() >> 11) * kInv53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n), Lemire's bounded rejection method
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = (unsigned __int128)next() * n;
    auto lo = (std::uint64_t)m;
    if (lo < n) {
      std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        m = (unsigned __int128)next() * n;
        lo = (std::uint64_t)m;
      }
    }
    return (std::uint64_t)(m >> 64);
  }
  int intBelow(int n) { return (int)below((std::uint64_t)n); }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller
  double normal() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    double u1 = ((next() >> 11) + 1) * kInv53;  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_ = true;
    return r * std::cos(a);
  }

 private:
  static constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_ = false;
};

}  // namespace clt
