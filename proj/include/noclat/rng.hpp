#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace noclat {

// Stream-splitting hash: derives independent substream seeds from a run seed
// and a stream index, so adding or reordering streams never perturbs others.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t substream_seed(uint64_t seed, uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 1));
}

// mt19937_64 has a standardized bit stream; sampling goes through explicit
// inverse-CDF transforms below because the std distribution objects do not.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  // Uniform in [0,1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Geometric on {1,2,...} with success probability p.
  uint64_t geometric1(double p) {
    if (p >= 1.0) return 1;
    const double u = uniform();
    // log(1-u) / log(1-p), floored; u == 0 maps to 1.
    const double k = std::floor(std::log1p(-u) / std::log1p(-p));
    return 1 + static_cast<uint64_t>(k);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace noclat
