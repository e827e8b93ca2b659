#pragma once

// Platform-independent random streams.
//
// Generator "mt19937_64/as241/v1":
//   * engine: std::mt19937_64 (output sequence fixed by the C++ standard),
//     seeded with splitmix64(seed XOR stream_tag);
//   * uniform: (bits >> 11) + 0.5) * 2^-53, strictly inside (0, 1);
//   * normal: inverse CDF via Wichura's AS 241 (PPND16), which only needs
//     +, *, /, log and sqrt.
// std::normal_distribution is avoided because its algorithm is unspecified.

#include <cstdint>
#include <random>
#include <string_view>

namespace mlpdyn {

inline constexpr std::string_view kGeneratorName = "mt19937_64/as241/v1";

// Stream tags for independent sub-streams derived from one user seed.
enum class Stream : std::uint64_t {
  inputs = 0x78696e7075747321ULL,  // dataset x_i
  noise = 0x6e6f697365787869ULL,   // dataset xi_i
  init = 0x696e697468657461ULL,    // initial parameters
  sampling = 0x73616d706c657273ULL,
};

std::uint64_t splitmix64(std::uint64_t x);

// Standard normal quantile, p in (0, 1). Relative accuracy about 1e-16.
double normal_quantile(double p);

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, Stream stream);

  double uniform();                    // (0, 1)
  double uniform(double lo, double hi);
  double normal();                     // N(0, 1)
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mlpdyn
