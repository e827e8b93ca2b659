#pragma once

// Pinned configuration of the reference experiments (n = 100 noisy teacher
// data, two hidden neurons, 2e6 iterations).

#include <cstddef>
#include <cstdint>

#include "mlpdyn/analysis.hpp"

namespace mlpdyn::reference {

inline constexpr std::size_t kN = 100;
inline constexpr double kNoisyTau = 0.2;
inline constexpr std::size_t kHidden = 2;
inline constexpr double kEta = 0.05;
inline constexpr std::uint64_t kMaxIter = 2'000'000;
inline constexpr std::uint64_t kDataSeed = 4;
inline constexpr std::uint64_t kInitSeed = 181;
inline constexpr std::uint64_t kMultistartSeed = 1000;
inline constexpr std::size_t kMultistartK = 20;

// Counted quantity for the plateau vs near-optimal comparison and its
// expected change (plateau minus near-optimal): two positive Hessian
// eigenvalues on the plateau, one near the optimal region.
inline constexpr SpectralConvention kSpectralConvention = SpectralConvention::hessian_positive;
inline constexpr long kSpectralExpectedDifference = 1;

}  // namespace mlpdyn::reference
