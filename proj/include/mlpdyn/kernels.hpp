#pragma once

// Data-parallel inner loops of the objective. Every kernel table computes the
// same quantities; the scalar table is the reference and the SIMD tables are
// tested against it (tests/test_kernels.cpp). Reductions use a fixed order
// inside each table, so results are reproducible run to run for a given
// table but not bit-identical across tables.

#include <cstddef>
#include <string_view>

namespace mlpdyn::kernels {

struct KernelTable {
  std::string_view name;

  // out[i] = tanh(in[i])
  void (*tanh)(const double* in, double* out, std::size_t n);

  // out[i] = sum_j v[j] * tanh(w[j] * x[i])
  void (*forward)(const double* v, const double* w, std::size_t m, const double* x, double* out,
                  std::size_t n);

  // With r_i = f(x_i) - y_i, returns sum_i r_i^2 and writes the unnormalized
  // gradient sums
  //   grad[j]     = sum_i tanh(w_j x_i) r_i
  //   grad[m + j] = v_j * sum_i x_i sech^2(w_j x_i) r_i.
  // `scratch` must hold scratch_size(m, n) doubles.
  double (*loss_grad)(const double* v, const double* w, std::size_t m, const double* x, const double* y,
                      std::size_t n, double* grad, double* scratch);
};

inline constexpr std::size_t kLanePad = 4;

constexpr std::size_t padded(std::size_t n) { return (n + kLanePad - 1) / kLanePad * kLanePad; }
constexpr std::size_t scratch_size(std::size_t m, std::size_t n) { return (m + 1) * padded(n); }

const KernelTable& scalar();

// nullptr when the variant was not compiled in or the CPU lacks AVX2+FMA.
const KernelTable* avx2();

bool cpu_has_avx2_fma();

// Widest available table. The environment variable MLPDYN_KERNEL
// ("scalar", "avx2" or "auto") overrides the choice; it is read once.
const KernelTable& best();

// "auto" -> best(), "scalar", "avx2". Throws ValidationError for unknown or
// unavailable names.
const KernelTable& by_name(std::string_view name);

}  // namespace mlpdyn::kernels
