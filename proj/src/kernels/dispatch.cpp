#include <cstdlib>
#include <string>

#include "mlpdyn/error.hpp"
#include "mlpdyn/kernels.hpp"

namespace mlpdyn::kernels {

#if defined(MLPDYN_WITH_AVX2)
const KernelTable& avx2_table();
#endif

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

const KernelTable* avx2() {
#if defined(MLPDYN_WITH_AVX2)
  if (cpu_has_avx2_fma()) return &avx2_table();
#endif
  return nullptr;
}

namespace {

const KernelTable& widest() {
  if (const auto* k = avx2()) return *k;
  return scalar();
}

}  // namespace

const KernelTable& by_name(std::string_view name) {
  if (name == "auto") return best();
  if (name == "scalar") return scalar();
  if (name == "avx2") {
    if (const auto* k = avx2()) return *k;
    throw ValidationError("kernel 'avx2' is not available on this build or CPU");
  }
  throw ValidationError("unknown kernel '" + std::string(name) + "' (expected auto, scalar or avx2)");
}

const KernelTable& best() {
  static const KernelTable& chosen = [] () -> const KernelTable& {
    const char* env = std::getenv("MLPDYN_KERNEL");
    if (env == nullptr || std::string_view(env).empty() || std::string_view(env) == "auto") return widest();
    return by_name(env);
  }();
  return chosen;
}

}  // namespace mlpdyn::kernels
