#include <cstdlib>
#include <string>

#include "airfedga/error.hpp"
#include "airfedga/kernels.hpp"

namespace airfedga::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(AIRFEDGA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* env = std::getenv("AIRFEDGA_SIMD")) {
    const std::string want(env);
    if (want == "scalar") {
      return scalar::table();
    }
    if (want == "avx2" && level_available(SimdLevel::Avx2)) {
      return table_for(SimdLevel::Avx2);
    }
    // Unknown or unsupported request: fall through to auto-detection.
  }
  if (level_available(SimdLevel::Avx2)) {
    return table_for(SimdLevel::Avx2);
  }
  return scalar::table();
}

}  // namespace

std::string_view level_name(SimdLevel level) {
  switch (level) {
    case SimdLevel::Scalar:
      return "scalar";
    case SimdLevel::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool level_available(SimdLevel level) {
  if (level == SimdLevel::Scalar) {
    return true;
  }
  static const bool avx2 = cpu_has_avx2();
  return avx2;
}

const KernelTable& table_for(SimdLevel level) {
  if (!level_available(level)) {
    throw ConfigError("SIMD level '" + std::string(level_name(level)) + "' is not available");
  }
  switch (level) {
    case SimdLevel::Scalar:
      return scalar::table();
    case SimdLevel::Avx2:
#if defined(AIRFEDGA_HAVE_AVX2)
      return avx2::table();
#else
      break;
#endif
  }
  return scalar::table();
}

const KernelTable& active() {
  static const KernelTable& t = select();
  return t;
}

}  // namespace airfedga::kernels
