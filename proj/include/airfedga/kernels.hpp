#pragma once

// Dense double-precision vector kernels used by the learner and the channel
// model. Every kernel has a scalar reference implementation; an AVX2/FMA
// variant is selected at runtime when the CPU supports it. The environment
// variable AIRFEDGA_SIMD=scalar|avx2 overrides the automatic choice.

#include <cstddef>
#include <span>
#include <string_view>

namespace airfedga::kernels {

enum class SimdLevel { Scalar, Avx2 };

std::string_view level_name(SimdLevel level);

struct KernelTable {
  SimdLevel level;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = alpha * x + beta * y
  void (*axpby)(double alpha, const double* x, double beta, double* y, std::size_t n);
  // x *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
  // out[r] = dot(rows + r * stride, x) + bias[r], for r in [0, num_rows)
  void (*gemv_bias)(const double* rows, std::size_t num_rows, std::size_t stride,
                    const double* x, const double* bias, double* out);
  // rows[r * stride ..] += coef[r] * x, for r in [0, num_rows)
  void (*rank1_update)(const double* coef, std::size_t num_rows, std::size_t stride,
                       const double* x, double* rows);
};

namespace scalar {
const KernelTable& table();
}

#if defined(AIRFEDGA_HAVE_AVX2)
namespace avx2 {
const KernelTable& table();
}
#endif

bool level_available(SimdLevel level);

// Table for a specific level; throws ConfigError when the level is not
// compiled in or not supported by the running CPU.
const KernelTable& table_for(SimdLevel level);

// Table chosen once per process (CPU detection + AIRFEDGA_SIMD override).
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_norm(std::span<const double> x) {
  return active().dot(x.data(), x.data(), x.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), y.size());
}

inline void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y) {
  active().axpby(alpha, x.data(), beta, y.data(), y.size());
}

inline void scale(double alpha, std::span<double> x) {
  active().scale(alpha, x.data(), x.size());
}

}  // namespace airfedga::kernels
