#include "airfedga/kernels.hpp"

namespace airfedga::kernels::scalar {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += a[i] * b[i];
  }
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

void axpby(double alpha, const double* x, double beta, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = alpha * x[i] + beta * y[i];
  }
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    x[i] *= alpha;
  }
}

void gemv_bias(const double* rows, std::size_t num_rows, std::size_t stride, const double* x,
               const double* bias, double* out) {
  for (std::size_t r = 0; r < num_rows; ++r) {
    out[r] = dot(rows + r * stride, x, stride) + bias[r];
  }
}

void rank1_update(const double* coef, std::size_t num_rows, std::size_t stride, const double* x,
                  double* rows) {
  for (std::size_t r = 0; r < num_rows; ++r) {
    axpy(coef[r], x, rows + r * stride, stride);
  }
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{SimdLevel::Scalar, dot, axpy, axpby, scale, gemv_bias, rank1_update};
  return t;
}

}  // namespace airfedga::kernels::scalar
