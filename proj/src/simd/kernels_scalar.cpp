#include "hmf/simd.hpp"

namespace hmf::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double weighted_dot_scalar(const double* w, const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * b[i];
  return s;
}

double weighted_sq_scalar(const double* w, const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * a[i];
  return s;
}

Moments residual_moments_scalar(const double* w, const double* e, const double* c, double f,
                                std::size_t n) {
  double p = 0.0, l = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wc = w[i] * c[i];
    p += wc * c[i];
    l += wc * (e[i] + f * c[i]);
  }
  return {p, l};
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

constexpr KernelTable kScalar{
    "scalar",        dot_scalar,  weighted_dot_scalar,    weighted_sq_scalar,
    residual_moments_scalar, axpy_scalar, squared_distance_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace hmf::simd
