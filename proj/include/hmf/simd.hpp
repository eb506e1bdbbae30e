#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop kernels used by the Gibbs sweeps, kernels and baselines.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA implementation. The active table is picked once at first use from
// the CPU feature bits and can be overridden with set_backend() or the
// HMF_SIMD environment variable ("scalar" | "avx2").
//
// The vector kernels reassociate sums, so they agree with the scalar ones to
// rounding only. Within one process the choice is fixed, which keeps runs
// bit-reproducible.

namespace hmf::simd {

struct Moments {
  double precision;  // sum w * c^2
  double linear;     // sum w * (e + f * c) * c
};

struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*weighted_dot)(const double* w, const double* a, const double* b, std::size_t n);
  double (*weighted_sq)(const double* w, const double* a, std::size_t n);
  Moments (*residual_moments)(const double* w, const double* e, const double* c, double f,
                              std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
};

enum class Backend { scalar, avx2 };

const KernelTable& scalar_table();
// nullptr when the AVX2 translation unit was not compiled in.
const KernelTable* avx2_table();

bool cpu_supports_avx2();

// Currently active table.
const KernelTable& active();

// Throws std::invalid_argument if the backend is unavailable on this CPU.
void set_backend(Backend b);
Backend current_backend();
std::string_view backend_name(Backend b);

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline double weighted_dot(const double* w, const double* a, const double* b, std::size_t n) {
  return active().weighted_dot(w, a, b, n);
}
inline double weighted_sq(const double* w, const double* a, std::size_t n) {
  return active().weighted_sq(w, a, n);
}
inline Moments residual_moments(const double* w, const double* e, const double* c, double f,
                                std::size_t n) {
  return active().residual_moments(w, e, c, f, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline double squared_distance(const double* a, const double* b, std::size_t n) {
  return active().squared_distance(a, b, n);
}

}  // namespace hmf::simd
