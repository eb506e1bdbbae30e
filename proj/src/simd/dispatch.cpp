#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hmf/simd.hpp"

namespace hmf::simd {
namespace {

Backend detect() {
  if (const char* env = std::getenv("HMF_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && avx2_table() != nullptr && cpu_supports_avx2()) return Backend::avx2;
  }
  if (avx2_table() != nullptr && cpu_supports_avx2()) return Backend::avx2;
  return Backend::scalar;
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{nullptr};
  return table;
}

const KernelTable* table_for(Backend b) {
  return b == Backend::avx2 ? avx2_table() : &scalar_table();
}

}  // namespace

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& active() {
  const KernelTable* t = slot().load(std::memory_order_acquire);
  if (t == nullptr) {
    t = table_for(detect());
    slot().store(t, std::memory_order_release);
  }
  return *t;
}

void set_backend(Backend b) {
  if (b == Backend::avx2 && (avx2_table() == nullptr || !cpu_supports_avx2()))
    throw std::invalid_argument("avx2 backend not available on this machine");
  slot().store(table_for(b), std::memory_order_release);
}

Backend current_backend() {
  return &active() == avx2_table() ? Backend::avx2 : Backend::scalar;
}

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

}  // namespace hmf::simd
