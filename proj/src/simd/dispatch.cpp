#include <atomic>
#include <cstdlib>
#include <string>

#include "dfn/simd/kernels.hpp"

namespace dfn::simd {
namespace {

const KernelTable* best_available() {
  if (const auto* t = avx2_kernels()) return t;
  if (const auto* t = neon_kernels()) return t;
  return &scalar_kernels();
}

const KernelTable* resolve(std::string_view which) {
  if (which == "scalar") return &scalar_kernels();
  if (which == "avx2") return avx2_kernels();
  if (which == "neon") return neon_kernels();
  if (which == "auto" || which.empty()) return best_available();
  return nullptr;
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{[] {
    const char* env = std::getenv("DFN_SIMD");
    const KernelTable* t = env ? resolve(env) : nullptr;
    return t ? t : best_available();
  }()};
  return table;
}

}  // namespace

const KernelTable& kernels() { return *active().load(std::memory_order_relaxed); }

bool select_kernels(std::string_view which) {
  const KernelTable* t = resolve(which);
  if (!t) return false;
  active().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace dfn::simd
