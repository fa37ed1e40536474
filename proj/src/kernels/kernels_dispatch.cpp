#include <atomic>
#include <cstdlib>
#include <vector>

#include "kernels_internal.hpp"

namespace itere::kernels {

#ifndef ITERE_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(ITERE_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const std::vector<const KernelTable*>& tables() {
  static const std::vector<const KernelTable*> list = [] {
    std::vector<const KernelTable*> out{&scalar_table()};
    if (cpu_has_avx2()) {
      if (auto* t = avx2_table()) out.push_back(t);
    }
    return out;
  }();
  return list;
}

const KernelTable* find(std::string_view name) {
  for (auto* t : tables()) {
    if (t->name == name) return t;
  }
  return nullptr;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table = [] {
    if (const char* env = std::getenv("ITERE_KERNELS")) {
      if (auto* t = find(env)) return t;
    }
    return tables().back();
  }();
  return table;
}

}  // namespace

std::span<const KernelTable* const> available() { return tables(); }

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
  auto* t = find(name);
  if (!t) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace itere::kernels
