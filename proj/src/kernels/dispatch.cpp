#include "chantop/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace chantop::kern {
namespace {

const Kernels* g_forced = nullptr;

const Kernels* pick_auto() {
  if (cpu_supports_avx2_fma()) {
    if (const Kernels* k = avx2_kernels()) return k;
  }
  return &scalar_kernels();
}

const Kernels* resolve_name(const std::string& name) {
  if (name == "scalar") return &scalar_kernels();
  if (name == "avx2") {
    const Kernels* k = avx2_kernels();
    if (k == nullptr || !cpu_supports_avx2_fma())
      throw std::runtime_error("avx2 kernels unavailable on this machine");
    return k;
  }
  if (name == "auto") return pick_auto();
  throw std::invalid_argument("unknown kernel set: " + name);
}

}  // namespace

bool cpu_supports_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels& active_kernels() {
  if (g_forced != nullptr) return *g_forced;
  static const Kernels* chosen = [] {
    if (const char* env = std::getenv("CHANTOP_KERNELS");
        env != nullptr && *env != '\0')
      return resolve_name(env);
    return pick_auto();
  }();
  return *chosen;
}

void force_kernels(const std::string& name) {
  g_forced = resolve_name(name);
}

std::vector<std::string> available_kernel_names() {
  std::vector<std::string> names{"scalar"};
  if (avx2_kernels() != nullptr && cpu_supports_avx2_fma())
    names.emplace_back("avx2");
  return names;
}

}  // namespace chantop::kern
