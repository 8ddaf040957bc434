#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace chantop::kern {

// Numeric hot loops used by the embedding stage. Every entry has a scalar
// reference implementation; vectorized variants must agree with it to
// floating-point round-off and are selected once at startup based on the CPU.
struct Kernels {
  const char* isa;

  // Dense pairwise squared Euclidean distances for row-major x (n x d).
  // out is n x n, symmetric, zero diagonal.
  void (*pairwise_sq_dists)(const double* x, std::size_t n, std::size_t d,
                            double* out);

  // Student-t kernel weights w_ij = 1 / (1 + |y_i - y_j|^2) for a 2-D point
  // set stored as separate coordinate planes. Diagonal is set to zero.
  // Returns the sum of all off-diagonal weights.
  double (*studentt_weights)(const double* y0, const double* y1,
                             std::size_t n, double* w);

  // Gradient of the Kullback-Leibler objective:
  //   g_i = 4 * sum_j (p_ij - w_ij / sum_w) * w_ij * (y_i - y_j)
  // p and w are n x n with zero diagonals; output planes g0/g1 are length n.
  void (*kl_gradient)(const double* p, const double* w, double sum_w,
                      const double* y0, const double* y1, std::size_t n,
                      double* g0, double* g1);

  // KL divergence sum_{i != j} p_ij * log(p_ij / (w_ij / sum_w)) with the
  // customary epsilon guards against log(0).
  double (*kl_divergence)(const double* p, const double* w, double sum_w,
                          std::size_t n);
};

// Reference implementation; always available.
const Kernels& scalar_kernels();

// AVX2+FMA implementation, or nullptr when the binary was built without
// x86 support. Callers must check cpu_supports_avx2_fma() before use.
const Kernels* avx2_kernels();

bool cpu_supports_avx2_fma();

// Active set: picked on first use from the CPU, overridable through the
// CHANTOP_KERNELS environment variable or force_kernels(). Valid names:
// "scalar", "avx2", "auto".
const Kernels& active_kernels();
void force_kernels(const std::string& name);  // throws on unknown/unsupported
std::vector<std::string> available_kernel_names();

}  // namespace chantop::kern
