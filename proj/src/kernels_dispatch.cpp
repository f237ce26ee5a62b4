#include "dfn/kernels.hpp"

namespace dfn::kern {

// Defined in the per-ISA translation units; null when not compiled in.
const FloatKernels* avx2_kernels_impl();
const FloatKernels* neon_kernels_impl();

const FloatKernels* avx2_kernels() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
#endif
    return avx2_kernels_impl();
}

const FloatKernels* neon_kernels() { return neon_kernels_impl(); }

namespace {
const FloatKernels* g_active = nullptr;

const FloatKernels& pick_best() {
    if (const FloatKernels* k = avx2_kernels()) return *k;
    if (const FloatKernels* k = neon_kernels()) return *k;
    return scalar_kernels();
}
}  // namespace

const FloatKernels& active() {
    if (!g_active) g_active = &pick_best();
    return *g_active;
}

void force_backend(const FloatKernels& k) { g_active = &k; }

}  // namespace dfn::kern
