// NEON variants of the float kernels for aarch64 builds.

#include "dfn/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

namespace dfn::kern {

namespace {

float dot_neon(const float* a, const float* b, std::size_t n) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = vfmaq_f32(acc, vld1q_f32(a + i), vld1q_f32(b + i));
    float s = vaddvq_f32(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

float sqdist_neon(const float* a, const float* b, std::size_t n) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t d = vsubq_f32(vld1q_f32(a + i), vld1q_f32(b + i));
        acc = vfmaq_f32(acc, d, d);
    }
    float s = vaddvq_f32(acc);
    for (; i < n; ++i) {
        float d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy_neon(float alpha, const float* x, float* y, std::size_t n) {
    float32x4_t va = vdupq_n_f32(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), va, vld1q_f32(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_diff_neon(float alpha, const float* a, const float* b, float* out, std::size_t n) {
    float32x4_t va = vdupq_n_f32(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t d = vsubq_f32(vld1q_f32(a + i), vld1q_f32(b + i));
        vst1q_f32(out + i, vfmaq_f32(vld1q_f32(out + i), va, d));
    }
    for (; i < n; ++i) out[i] += alpha * (a[i] - b[i]);
}

void relu_neon(const float* x, float* y, std::size_t n) {
    float32x4_t zero = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vmaxq_f32(vld1q_f32(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_bwd_neon(const float* x, const float* g, float* y, std::size_t n) {
    float32x4_t zero = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        uint32x4_t mask = vcgtq_f32(vld1q_f32(x + i), zero);
        float32x4_t vg = vld1q_f32(g + i);
        vst1q_f32(y + i, vreinterpretq_f32_u32(
                             vandq_u32(vreinterpretq_u32_f32(vg), mask)));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? g[i] : 0.0f;
}

}  // namespace

const FloatKernels* neon_kernels_impl() {
    static const FloatKernels k = {"neon",         dot_neon,  sqdist_neon, axpy_neon,
                                   axpy_diff_neon, relu_neon, relu_bwd_neon};
    return &k;
}

}  // namespace dfn::kern

#else

namespace dfn::kern {
const FloatKernels* neon_kernels_impl() { return nullptr; }
}  // namespace dfn::kern

#endif
