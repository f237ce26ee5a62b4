#pragma once

#include <cstddef>
#include <string>

namespace dfn::kern {

// ---------------------------------------------------------------------------
// Scalar reference kernels. These are the semantic ground truth: every SIMD
// variant must agree with them to float rounding. The double instantiations
// are also the production path for gradient-check mode.
// ---------------------------------------------------------------------------

template <class T>
inline T dot_ref(const T* a, const T* b, std::size_t n) {
    T acc = T(0);
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

/// Sum of squared differences.
template <class T>
inline T sqdist_ref(const T* a, const T* b, std::size_t n) {
    T acc = T(0);
    for (std::size_t i = 0; i < n; ++i) {
        T d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

/// y += alpha * x
template <class T>
inline void axpy_ref(T alpha, const T* x, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

/// out += alpha * (a - b)
template <class T>
inline void axpy_diff_ref(T alpha, const T* a, const T* b, T* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += alpha * (a[i] - b[i]);
}

/// y = max(0, x)
template <class T>
inline void relu_ref(const T* x, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

/// y = x > 0 ? g : 0   (subgradient at 0 is 0)
template <class T>
inline void relu_bwd_ref(const T* x, const T* g, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? g[i] : T(0);
}

// ---------------------------------------------------------------------------
// Runtime-dispatched float kernels. One table per backend; active() picks the
// best supported backend once and the hot loops call through it. Results may
// differ from the scalar table by accumulation order only.
// ---------------------------------------------------------------------------

struct FloatKernels {
    const char* name;
    float (*dot)(const float*, const float*, std::size_t);
    float (*sqdist)(const float*, const float*, std::size_t);
    void (*axpy)(float, const float*, float*, std::size_t);
    void (*axpy_diff)(float, const float*, const float*, float*, std::size_t);
    void (*relu)(const float*, float*, std::size_t);
    void (*relu_bwd)(const float*, const float*, float*, std::size_t);
};

const FloatKernels& scalar_kernels();

/// Null when the binary was built without the variant or the CPU lacks it.
const FloatKernels* avx2_kernels();
const FloatKernels* neon_kernels();

/// Best backend available at runtime (AVX2/NEON when present, else scalar).
const FloatKernels& active();

/// Override the active backend; used by equivalence tests and benchmarks.
void force_backend(const FloatKernels& k);

// Dispatching wrappers so templated numeric code routes float through the
// active backend and every other type through the scalar reference.

template <class T>
inline T dot(const T* a, const T* b, std::size_t n) { return dot_ref(a, b, n); }
template <>
inline float dot<float>(const float* a, const float* b, std::size_t n) {
    return active().dot(a, b, n);
}

template <class T>
inline T sqdist(const T* a, const T* b, std::size_t n) { return sqdist_ref(a, b, n); }
template <>
inline float sqdist<float>(const float* a, const float* b, std::size_t n) {
    return active().sqdist(a, b, n);
}

template <class T>
inline void axpy(T alpha, const T* x, T* y, std::size_t n) { axpy_ref(alpha, x, y, n); }
template <>
inline void axpy<float>(float alpha, const float* x, float* y, std::size_t n) {
    active().axpy(alpha, x, y, n);
}

template <class T>
inline void axpy_diff(T alpha, const T* a, const T* b, T* out, std::size_t n) {
    axpy_diff_ref(alpha, a, b, out, n);
}
template <>
inline void axpy_diff<float>(float alpha, const float* a, const float* b, float* out,
                             std::size_t n) {
    active().axpy_diff(alpha, a, b, out, n);
}

template <class T>
inline void relu(const T* x, T* y, std::size_t n) { relu_ref(x, y, n); }
template <>
inline void relu<float>(const float* x, float* y, std::size_t n) {
    active().relu(x, y, n);
}

template <class T>
inline void relu_bwd(const T* x, const T* g, T* y, std::size_t n) { relu_bwd_ref(x, g, y, n); }
template <>
inline void relu_bwd<float>(const float* x, const float* g, float* y, std::size_t n) {
    active().relu_bwd(x, g, y, n);
}

}  // namespace dfn::kern
