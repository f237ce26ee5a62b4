#include "dfn/kernels.hpp"

namespace dfn::kern {

namespace {

float dot_s(const float* a, const float* b, std::size_t n) { return dot_ref(a, b, n); }
float sqdist_s(const float* a, const float* b, std::size_t n) { return sqdist_ref(a, b, n); }
void axpy_s(float alpha, const float* x, float* y, std::size_t n) { axpy_ref(alpha, x, y, n); }
void axpy_diff_s(float alpha, const float* a, const float* b, float* out, std::size_t n) {
    axpy_diff_ref(alpha, a, b, out, n);
}
void relu_s(const float* x, float* y, std::size_t n) { relu_ref(x, y, n); }
void relu_bwd_s(const float* x, const float* g, float* y, std::size_t n) {
    relu_bwd_ref(x, g, y, n);
}

}  // namespace

const FloatKernels& scalar_kernels() {
    static const FloatKernels k = {"scalar", dot_s,  sqdist_s,  axpy_s,
                                   axpy_diff_s, relu_s, relu_bwd_s};
    return k;
}

}  // namespace dfn::kern
