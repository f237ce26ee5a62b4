#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfn/kernels.hpp"
#include "dfn/tensor.hpp"

namespace dfn {

/// One convolution layer: out_maps filters of width x width x in_maps plus a
/// bias per output map. Filters are stored [out][fy][fx][in], so one filter
/// row spans width * in_maps contiguous values, matching the tensor layout.
///
/// "Convolution" here is cross-correlation (no filter flip). The filters are
/// learned, so the choice only fixes a convention; it is the one every test
/// and checkpoint in this project assumes.
template <class T>
struct ConvLayerT {
    int out_maps = 0;
    int in_maps = 0;
    int width = 0;  // odd filter width
    std::vector<T> filters;  // out_maps * width * width * in_maps
    std::vector<T> biases;   // out_maps

    ConvLayerT() = default;
    ConvLayerT(int out, int in, int w)
        : out_maps(out), in_maps(in), width(w),
          filters(static_cast<std::size_t>(out) * w * w * in, T(0)),
          biases(static_cast<std::size_t>(out), T(0)) {
        if (w < 1 || w % 2 == 0)
            throw std::invalid_argument("ConvLayer: filter width must be odd and >= 1, got " +
                                        std::to_string(w));
        if (out < 1 || in < 1)
            throw std::invalid_argument("ConvLayer: map counts must be >= 1");
    }

    std::size_t filter_size() const {
        return static_cast<std::size_t>(width) * width * in_maps;
    }
    T* filter(int d) { return filters.data() + static_cast<std::size_t>(d) * filter_size(); }
    const T* filter(int d) const {
        return filters.data() + static_cast<std::size_t>(d) * filter_size();
    }
    /// Row fy of filter d: width * in_maps contiguous values.
    const T* filter_row(int d, int fy) const {
        return filter(d) + static_cast<std::size_t>(fy) * width * in_maps;
    }
    T* filter_row(int d, int fy) {
        return filter(d) + static_cast<std::size_t>(fy) * width * in_maps;
    }

    template <class U>
    ConvLayerT<U> cast() const {
        ConvLayerT<U> out(out_maps, in_maps, width);
        for (std::size_t i = 0; i < filters.size(); ++i)
            out.filters[i] = static_cast<U>(filters[i]);
        for (std::size_t i = 0; i < biases.size(); ++i)
            out.biases[i] = static_cast<U>(biases[i]);
        return out;
    }
};

using ConvLayer = ConvLayerT<float>;

template <class T>
struct ConvGradT {
    std::vector<T> filters;
    std::vector<T> biases;
};

namespace detail {
template <class T>
void check_conv_input(const Tensor3T<T>& in, const ConvLayerT<T>& layer) {
    if (in.depth != layer.in_maps)
        throw std::invalid_argument("conv: input depth " + std::to_string(in.depth) +
                                    " != layer in_maps " + std::to_string(layer.in_maps));
    if (in.rows < layer.width || in.cols < layer.width)
        throw std::invalid_argument("conv: input " + std::to_string(in.rows) + "x" +
                                    std::to_string(in.cols) + " smaller than filter width " +
                                    std::to_string(layer.width));
}
}  // namespace detail

/// Valid cross-correlation plus bias; no activation.
/// Output dims: (rows - width + 1, cols - width + 1, out_maps).
template <class T>
Tensor3T<T> conv_forward(const Tensor3T<T>& in, const ConvLayerT<T>& layer) {
    detail::check_conv_input(in, layer);
    const int om = in.rows - layer.width + 1;
    const int on = in.cols - layer.width + 1;
    const std::size_t row_span = static_cast<std::size_t>(layer.width) * layer.in_maps;

    Tensor3T<T> out(om, on, layer.out_maps);
    for (int m = 0; m < om; ++m) {
        for (int n = 0; n < on; ++n) {
            T* op = out.pixel(m, n);
            for (int d = 0; d < layer.out_maps; ++d) {
                T acc = layer.biases[static_cast<std::size_t>(d)];
                for (int fy = 0; fy < layer.width; ++fy)
                    acc += kern::dot(in.pixel(m + fy, n), layer.filter_row(d, fy), row_span);
                op[d] = acc;
            }
        }
    }
    return out;
}

/// Reverse-mode gradients through conv_forward for upstream gradient grad_out.
template <class T>
void conv_backward(const Tensor3T<T>& in, const ConvLayerT<T>& layer,
                   const Tensor3T<T>& grad_out, Tensor3T<T>* grad_in,
                   ConvGradT<T>* grad_layer) {
    detail::check_conv_input(in, layer);
    const int om = in.rows - layer.width + 1;
    const int on = in.cols - layer.width + 1;
    if (grad_out.rows != om || grad_out.cols != on || grad_out.depth != layer.out_maps)
        throw std::invalid_argument("conv_backward: grad_out dims " +
                                    std::to_string(grad_out.rows) + "x" +
                                    std::to_string(grad_out.cols) + "x" +
                                    std::to_string(grad_out.depth) + " do not match output");

    const std::size_t row_span = static_cast<std::size_t>(layer.width) * layer.in_maps;
    if (grad_in) *grad_in = Tensor3T<T>(in.rows, in.cols, in.depth);
    if (grad_layer) {
        grad_layer->filters.assign(layer.filters.size(), T(0));
        grad_layer->biases.assign(layer.biases.size(), T(0));
    }

    for (int m = 0; m < om; ++m) {
        for (int n = 0; n < on; ++n) {
            const T* gp = grad_out.pixel(m, n);
            for (int d = 0; d < layer.out_maps; ++d) {
                const T g = gp[d];
                if (g == T(0)) continue;
                if (grad_layer) {
                    grad_layer->biases[static_cast<std::size_t>(d)] += g;
                    T* gf = grad_layer->filters.data() +
                            static_cast<std::size_t>(d) * layer.filter_size();
                    for (int fy = 0; fy < layer.width; ++fy)
                        kern::axpy(g, in.pixel(m + fy, n),
                                   gf + static_cast<std::size_t>(fy) * row_span, row_span);
                }
                if (grad_in) {
                    for (int fy = 0; fy < layer.width; ++fy)
                        kern::axpy(g, layer.filter_row(d, fy), grad_in->pixel(m + fy, n),
                                   row_span);
                }
            }
        }
    }
}

template <class T>
Tensor3T<T> relu_forward(const Tensor3T<T>& in) {
    Tensor3T<T> out(in.rows, in.cols, in.depth);
    kern::relu(in.data.data(), out.data.data(), in.size());
    return out;
}

template <class T>
Tensor3T<T> relu_backward(const Tensor3T<T>& in, const Tensor3T<T>& grad_out) {
    if (!in.same_shape(grad_out))
        throw std::invalid_argument("relu_backward: shape mismatch");
    Tensor3T<T> out(in.rows, in.cols, in.depth);
    kern::relu_bwd(in.data.data(), grad_out.data.data(), out.data.data(), in.size());
    return out;
}

template <class T>
Tensor3T<T> sigmoid_forward(const Tensor3T<T>& in) {
    Tensor3T<T> out(in.rows, in.cols, in.depth);
    for (std::size_t i = 0; i < in.size(); ++i)
        out.data[i] = T(1) / (T(1) + std::exp(-in.data[i]));
    return out;
}

/// Takes the forward *output*, as sigmoid' = out * (1 - out).
template <class T>
Tensor3T<T> sigmoid_backward(const Tensor3T<T>& out, const Tensor3T<T>& grad_out) {
    if (!out.same_shape(grad_out))
        throw std::invalid_argument("sigmoid_backward: shape mismatch");
    Tensor3T<T> g(out.rows, out.cols, out.depth);
    for (std::size_t i = 0; i < out.size(); ++i)
        g.data[i] = grad_out.data[i] * out.data[i] * (T(1) - out.data[i]);
    return g;
}

}  // namespace dfn
