#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfn/conv.hpp"
#include "dfn/image.hpp"
#include "dfn/rng.hpp"
#include "dfn/tensor.hpp"

namespace dfn {

/// Feature extraction subnet: a depth-consistent stack of (conv, ReLU) blocks
/// with a single sigmoid on top. The same parameter object is applied to the
/// target and to every warped atlas image; no per-image parameters exist.
template <class T>
struct FeatureNetParamsT {
    std::vector<ConvLayerT<T>> layers;
    bool final_sigmoid = true;  // ablation knob; on by default

    void validate() const {
        if (layers.empty()) throw std::invalid_argument("FeatureNetParams: no layers");
        if (layers.front().in_maps != 1)
            throw std::invalid_argument("FeatureNetParams: first layer must take 1 input map");
        for (std::size_t l = 1; l < layers.size(); ++l) {
            if (layers[l].in_maps != layers[l - 1].out_maps)
                throw std::invalid_argument(
                    "FeatureNetParams: layer " + std::to_string(l) + " expects " +
                    std::to_string(layers[l].in_maps) + " input maps but layer " +
                    std::to_string(l - 1) + " emits " + std::to_string(layers[l - 1].out_maps));
        }
    }

    /// Pixels cropped per side by the valid convolutions: sum of (width-1)/2.
    int margin() const {
        int m = 0;
        for (const auto& l : layers) m += (l.width - 1) / 2;
        return m;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.filters.size() + l.biases.size();
        return n;
    }

    template <class U>
    FeatureNetParamsT<U> cast() const {
        FeatureNetParamsT<U> out;
        out.final_sigmoid = final_sigmoid;
        for (const auto& l : layers) out.layers.push_back(l.template cast<U>());
        return out;
    }
};

using FeatureNetParams = FeatureNetParamsT<float>;

/// Build a net from output-map counts and one shared filter width.
/// Filters start uniform in +-sqrt(6 / (fan_in + fan_out)), biases at zero.
template <class T>
FeatureNetParamsT<T> make_feature_net(const std::vector<int>& out_maps, int filter_width,
                                      Rng& rng, bool final_sigmoid = true) {
    FeatureNetParamsT<T> params;
    params.final_sigmoid = final_sigmoid;
    int in = 1;
    for (int out : out_maps) {
        ConvLayerT<T> layer(out, in, filter_width);
        const double fan_in = static_cast<double>(filter_width) * filter_width * in;
        const double fan_out = static_cast<double>(filter_width) * filter_width * out;
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (auto& w : layer.filters) w = static_cast<T>(rng.uniform(-bound, bound));
        params.layers.push_back(std::move(layer));
        in = out;
    }
    params.validate();
    return params;
}

/// Dense features on the valid-convolution interior of the source image.
/// margin records how many pixels were cropped per side.
template <class T>
struct FeatureMapT {
    Tensor3T<T> tensor;
    int margin = 0;
};

using FeatureMap = FeatureMapT<float>;

/// Linear rescale to [0, 1] by the image's own min/max; a constant image maps
/// to all zeros.
template <class T>
Tensor3T<T> normalize_intensity(const ImageT<T>& image) {
    Tensor3T<T> t(image.rows, image.cols, 1);
    T lo = image.pixels[0], hi = image.pixels[0];
    for (T v : image.pixels) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const T range = hi - lo;
    for (std::size_t i = 0; i < image.pixels.size(); ++i)
        t.data[i] = range > T(0) ? (image.pixels[i] - lo) / range : T(0);
    return t;
}

/// Per-layer intermediates kept so the backward pass can be replayed without
/// recomputing the forward chain.
template <class T>
struct FeatureNetTraceT {
    std::vector<Tensor3T<T>> inputs;          // input to each conv layer
    std::vector<Tensor3T<T>> pre_activation;  // conv output before ReLU
    Tensor3T<T> features;                     // final output (post sigmoid if enabled)
};

template <class T>
FeatureMapT<T> extract_with_trace(const FeatureNetParamsT<T>& params, const ImageT<T>& image,
                                  FeatureNetTraceT<T>* trace) {
    params.validate();
    Tensor3T<T> x = normalize_intensity(image);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        if (x.rows < layer.width || x.cols < layer.width)
            throw std::invalid_argument("extract: image too small, layer " + std::to_string(l) +
                                        " needs at least " + std::to_string(layer.width) + "x" +
                                        std::to_string(layer.width) + " but got " +
                                        std::to_string(x.rows) + "x" + std::to_string(x.cols));
        if (trace) trace->inputs.push_back(x);
        Tensor3T<T> z = conv_forward(x, layer);
        if (trace) trace->pre_activation.push_back(z);
        x = relu_forward(z);
    }
    if (params.final_sigmoid) x = sigmoid_forward(x);
    if (trace) trace->features = x;
    return {std::move(x), params.margin()};
}

/// Forward pass: conv + ReLU per layer, one sigmoid at the end. All outputs
/// lie in [0.5, 1) because the sigmoid sees nonnegative inputs.
template <class T>
FeatureMapT<T> extract(const FeatureNetParamsT<T>& params, const ImageT<T>& image) {
    return extract_with_trace<T>(params, image, nullptr);
}

/// Per-layer parameter gradients, same shapes as FeatureNetParams.
template <class T>
struct NetGradT {
    std::vector<ConvGradT<T>> layers;

    static NetGradT zeros_like(const FeatureNetParamsT<T>& params) {
        NetGradT g;
        for (const auto& l : params.layers) {
            ConvGradT<T> cg;
            cg.filters.assign(l.filters.size(), T(0));
            cg.biases.assign(l.biases.size(), T(0));
            g.layers.push_back(std::move(cg));
        }
        return g;
    }

    void accumulate(const NetGradT& other) {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            kern::axpy(T(1), other.layers[l].filters.data(), layers[l].filters.data(),
                       layers[l].filters.size());
            kern::axpy(T(1), other.layers[l].biases.data(), layers[l].biases.data(),
                       layers[l].biases.size());
        }
    }
};

using NetGrad = NetGradT<float>;

/// Backward through the trace: accumulates filter/bias gradients into *grad.
/// Images are data, not parameters, so no image gradient is returned.
template <class T>
void extract_backward_from_trace(const FeatureNetParamsT<T>& params,
                                 const FeatureNetTraceT<T>& trace,
                                 const Tensor3T<T>& grad_features, NetGradT<T>* grad) {
    if (!grad_features.same_shape(trace.features))
        throw std::invalid_argument("extract_backward: grad_features dims do not match output");
    Tensor3T<T> g = params.final_sigmoid ? sigmoid_backward(trace.features, grad_features)
                                         : grad_features;
    for (std::size_t l = params.layers.size(); l-- > 0;) {
        Tensor3T<T> gz = relu_backward(trace.pre_activation[l], g);
        ConvGradT<T> layer_grad;
        Tensor3T<T> gin;
        conv_backward(trace.inputs[l], params.layers[l], gz, l > 0 ? &gin : nullptr,
                      &layer_grad);
        kern::axpy(T(1), layer_grad.filters.data(), grad->layers[l].filters.data(),
                   layer_grad.filters.size());
        kern::axpy(T(1), layer_grad.biases.data(), grad->layers[l].biases.data(),
                   layer_grad.biases.size());
        g = std::move(gin);
    }
}

/// Standalone form: reruns the forward chain to rebuild intermediates.
template <class T>
NetGradT<T> extract_backward(const FeatureNetParamsT<T>& params, const ImageT<T>& image,
                             const Tensor3T<T>& grad_features) {
    FeatureNetTraceT<T> trace;
    extract_with_trace(params, image, &trace);
    NetGradT<T> grad = NetGradT<T>::zeros_like(params);
    extract_backward_from_trace(params, trace, grad_features, &grad);
    return grad;
}

/// Remove margin pixels from each side of a label map.
template <class T>
LabelMapT<T> crop_to_margin(const LabelMapT<T>& label, int margin) {
    if (margin < 0) throw std::invalid_argument("crop_to_margin: negative margin");
    if (margin == 0) return label;
    if (label.rows <= 2 * margin || label.cols <= 2 * margin)
        throw std::invalid_argument("crop_to_margin: margin " + std::to_string(margin) +
                                    " too large for " + std::to_string(label.rows) + "x" +
                                    std::to_string(label.cols) + " map");
    LabelMapT<T> out(label.rows - 2 * margin, label.cols - 2 * margin, label.class_count);
    for (int m = 0; m < out.rows; ++m)
        for (int n = 0; n < out.cols; ++n)
            std::copy_n(label.pixel(m + margin, n + margin), label.class_count,
                        out.pixel(m, n));
    return out;
}

/// Inverse of the crop for presentation: paste the interior prediction back
/// into a full-size map, filling the border band by nearest-interior
/// replication.
template <class T>
LabelMapT<T> paste_with_border_replication(const LabelMapT<T>& interior, int margin,
                                           int full_rows, int full_cols) {
    if (interior.rows + 2 * margin != full_rows || interior.cols + 2 * margin != full_cols)
        throw std::invalid_argument("paste_with_border_replication: dims do not match");
    LabelMapT<T> out(full_rows, full_cols, interior.class_count);
    for (int m = 0; m < full_rows; ++m) {
        const int im = std::clamp(m - margin, 0, interior.rows - 1);
        for (int n = 0; n < full_cols; ++n) {
            const int in = std::clamp(n - margin, 0, interior.cols - 1);
            std::copy_n(interior.pixel(im, in), interior.class_count, out.pixel(m, n));
        }
    }
    return out;
}

}  // namespace dfn
