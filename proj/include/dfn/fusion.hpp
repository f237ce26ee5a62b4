#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dfn/image.hpp"
#include "dfn/net.hpp"
#include "dfn/tensor.hpp"

namespace dfn {

/// Square search window of half-width t: shift vectors (u, v) with
/// -t <= u, v <= t, enumerated row-major so index s <-> (u, v) is fixed.
struct SearchWindow {
    int half_width = 0;

    explicit SearchWindow(int t = 0) : half_width(t) {
        if (t < 0) throw std::invalid_argument("SearchWindow: half-width must be >= 0");
    }

    int side() const { return 2 * half_width + 1; }
    int count() const { return side() * side(); }

    std::pair<int, int> shift_at(int s) const {
        return {s / side() - half_width, s % side() - half_width};
    }

    /// A shifted read at target pixel (m, n) sources (m-u, n-v); it is valid
    /// only when that source lies inside the map.
    static bool shift_valid(int m, int n, int u, int v, int rows, int cols) {
        const int sm = m - u, sn = n - v;
        return sm >= 0 && sm < rows && sn >= 0 && sn < cols;
    }
};

/// Spatially shifted copy: output at p equals input at p - alpha. Positions
/// whose source falls outside the map are zero-filled and flagged invalid;
/// downstream layers exclude them rather than treating the zeros as data.
template <class T>
struct ShiftResultT {
    Tensor3T<T> values;
    std::vector<std::uint8_t> valid;  // rows*cols, 1 = in bounds
};

template <class T>
ShiftResultT<T> shift(const Tensor3T<T>& in, int u, int v) {
    ShiftResultT<T> out;
    out.values = Tensor3T<T>(in.rows, in.cols, in.depth);
    out.valid.assign(static_cast<std::size_t>(in.rows) * in.cols, 0);
    for (int m = 0; m < in.rows; ++m) {
        for (int n = 0; n < in.cols; ++n) {
            if (!SearchWindow::shift_valid(m, n, u, v, in.rows, in.cols)) continue;
            out.valid[static_cast<std::size_t>(m) * in.cols + n] = 1;
            const T* src = in.pixel(m - u, n - v);
            T* dst = out.values.pixel(m, n);
            for (int d = 0; d < in.depth; ++d) dst[d] = src[d];
        }
    }
    return out;
}

/// Squared feature distances per (pixel, shift); invalid candidates carry
/// +infinity so they contribute exactly zero weight after the softmax.
template <class T>
struct DistanceFieldT {
    int rows = 0, cols = 0;
    SearchWindow window{0};
    std::vector<T> d;  // rows*cols*window.count(), shift innermost

    T at(int m, int n, int s) const {
        return d[(static_cast<std::size_t>(m) * cols + n) * window.count() + s];
    }
};

template <class T>
DistanceFieldT<T> distance_field(const FeatureMapT<T>& f_target, const FeatureMapT<T>& f_atlas,
                                 const SearchWindow& window) {
    const Tensor3T<T>& ft = f_target.tensor;
    const Tensor3T<T>& fa = f_atlas.tensor;
    if (!ft.same_shape(fa))
        throw std::invalid_argument("distance_field: feature maps must have equal dims");

    const int S = window.count();
    DistanceFieldT<T> out;
    out.rows = ft.rows;
    out.cols = ft.cols;
    out.window = window;
    out.d.assign(static_cast<std::size_t>(ft.rows) * ft.cols * S,
                 std::numeric_limits<T>::infinity());

    const std::size_t depth = static_cast<std::size_t>(ft.depth);
    for (int s = 0; s < S; ++s) {
        const auto [u, v] = window.shift_at(s);
        for (int m = 0; m < ft.rows; ++m) {
            for (int n = 0; n < ft.cols; ++n) {
                if (!SearchWindow::shift_valid(m, n, u, v, ft.rows, ft.cols)) continue;
                out.d[(static_cast<std::size_t>(m) * ft.cols + n) * S + s] =
                    kern::sqdist(ft.pixel(m, n), fa.pixel(m - u, n - v), depth);
            }
        }
    }
    return out;
}

/// Fusion weights: joint softmax of -distance over every valid (atlas, shift)
/// candidate of a pixel. Per pixel the valid weights sum to 1; invalid
/// candidates are exactly 0. Stored candidate-contiguous per pixel:
/// w[(pixel)*K*S + atlas*S + shift].
template <class T>
struct WeightFieldT {
    int rows = 0, cols = 0;
    int atlas_count = 0;
    SearchWindow window{0};
    std::vector<T> w;

    std::size_t pixel_offset(int m, int n) const {
        return (static_cast<std::size_t>(m) * cols + n) *
               static_cast<std::size_t>(atlas_count) * window.count();
    }
    T at(int m, int n, int atlas, int s) const {
        return w[pixel_offset(m, n) + static_cast<std::size_t>(atlas) * window.count() + s];
    }
};

template <class T>
WeightFieldT<T> weight_field(const std::vector<DistanceFieldT<T>>& distances) {
    if (distances.empty()) throw std::invalid_argument("weight_field: no atlases");
    const int rows = distances[0].rows, cols = distances[0].cols;
    const SearchWindow window = distances[0].window;
    const int S = window.count();
    const int K = static_cast<int>(distances.size());
    for (const auto& df : distances)
        if (df.rows != rows || df.cols != cols || df.window.half_width != window.half_width)
            throw std::invalid_argument("weight_field: distance fields disagree on shape");

    WeightFieldT<T> out;
    out.rows = rows;
    out.cols = cols;
    out.atlas_count = K;
    out.window = window;
    out.w.assign(static_cast<std::size_t>(rows) * cols * K * S, T(0));

    for (int m = 0; m < rows; ++m) {
        for (int n = 0; n < cols; ++n) {
            const std::size_t pix = (static_cast<std::size_t>(m) * cols + n) * S;
            // Stabilise by the per-pixel minimum distance; the centre shift is
            // always valid so a finite minimum exists.
            T dmin = std::numeric_limits<T>::infinity();
            for (int i = 0; i < K; ++i)
                for (int s = 0; s < S; ++s) dmin = std::min(dmin, distances[i].d[pix + s]);
            double z = 0.0;
            T* wp = out.w.data() + out.pixel_offset(m, n);
            for (int i = 0; i < K; ++i) {
                for (int s = 0; s < S; ++s) {
                    const T d = distances[static_cast<std::size_t>(i)].d[pix + s];
                    if (!std::isinf(d)) {
                        const double e = std::exp(static_cast<double>(dmin) - d);
                        wp[static_cast<std::size_t>(i) * S + s] = static_cast<T>(e);
                        z += e;
                    }
                }
            }
            const T inv = static_cast<T>(1.0 / z);
            for (int c = 0; c < K * S; ++c) wp[c] *= inv;
        }
    }
    return out;
}

/// Fused label estimate on the cropped domain plus the margin separating it
/// from the full-size image.
template <class T>
struct FusedLabelT {
    LabelMapT<T> probs;
    int margin = 0;
};

using FusedLabel = FusedLabelT<float>;

/// Weighted vote: fused(p) = sum over (atlas, shift) of w * label(p - alpha).
/// Labels are passed unshifted on the weight field's domain; the shifted read
/// is applied here with the same validity rule as the distance layer.
template <class T>
LabelMapT<T> vote(const WeightFieldT<T>& weights, const std::vector<LabelMapT<T>>& atlas_labels) {
    if (static_cast<int>(atlas_labels.size()) != weights.atlas_count)
        throw std::invalid_argument("vote: weight field covers " +
                                    std::to_string(weights.atlas_count) + " atlases, got " +
                                    std::to_string(atlas_labels.size()) + " label maps");
    const int C = atlas_labels.empty() ? 0 : atlas_labels[0].class_count;
    for (const auto& l : atlas_labels)
        if (l.rows != weights.rows || l.cols != weights.cols || l.class_count != C)
            throw std::invalid_argument("vote: label map dims do not match weight field");

    const int S = weights.window.count();
    LabelMapT<T> fused(weights.rows, weights.cols, C);
    for (int m = 0; m < weights.rows; ++m) {
        for (int n = 0; n < weights.cols; ++n) {
            T* out = fused.pixel(m, n);
            const T* wp = weights.w.data() + weights.pixel_offset(m, n);
            for (int i = 0; i < weights.atlas_count; ++i) {
                for (int s = 0; s < S; ++s) {
                    const T w = wp[static_cast<std::size_t>(i) * S + s];
                    if (w == T(0)) continue;
                    const auto [u, v] = weights.window.shift_at(s);
                    const T* lp = atlas_labels[static_cast<std::size_t>(i)].pixel(m - u, n - v);
                    for (int c = 0; c < C; ++c) out[c] += w * lp[c];
                }
            }
        }
    }
    return fused;
}

// ---------------------------------------------------------------------------
// Loss layer
// ---------------------------------------------------------------------------

enum class LossKind { L2, L1, Hinge, Dice, Log };

LossKind parse_loss_kind(const std::string& name);
std::string loss_kind_name(LossKind kind);

template <class T>
struct LossResultT {
    double value = 0.0;
    LabelMapT<T> grad;  // d value / d pred
};

/// Mean losses over the prediction domain. P is the pixel count of the
/// (cropped) prediction; L2/L1/Log average over pixels, hinge over pixels and
/// classes, dice is a global overlap ratio.
template <class T>
LossResultT<T> loss(const LabelMapT<T>& pred, const LabelMapT<T>& truth, LossKind kind) {
    if (pred.rows != truth.rows || pred.cols != truth.cols ||
        pred.class_count != truth.class_count)
        throw std::invalid_argument("loss: prediction and truth dims do not match");

    const std::size_t total = pred.probs.size();
    const double P = static_cast<double>(pred.rows) * pred.cols;
    const double PC = P * pred.class_count;

    LossResultT<T> out;
    out.grad = LabelMapT<T>(pred.rows, pred.cols, pred.class_count);
    double acc = 0.0;

    switch (kind) {
        case LossKind::L2:
            for (std::size_t i = 0; i < total; ++i) {
                const double d = static_cast<double>(pred.probs[i]) - truth.probs[i];
                acc += d * d;
                out.grad.probs[i] = static_cast<T>(2.0 / P * d);
            }
            out.value = acc / P;
            break;
        case LossKind::L1:
            for (std::size_t i = 0; i < total; ++i) {
                const double d = static_cast<double>(pred.probs[i]) - truth.probs[i];
                acc += std::abs(d);
                out.grad.probs[i] = static_cast<T>((d > 0.0 ? 1.0 : d < 0.0 ? -1.0 : 0.0) / P);
            }
            out.value = acc / P;
            break;
        case LossKind::Hinge:
            for (std::size_t i = 0; i < total; ++i) {
                const double t = 2.0 * truth.probs[i] - 1.0;
                const double p = 2.0 * pred.probs[i] - 1.0;
                const double m = 1.0 - t * p;
                if (m > 0.0) {
                    acc += m;
                    out.grad.probs[i] = static_cast<T>(-2.0 * t / PC);
                }
            }
            out.value = acc / PC;
            break;
        case LossKind::Dice: {
            // 1 - 2*sum(p*t) / (sum(p^2) + sum(t^2) + eps)
            const double eps = 1e-6;
            double inter = 0.0, norm = eps;
            for (std::size_t i = 0; i < total; ++i) {
                const double p = pred.probs[i], t = truth.probs[i];
                inter += p * t;
                norm += p * p + t * t;
            }
            out.value = 1.0 - 2.0 * inter / norm;
            const double inv2 = 1.0 / (norm * norm);
            for (std::size_t i = 0; i < total; ++i) {
                const double p = pred.probs[i], t = truth.probs[i];
                out.grad.probs[i] = static_cast<T>((-2.0 * t * norm + 4.0 * inter * p) * inv2);
            }
            break;
        }
        case LossKind::Log: {
            const double eps = 1e-7;
            for (std::size_t i = 0; i < total; ++i) {
                const double p = pred.probs[i] + eps;
                const double t = truth.probs[i];
                acc -= t * std::log(p);
                out.grad.probs[i] = static_cast<T>(-t / (p * P));
            }
            out.value = acc / P;
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full fusion chain
// ---------------------------------------------------------------------------

template <class T>
struct FuseResultT {
    FusedLabelT<T> fused;
    double loss_value = 0.0;
    NetGradT<T> grad;  // populated when backward was requested
};

namespace detail {

template <class T>
void check_fusion_inputs(const ImageT<T>& target, const std::vector<AtlasPairT<T>>& atlases) {
    if (atlases.empty()) throw std::invalid_argument("fusion: empty atlas set");
    for (std::size_t i = 0; i < atlases.size(); ++i) {
        const auto& a = atlases[i];
        if (a.image.rows != target.rows || a.image.cols != target.cols)
            throw std::invalid_argument("fusion: atlas " + std::to_string(i) +
                                        " image dims do not match target");
        if (a.label.rows != target.rows || a.label.cols != target.cols)
            throw std::invalid_argument("fusion: atlas " + std::to_string(i) +
                                        " label dims do not match image");
        if (a.label.class_count != atlases[0].label.class_count)
            throw std::invalid_argument("fusion: atlas " + std::to_string(i) +
                                        " class count differs");
    }
}

}  // namespace detail

/// Forward chain: extract features for target and atlases, shift, distance,
/// softmax weights, vote. Label maps are cropped by the net margin so they
/// align with the valid-convolution feature domain.
template <class T>
FusedLabelT<T> fuse_predict(const FeatureNetParamsT<T>& params, const ImageT<T>& target,
                            const std::vector<AtlasPairT<T>>& atlases,
                            const SearchWindow& window) {
    detail::check_fusion_inputs(target, atlases);
    FeatureMapT<T> ft = extract(params, target);
    std::vector<DistanceFieldT<T>> dists;
    std::vector<LabelMapT<T>> labels;
    dists.reserve(atlases.size());
    labels.reserve(atlases.size());
    for (const auto& a : atlases) {
        FeatureMapT<T> fa = extract(params, a.image);
        dists.push_back(distance_field(ft, fa, window));
        labels.push_back(crop_to_margin(a.label, ft.margin));
    }
    WeightFieldT<T> weights = weight_field(dists);
    return {vote(weights, labels), ft.margin};
}

/// Full forward plus hand-derived backward. Accumulates the loss gradient
/// into the shared feature-net parameters through the target branch and every
/// atlas branch. Atlas labels are data; they receive no gradient.
template <class T>
FuseResultT<T> fuse_forward_backward(const FeatureNetParamsT<T>& params, const ImageT<T>& target,
                                     const std::vector<AtlasPairT<T>>& atlases,
                                     const SearchWindow& window, LossKind kind,
                                     const LabelMapT<T>& target_label, bool backward = true) {
    detail::check_fusion_inputs(target, atlases);
    const int K = static_cast<int>(atlases.size());
    const int S = window.count();

    FeatureNetTraceT<T> target_trace;
    FeatureMapT<T> ft = extract_with_trace(params, target, backward ? &target_trace : nullptr);
    const int margin = ft.margin;

    std::vector<FeatureNetTraceT<T>> atlas_traces(backward ? K : 0);
    std::vector<FeatureMapT<T>> fa(K);
    std::vector<DistanceFieldT<T>> dists(K);
    std::vector<LabelMapT<T>> labels(K);
    for (int i = 0; i < K; ++i) {
        fa[i] = extract_with_trace(params, atlases[i].image,
                                   backward ? &atlas_traces[i] : nullptr);
        dists[i] = distance_field(ft, fa[i], window);
        labels[i] = crop_to_margin(atlases[i].label, margin);
    }
    WeightFieldT<T> weights = weight_field(dists);

    FuseResultT<T> result;
    result.fused = {vote(weights, labels), margin};

    LabelMapT<T> truth = crop_to_margin(target_label, margin);
    LossResultT<T> lr = loss(result.fused.probs, truth, kind);
    result.loss_value = lr.value;
    if (!backward) return result;

    const int rows = weights.rows, cols = weights.cols;
    const int C = truth.class_count;
    const std::size_t depth = static_cast<std::size_t>(ft.tensor.depth);

    // dE/d feature maps, then chain through the shared subnet per branch.
    Tensor3T<T> grad_ft(rows, cols, ft.tensor.depth);
    std::vector<Tensor3T<T>> grad_fa;
    grad_fa.reserve(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) grad_fa.emplace_back(rows, cols, ft.tensor.depth);

    std::vector<double> dE_dD(static_cast<std::size_t>(K) * S);
    for (int m = 0; m < rows; ++m) {
        for (int n = 0; n < cols; ++n) {
            const T* wp = weights.w.data() + weights.pixel_offset(m, n);
            const T* gp = lr.grad.pixel(m, n);

            // Voting layer: dE/dw = <dE/dpred, shifted label>; softmax layer:
            // dE/dD = w * (sum_j w_j v_j - v) with v = dE/dw.
            double wv = 0.0;
            for (int i = 0; i < K; ++i) {
                for (int s = 0; s < S; ++s) {
                    const T w = wp[static_cast<std::size_t>(i) * S + s];
                    if (w == T(0)) {
                        dE_dD[static_cast<std::size_t>(i) * S + s] = 0.0;
                        continue;
                    }
                    const auto [u, v] = window.shift_at(s);
                    const T* lp = labels[static_cast<std::size_t>(i)].pixel(m - u, n - v);
                    double dot = 0.0;
                    for (int c = 0; c < C; ++c) dot += static_cast<double>(gp[c]) * lp[c];
                    dE_dD[static_cast<std::size_t>(i) * S + s] = dot;  // v for now
                    wv += static_cast<double>(w) * dot;
                }
            }
            for (int i = 0; i < K; ++i) {
                for (int s = 0; s < S; ++s) {
                    const T w = wp[static_cast<std::size_t>(i) * S + s];
                    if (w == T(0)) continue;
                    const double dD =
                        static_cast<double>(w) * (wv - dE_dD[static_cast<std::size_t>(i) * S + s]);
                    if (dD == 0.0) continue;
                    const auto [u, v] = window.shift_at(s);
                    const T* ftp = ft.tensor.pixel(m, n);
                    const T* fap = fa[static_cast<std::size_t>(i)].tensor.pixel(m - u, n - v);
                    // Distance layer: dD/df_t = 2 (f_t - f_a), dD/df_a = -2 (f_t - f_a).
                    kern::axpy_diff(static_cast<T>(2.0 * dD), ftp, fap, grad_ft.pixel(m, n),
                                    depth);
                    kern::axpy_diff(static_cast<T>(-2.0 * dD), ftp, fap,
                                    grad_fa[static_cast<std::size_t>(i)].pixel(m - u, n - v),
                                    depth);
                }
            }
        }
    }

    result.grad = NetGradT<T>::zeros_like(params);
    extract_backward_from_trace(params, target_trace, grad_ft, &result.grad);
    for (int i = 0; i < K; ++i)
        extract_backward_from_trace(params, atlas_traces[static_cast<std::size_t>(i)],
                                    grad_fa[static_cast<std::size_t>(i)], &result.grad);
    return result;
}

}  // namespace dfn
