#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfn {

/// Single-channel 2D raster with physical pixel spacing in millimetres.
template <class T>
struct ImageT {
    int rows = 0;
    int cols = 0;
    std::vector<T> pixels;  // row-major
    double row_spacing_mm = 1.0;
    double col_spacing_mm = 1.0;

    ImageT() = default;
    ImageT(int m, int n, double row_mm = 1.0, double col_mm = 1.0)
        : rows(m), cols(n), pixels(static_cast<std::size_t>(m) * n, T(0)),
          row_spacing_mm(row_mm), col_spacing_mm(col_mm) {
        if (m < 1 || n < 1) throw std::invalid_argument("Image: dims must be >= 1");
        if (row_mm <= 0.0 || col_mm <= 0.0)
            throw std::invalid_argument("Image: spacing must be positive");
    }

    T& at(int m, int n) { return pixels[static_cast<std::size_t>(m) * cols + n]; }
    T at(int m, int n) const { return pixels[static_cast<std::size_t>(m) * cols + n]; }

    template <class U>
    ImageT<U> cast() const {
        ImageT<U> out(rows, cols, row_spacing_mm, col_spacing_mm);
        for (std::size_t i = 0; i < pixels.size(); ++i) out.pixels[i] = static_cast<U>(pixels[i]);
        return out;
    }
};

using Image = ImageT<float>;

/// Per-pixel probability vector over class_count classes. Class 0 is the
/// object of interest in binary maps.
template <class T>
struct LabelMapT {
    int rows = 0;
    int cols = 0;
    int class_count = 0;
    std::vector<T> probs;  // row-major, classes innermost

    LabelMapT() = default;
    LabelMapT(int m, int n, int c)
        : rows(m), cols(n), class_count(c),
          probs(static_cast<std::size_t>(m) * n * c, T(0)) {
        if (m < 1 || n < 1 || c < 1) throw std::invalid_argument("LabelMap: dims must be >= 1");
    }

    T* pixel(int m, int n) {
        return probs.data() + (static_cast<std::size_t>(m) * cols + n) * class_count;
    }
    const T* pixel(int m, int n) const {
        return probs.data() + (static_cast<std::size_t>(m) * cols + n) * class_count;
    }
    T at(int m, int n, int c) const { return pixel(m, n)[c]; }
    T& at(int m, int n, int c) { return pixel(m, n)[c]; }

    /// Every pixel's class vector must be nonnegative and sum to 1 within tol.
    void validate(double tol = 1e-5, const std::string& what = "LabelMap") const {
        for (int m = 0; m < rows; ++m) {
            for (int n = 0; n < cols; ++n) {
                const T* p = pixel(m, n);
                double sum = 0.0;
                for (int c = 0; c < class_count; ++c) {
                    if (p[c] < T(0))
                        throw std::invalid_argument(what + ": negative probability at pixel (" +
                                                    std::to_string(m) + "," + std::to_string(n) +
                                                    ")");
                    sum += static_cast<double>(p[c]);
                }
                if (std::abs(sum - 1.0) > tol)
                    throw std::invalid_argument(what + ": class vector at pixel (" +
                                                std::to_string(m) + "," + std::to_string(n) +
                                                ") sums to " + std::to_string(sum));
            }
        }
    }

    /// Hard label raster by argmax; ties go to the lowest class index.
    std::vector<int> argmax() const {
        std::vector<int> out(static_cast<std::size_t>(rows) * cols, 0);
        for (int m = 0; m < rows; ++m) {
            for (int n = 0; n < cols; ++n) {
                const T* p = pixel(m, n);
                int best = 0;
                for (int c = 1; c < class_count; ++c)
                    if (p[c] > p[best]) best = c;
                out[static_cast<std::size_t>(m) * cols + n] = best;
            }
        }
        return out;
    }

    template <class U>
    LabelMapT<U> cast() const {
        LabelMapT<U> out(rows, cols, class_count);
        for (std::size_t i = 0; i < probs.size(); ++i) out.probs[i] = static_cast<U>(probs[i]);
        return out;
    }
};

using LabelMap = LabelMapT<float>;

/// One warped atlas: an image registered to some target plus its label map.
template <class T>
struct AtlasPairT {
    ImageT<T> image;
    LabelMapT<T> label;
};

using AtlasPair = AtlasPairT<float>;
using AtlasSet = std::vector<AtlasPair>;

}  // namespace dfn
