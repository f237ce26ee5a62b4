#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfn {

/// Dense rank-3 tensor, row-major with the channel index innermost:
/// element (m, n, d) lives at data[(m * cols + n) * depth + d].
/// Feature maps, label maps and filter planes all use this layout, so
/// per-pixel channel vectors are contiguous.
template <class T>
struct Tensor3T {
    int rows = 0;
    int cols = 0;
    int depth = 0;
    std::vector<T> data;

    Tensor3T() = default;

    Tensor3T(int m, int n, int d, T fill = T(0))
        : rows(m), cols(n), depth(d),
          data(static_cast<std::size_t>(check_dims(m, n, d)) , fill) {}

    static std::size_t check_dims(int m, int n, int d) {
        if (m < 1 || n < 1 || d < 1)
            throw std::invalid_argument("Tensor3: dims must be >= 1, got " +
                                        std::to_string(m) + "x" + std::to_string(n) +
                                        "x" + std::to_string(d));
        return static_cast<std::size_t>(m) * n * d;
    }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor3T& o) const {
        return rows == o.rows && cols == o.cols && depth == o.depth;
    }

    T& at(int m, int n, int d) {
        return data[(static_cast<std::size_t>(m) * cols + n) * depth + d];
    }
    T at(int m, int n, int d) const {
        return data[(static_cast<std::size_t>(m) * cols + n) * depth + d];
    }

    /// Pointer to the contiguous channel vector of pixel (m, n).
    T* pixel(int m, int n) {
        return data.data() + (static_cast<std::size_t>(m) * cols + n) * depth;
    }
    const T* pixel(int m, int n) const {
        return data.data() + (static_cast<std::size_t>(m) * cols + n) * depth;
    }

    template <class U>
    Tensor3T<U> cast() const {
        Tensor3T<U> out(rows, cols, depth);
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

using Tensor3 = Tensor3T<float>;
using Tensor3d = Tensor3T<double>;

/// On-disk raster/weight container ("DFNT"): magic "DFNT", u32 LE version (=1),
/// u32 LE rank, rank x u32 LE dims, then float32 LE values row-major.
namespace dfnt {

struct File {
    std::vector<unsigned> dims;
    std::vector<float> values;
};

void write(const std::string& path, const std::vector<unsigned>& dims,
           const float* values, std::size_t count);
File read(const std::string& path);

void write_tensor3(const std::string& path, const Tensor3& t);
Tensor3 read_tensor3(const std::string& path);

void write_raster(const std::string& path, int rows, int cols, const float* values);

}  // namespace dfnt

}  // namespace dfn
