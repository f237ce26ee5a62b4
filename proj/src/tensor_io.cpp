#include "dfn/tensor.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "DFNT I/O assumes a little-endian host");
static_assert(sizeof(float) == 4, "DFNT stores IEEE-754 binary32");

namespace dfn::dfnt {

namespace {

constexpr char kMagic[4] = {'D', 'F', 'N', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
    std::uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 4))
        throw std::runtime_error("DFNT: truncated header in " + path);
    return v;
}

}  // namespace

void write(const std::string& path, const std::vector<unsigned>& dims,
           const float* values, std::size_t count) {
    std::size_t expect = 1;
    for (unsigned d : dims) expect *= d;
    if (dims.empty() || expect != count)
        throw std::invalid_argument("DFNT: dims do not match value count for " + path);

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("DFNT: cannot open for writing: " + path);
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    put_u32(os, static_cast<std::uint32_t>(dims.size()));
    for (unsigned d : dims) put_u32(os, d);
    os.write(reinterpret_cast<const char*>(values),
             static_cast<std::streamsize>(count * sizeof(float)));
    if (!os) throw std::runtime_error("DFNT: write failed: " + path);
}

File read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("DFNT: cannot open: " + path);

    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("DFNT: bad magic in " + path);
    if (get_u32(is, path) != kVersion)
        throw std::runtime_error("DFNT: unsupported version in " + path);

    std::uint32_t rank = get_u32(is, path);
    if (rank == 0 || rank > 8)
        throw std::runtime_error("DFNT: implausible rank in " + path);

    File f;
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
        std::uint32_t d = get_u32(is, path);
        if (d == 0) throw std::runtime_error("DFNT: zero dim in " + path);
        f.dims.push_back(d);
        count *= d;
    }
    f.values.resize(count);
    if (!is.read(reinterpret_cast<char*>(f.values.data()),
                 static_cast<std::streamsize>(count * sizeof(float))))
        throw std::runtime_error("DFNT: truncated data in " + path);
    return f;
}

void write_tensor3(const std::string& path, const Tensor3& t) {
    write(path,
          {static_cast<unsigned>(t.rows), static_cast<unsigned>(t.cols),
           static_cast<unsigned>(t.depth)},
          t.data.data(), t.data.size());
}

Tensor3 read_tensor3(const std::string& path) {
    File f = read(path);
    if (f.dims.size() != 3)
        throw std::runtime_error("DFNT: expected rank 3 in " + path + ", got rank " +
                                 std::to_string(f.dims.size()));
    Tensor3 t(static_cast<int>(f.dims[0]), static_cast<int>(f.dims[1]),
              static_cast<int>(f.dims[2]));
    t.data = std::move(f.values);
    return t;
}

void write_raster(const std::string& path, int rows, int cols, const float* values) {
    write(path, {static_cast<unsigned>(rows), static_cast<unsigned>(cols)}, values,
          static_cast<std::size_t>(rows) * cols);
}

}  // namespace dfn::dfnt
