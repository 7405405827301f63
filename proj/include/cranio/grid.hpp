#ifndef CRANIO_GRID_HPP
#define CRANIO_GRID_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <cmath>
#include <string>
#include <vector>

#include "cranio/errors.hpp"

namespace cranio {

using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Axis-aligned voxel lattice. Voxel (i,j,k) has physical center
// origin + (i,j,k) * spacing, in millimeters. Linear storage is x-fastest:
// index = i + dims[0] * (j + dims[1] * k).
template <typename T>
class Grid {
public:
    Index3 dims{0, 0, 0};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};
    std::vector<T> data;

    Grid() = default;
    Grid(Index3 d, Vec3 s = {1.0, 1.0, 1.0}, Vec3 o = {0.0, 0.0, 0.0}, T fill = T{})
        : dims(d), spacing(s), origin(o),
          data(static_cast<std::size_t>(d[0]) * d[1] * d[2], fill) {
        if (d[0] < 1 || d[1] < 1 || d[2] < 1)
            throw ShapeMismatch("grid dims must be >= 1");
        if (s[0] <= 0 || s[1] <= 0 || s[2] <= 0)
            throw ShapeMismatch("grid spacing must be > 0");
    }

    std::size_t size() const { return data.size(); }

    std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
    }

    T& operator()(int i, int j, int k) { return data[index(i, j, k)]; }
    const T& operator()(int i, int j, int k) const { return data[index(i, j, k)]; }

    bool in_bounds(int i, int j, int k) const {
        return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
    }

    // value with zero outside the grid
    T at_or_zero(int i, int j, int k) const {
        return in_bounds(i, j, k) ? data[index(i, j, k)] : T{};
    }

    Vec3 position(int i, int j, int k) const {
        return {origin[0] + i * spacing[0], origin[1] + j * spacing[1], origin[2] + k * spacing[2]};
    }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }
};

using BinaryGrid = Grid<std::uint8_t>;
using ScalarGrid = Grid<double>;
using VectorGrid = Grid<Vec3>;

template <typename A, typename B>
bool same_geometry(const Grid<A>& a, const Grid<B>& b, double tol = 1e-9) {
    for (int ax = 0; ax < 3; ++ax) {
        if (a.dims[ax] != b.dims[ax]) return false;
        if (std::abs(a.spacing[ax] - b.spacing[ax]) > tol) return false;
        if (std::abs(a.origin[ax] - b.origin[ax]) > tol) return false;
    }
    return true;
}

template <typename A, typename B>
void require_same_geometry(const Grid<A>& a, const Grid<B>& b, const std::string& what) {
    if (!same_geometry(a, b)) throw GeometryMismatch(what);
}

inline std::size_t count_nonzero(const BinaryGrid& g) {
    std::size_t n = 0;
    for (auto v : g.data) n += (v != 0);
    return n;
}

// Voxel-index box, lower inclusive, upper exclusive.
struct BoundingBox {
    Index3 lower{0, 0, 0};
    Index3 upper{0, 0, 0};

    Index3 extent() const {
        return {upper[0] - lower[0], upper[1] - lower[1], upper[2] - lower[2]};
    }
    BoundingBox expanded(int offset, const Index3& dims) const {
        BoundingBox b;
        for (int ax = 0; ax < 3; ++ax) {
            b.lower[ax] = std::max(0, lower[ax] - offset);
            b.upper[ax] = std::min(dims[ax], upper[ax] + offset);
        }
        return b;
    }
};

// Tightest axis-aligned box containing all nonzero voxels.
BoundingBox bounding_box(const BinaryGrid& grid);

// Mean of nonzero voxel centers, physical mm.
Vec3 centroid(const BinaryGrid& grid);

enum class MaskOp { And, Or, Xor, AndNot };

BinaryGrid logical(const BinaryGrid& a, const BinaryGrid& b, MaskOp op);

} // namespace cranio

#endif
