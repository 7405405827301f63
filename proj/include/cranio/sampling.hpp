#ifndef CRANIO_SAMPLING_HPP
#define CRANIO_SAMPLING_HPP

#include <cmath>

#include "cranio/grid.hpp"

namespace cranio {

// Continuous-index samplers. Coordinates are voxel indices (not mm).

template <typename T>
double sample_nearest_zero(const Grid<T>& g, double x, double y, double z) {
    int i = static_cast<int>(std::llround(x));
    int j = static_cast<int>(std::llround(y));
    int k = static_cast<int>(std::llround(z));
    return g.in_bounds(i, j, k) ? static_cast<double>(g(i, j, k)) : 0.0;
}

template <typename T>
double sample_nearest_clamp(const Grid<T>& g, double x, double y, double z) {
    int i = static_cast<int>(std::llround(x));
    int j = static_cast<int>(std::llround(y));
    int k = static_cast<int>(std::llround(z));
    i = std::clamp(i, 0, g.dims[0] - 1);
    j = std::clamp(j, 0, g.dims[1] - 1);
    k = std::clamp(k, 0, g.dims[2] - 1);
    return static_cast<double>(g(i, j, k));
}

template <typename T, bool Clamp>
double sample_trilinear(const Grid<T>& g, double x, double y, double z) {
    if constexpr (Clamp) {
        x = std::clamp(x, 0.0, static_cast<double>(g.dims[0] - 1));
        y = std::clamp(y, 0.0, static_cast<double>(g.dims[1] - 1));
        z = std::clamp(z, 0.0, static_cast<double>(g.dims[2] - 1));
    } else {
        if (x <= -1.0 || y <= -1.0 || z <= -1.0 ||
            x >= g.dims[0] || y >= g.dims[1] || z >= g.dims[2])
            return 0.0;
    }
    int i0 = static_cast<int>(std::floor(x));
    int j0 = static_cast<int>(std::floor(y));
    int k0 = static_cast<int>(std::floor(z));
    double fx = x - i0, fy = y - j0, fz = z - k0;
    double acc = 0.0;
    for (int dk = 0; dk <= 1; ++dk)
        for (int dj = 0; dj <= 1; ++dj)
            for (int di = 0; di <= 1; ++di) {
                double w = (di ? fx : 1.0 - fx) * (dj ? fy : 1.0 - fy) * (dk ? fz : 1.0 - fz);
                if (w == 0.0) continue;
                int i = i0 + di, j = j0 + dj, k = k0 + dk;
                double v;
                if (g.in_bounds(i, j, k)) {
                    v = static_cast<double>(g(i, j, k));
                } else if constexpr (Clamp) {
                    v = static_cast<double>(g(std::clamp(i, 0, g.dims[0] - 1),
                                              std::clamp(j, 0, g.dims[1] - 1),
                                              std::clamp(k, 0, g.dims[2] - 1)));
                } else {
                    v = 0.0;
                }
                acc += w * v;
            }
    return acc;
}

template <typename T>
double sample_trilinear_zero(const Grid<T>& g, double x, double y, double z) {
    return sample_trilinear<T, false>(g, x, y, z);
}

template <typename T>
double sample_trilinear_clamp(const Grid<T>& g, double x, double y, double z) {
    return sample_trilinear<T, true>(g, x, y, z);
}

// Value and spatial gradient (d/dx, d/dy, d/dz in voxel units) of the
// trilinear interpolant, zero outside.
template <typename T>
void sample_trilinear_grad(const Grid<T>& g, double x, double y, double z,
                           double& value, Vec3& grad) {
    value = 0.0;
    grad = {0.0, 0.0, 0.0};
    if (x <= -1.0 || y <= -1.0 || z <= -1.0 ||
        x >= g.dims[0] || y >= g.dims[1] || z >= g.dims[2])
        return;
    int i0 = static_cast<int>(std::floor(x));
    int j0 = static_cast<int>(std::floor(y));
    int k0 = static_cast<int>(std::floor(z));
    double fx = x - i0, fy = y - j0, fz = z - k0;
    for (int dk = 0; dk <= 1; ++dk)
        for (int dj = 0; dj <= 1; ++dj)
            for (int di = 0; di <= 1; ++di) {
                int i = i0 + di, j = j0 + dj, k = k0 + dk;
                double v = g.in_bounds(i, j, k) ? static_cast<double>(g(i, j, k)) : 0.0;
                if (v == 0.0) continue;
                double wx = di ? fx : 1.0 - fx;
                double wy = dj ? fy : 1.0 - fy;
                double wz = dk ? fz : 1.0 - fz;
                double sx = di ? 1.0 : -1.0;
                double sy = dj ? 1.0 : -1.0;
                double sz = dk ? 1.0 : -1.0;
                value += wx * wy * wz * v;
                grad[0] += sx * wy * wz * v;
                grad[1] += wx * sy * wz * v;
                grad[2] += wx * wy * sz * v;
            }
}

} // namespace cranio

#endif
