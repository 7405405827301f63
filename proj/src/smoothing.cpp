#include "cranio/smoothing.hpp"

#include <cmath>
#include <vector>

namespace cranio {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

void convolve_axis(ScalarGrid& g, const std::vector<double>& kernel, int axis) {
    const int radius = static_cast<int>(kernel.size() / 2);
    const int n = g.dims[axis];
    std::vector<double> line(static_cast<std::size_t>(n));
    std::vector<double> out(static_cast<std::size_t>(n));

    Index3 step{0, 0, 0};
    step[axis] = 1;
    int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    for (int q = 0; q < g.dims[a2]; ++q)
        for (int p = 0; p < g.dims[a1]; ++p) {
            Index3 base{0, 0, 0};
            base[a1] = p;
            base[a2] = q;
            for (int t = 0; t < n; ++t)
                line[static_cast<std::size_t>(t)] =
                    g(base[0] + t * step[0], base[1] + t * step[1], base[2] + t * step[2]);
            for (int t = 0; t < n; ++t) {
                double acc = 0.0;
                for (int d = -radius; d <= radius; ++d) {
                    int s = std::clamp(t + d, 0, n - 1);
                    acc += kernel[static_cast<std::size_t>(d + radius)] * line[static_cast<std::size_t>(s)];
                }
                out[static_cast<std::size_t>(t)] = acc;
            }
            for (int t = 0; t < n; ++t)
                g(base[0] + t * step[0], base[1] + t * step[1], base[2] + t * step[2]) =
                    out[static_cast<std::size_t>(t)];
        }
}

} // namespace

ScalarGrid to_scalar(const BinaryGrid& grid) {
    ScalarGrid out(grid.dims, grid.spacing, grid.origin);
    for (std::size_t i = 0; i < grid.size(); ++i) out.data[i] = grid.data[i] ? 1.0 : 0.0;
    return out;
}

BinaryGrid threshold(const ScalarGrid& grid, double level) {
    BinaryGrid out(grid.dims, grid.spacing, grid.origin);
    for (std::size_t i = 0; i < grid.size(); ++i) out.data[i] = grid.data[i] >= level ? 1 : 0;
    return out;
}

ScalarGrid gaussian_smooth(const ScalarGrid& grid, double sigma_vox) {
    if (sigma_vox <= 0) throw ShapeMismatch("gaussian sigma must be > 0");
    ScalarGrid out = grid;
    auto kernel = gaussian_kernel(sigma_vox);
    for (int axis = 0; axis < 3; ++axis) convolve_axis(out, kernel, axis);
    return out;
}

ScalarGrid gaussian_smooth(const BinaryGrid& grid, double sigma_vox) {
    return gaussian_smooth(to_scalar(grid), sigma_vox);
}

} // namespace cranio
