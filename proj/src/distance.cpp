#include "cranio/distance.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace cranio {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared-distance transform with sample pitch w:
// out[x] = min_q in[q] + (w * (x - q))^2, via the parabola lower envelope.
void sdt_1d(const double* in, double* out, int n, double w) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n) + 1);
    const double w2 = w * w;
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (in[q] == kInf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        double s;
        for (;;) {
            int p = v[static_cast<std::size_t>(k)];
            s = ((in[q] + w2 * q * q) - (in[p] + w2 * p * p)) / (2.0 * w2 * (q - p));
            if (s > z[static_cast<std::size_t>(k)]) break;
            --k;
            if (k < 0) break;
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = s;
        z[static_cast<std::size_t>(k) + 1] = kInf;
    }
    if (k < 0) {
        for (int x = 0; x < n; ++x) out[x] = kInf;
        return;
    }
    int j = 0;
    for (int x = 0; x < n; ++x) {
        while (z[static_cast<std::size_t>(j) + 1] < x) ++j;
        int p = v[static_cast<std::size_t>(j)];
        double d = w * (x - p);
        out[x] = in[p] + d * d;
    }
}

} // namespace

ScalarGrid distance_transform(const BinaryGrid& grid) {
    const int dx = grid.dims[0], dy = grid.dims[1], dz = grid.dims[2];
    ScalarGrid sq(grid.dims, grid.spacing, grid.origin);
    for (std::size_t i = 0; i < grid.size(); ++i)
        sq.data[i] = grid.data[i] ? 0.0 : kInf;

    std::vector<double> line, lout;
    // axis x
    line.resize(static_cast<std::size_t>(dx));
    lout.resize(static_cast<std::size_t>(dx));
    for (int k = 0; k < dz; ++k)
        for (int j = 0; j < dy; ++j) {
            for (int i = 0; i < dx; ++i) line[static_cast<std::size_t>(i)] = sq(i, j, k);
            sdt_1d(line.data(), lout.data(), dx, grid.spacing[0]);
            for (int i = 0; i < dx; ++i) sq(i, j, k) = lout[static_cast<std::size_t>(i)];
        }
    // axis y
    line.resize(static_cast<std::size_t>(dy));
    lout.resize(static_cast<std::size_t>(dy));
    for (int k = 0; k < dz; ++k)
        for (int i = 0; i < dx; ++i) {
            for (int j = 0; j < dy; ++j) line[static_cast<std::size_t>(j)] = sq(i, j, k);
            sdt_1d(line.data(), lout.data(), dy, grid.spacing[1]);
            for (int j = 0; j < dy; ++j) sq(i, j, k) = lout[static_cast<std::size_t>(j)];
        }
    // axis z
    line.resize(static_cast<std::size_t>(dz));
    lout.resize(static_cast<std::size_t>(dz));
    for (int j = 0; j < dy; ++j)
        for (int i = 0; i < dx; ++i) {
            for (int k = 0; k < dz; ++k) line[static_cast<std::size_t>(k)] = sq(i, j, k);
            sdt_1d(line.data(), lout.data(), dz, grid.spacing[2]);
            for (int k = 0; k < dz; ++k) sq(i, j, k) = lout[static_cast<std::size_t>(k)];
        }

    for (auto& v : sq.data) v = (v == kInf) ? kInf : std::sqrt(v);
    return sq;
}

} // namespace cranio
