#include "cranio/morphology.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "cranio/parallel.hpp"

namespace cranio {

std::vector<Index3> ball_offsets(int radius) {
    std::vector<Index3> offs;
    const int r2 = radius * radius;
    for (int k = -radius; k <= radius; ++k)
        for (int j = -radius; j <= radius; ++j)
            for (int i = -radius; i <= radius; ++i)
                if (i * i + j * j + k * k <= r2) offs.push_back({i, j, k});
    return offs;
}

namespace {

BinaryGrid apply_strel(const BinaryGrid& grid, const std::vector<Index3>& offs, bool dilate_mode) {
    BinaryGrid out(grid.dims, grid.spacing, grid.origin);
    const int dx = grid.dims[0], dy = grid.dims[1], dz = grid.dims[2];
    parallel_for(dz, [&](std::int64_t kk) {
        int k = static_cast<int>(kk);
        for (int j = 0; j < dy; ++j)
            for (int i = 0; i < dx; ++i) {
                if (dilate_mode) {
                    // out = 1 if any translated voxel is set
                    std::uint8_t v = 0;
                    for (const auto& o : offs) {
                        if (grid.at_or_zero(i + o[0], j + o[1], k + o[2])) { v = 1; break; }
                    }
                    out(i, j, k) = v;
                } else {
                    // out = 1 if the whole ball fits inside the mask
                    std::uint8_t v = 1;
                    for (const auto& o : offs) {
                        if (!grid.at_or_zero(i + o[0], j + o[1], k + o[2])) { v = 0; break; }
                    }
                    out(i, j, k) = v;
                }
            }
    });
    return out;
}

} // namespace

BinaryGrid erode(const BinaryGrid& grid, int radius) {
    return apply_strel(grid, ball_offsets(radius), false);
}

BinaryGrid dilate(const BinaryGrid& grid, int radius) {
    return apply_strel(grid, ball_offsets(radius), true);
}

BinaryGrid morphology(const BinaryGrid& grid, MorphOp op, int radius) {
    if (radius < 1) throw ShapeMismatch("morphology radius must be >= 1");
    switch (op) {
        case MorphOp::Erode: return erode(grid, radius);
        case MorphOp::Dilate: return dilate(grid, radius);
        case MorphOp::Close: return erode(dilate(grid, radius), radius);
        case MorphOp::Open: return dilate(erode(grid, radius), radius);
    }
    throw ShapeMismatch("unknown morphology op");
}

BinaryGrid median_filter(const BinaryGrid& grid, int radius) {
    if (radius < 1) throw ShapeMismatch("median_filter radius must be >= 1");
    BinaryGrid out(grid.dims, grid.spacing, grid.origin);
    const int dx = grid.dims[0], dy = grid.dims[1], dz = grid.dims[2];
    parallel_for(dz, [&](std::int64_t kk) {
        int k = static_cast<int>(kk);
        for (int j = 0; j < dy; ++j)
            for (int i = 0; i < dx; ++i) {
                int ones = 0, total = 0;
                const int k0 = std::max(0, k - radius), k1 = std::min(dz - 1, k + radius);
                const int j0 = std::max(0, j - radius), j1 = std::min(dy - 1, j + radius);
                const int i0 = std::max(0, i - radius), i1 = std::min(dx - 1, i + radius);
                for (int c = k0; c <= k1; ++c)
                    for (int b = j0; b <= j1; ++b)
                        for (int a = i0; a <= i1; ++a) {
                            ones += grid(a, b, c);
                            ++total;
                        }
                out(i, j, k) = (2 * ones > total) ? 1 : 0;
            }
    });
    return out;
}

ComponentLabels connected_components(const BinaryGrid& grid, int connectivity) {
    if (connectivity != 6 && connectivity != 26)
        throw ShapeMismatch("connectivity must be 6 or 26");

    static const Index3 n6[] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    std::vector<Index3> n26;
    if (connectivity == 26) {
        for (int k = -1; k <= 1; ++k)
            for (int j = -1; j <= 1; ++j)
                for (int i = -1; i <= 1; ++i)
                    if (i || j || k) n26.push_back({i, j, k});
    }
    const Index3* neigh = (connectivity == 6) ? n6 : n26.data();
    const int nneigh = (connectivity == 6) ? 6 : 26;

    Grid<std::int32_t> raw(grid.dims, grid.spacing, grid.origin, 0);
    std::vector<std::size_t> raw_sizes;

    std::int32_t next = 0;
    std::vector<std::size_t> stack;
    std::size_t idx = 0;
    for (int k = 0; k < grid.dims[2]; ++k)
        for (int j = 0; j < grid.dims[1]; ++j)
            for (int i = 0; i < grid.dims[0]; ++i, ++idx) {
                if (!grid.data[idx] || raw.data[idx]) continue;
                ++next;
                std::size_t sz = 0;
                raw.data[idx] = next;
                stack.push_back(idx);
                while (!stack.empty()) {
                    std::size_t cur = stack.back();
                    stack.pop_back();
                    ++sz;
                    int ci = static_cast<int>(cur % grid.dims[0]);
                    int cj = static_cast<int>((cur / grid.dims[0]) % grid.dims[1]);
                    int ck = static_cast<int>(cur / (static_cast<std::size_t>(grid.dims[0]) * grid.dims[1]));
                    for (int t = 0; t < nneigh; ++t) {
                        int ni = ci + neigh[t][0], nj = cj + neigh[t][1], nk = ck + neigh[t][2];
                        if (!grid.in_bounds(ni, nj, nk)) continue;
                        std::size_t nidx = grid.index(ni, nj, nk);
                        if (grid.data[nidx] && !raw.data[nidx]) {
                            raw.data[nidx] = next;
                            stack.push_back(nidx);
                        }
                    }
                }
                raw_sizes.push_back(sz);
            }

    // relabel so that label 1 is the largest component; ties keep scan order
    std::vector<std::int32_t> order(static_cast<std::size_t>(next));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        return raw_sizes[static_cast<std::size_t>(a)] > raw_sizes[static_cast<std::size_t>(b)];
    });
    std::vector<std::int32_t> remap(static_cast<std::size_t>(next) + 1, 0);
    ComponentLabels out;
    out.sizes.resize(static_cast<std::size_t>(next));
    for (std::int32_t rank = 0; rank < next; ++rank) {
        remap[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)]) + 1] = rank + 1;
        out.sizes[static_cast<std::size_t>(rank)] = raw_sizes[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])];
    }
    out.labels = std::move(raw);
    for (auto& v : out.labels.data) v = remap[static_cast<std::size_t>(v)];
    return out;
}

BinaryGrid keep_largest(const BinaryGrid& grid, int k, int connectivity) {
    ComponentLabels cc = connected_components(grid, connectivity);
    BinaryGrid out(grid.dims, grid.spacing, grid.origin);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data[i] = (cc.labels.data[i] >= 1 && cc.labels.data[i] <= k) ? 1 : 0;
    return out;
}

} // namespace cranio
