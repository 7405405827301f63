#include "cranio/grid.hpp"

#include <algorithm>

namespace cranio {

BoundingBox bounding_box(const BinaryGrid& grid) {
    BoundingBox box;
    box.lower = {grid.dims[0], grid.dims[1], grid.dims[2]};
    box.upper = {0, 0, 0};
    bool any = false;
    std::size_t idx = 0;
    for (int k = 0; k < grid.dims[2]; ++k)
        for (int j = 0; j < grid.dims[1]; ++j)
            for (int i = 0; i < grid.dims[0]; ++i, ++idx) {
                if (!grid.data[idx]) continue;
                any = true;
                box.lower[0] = std::min(box.lower[0], i);
                box.lower[1] = std::min(box.lower[1], j);
                box.lower[2] = std::min(box.lower[2], k);
                box.upper[0] = std::max(box.upper[0], i + 1);
                box.upper[1] = std::max(box.upper[1], j + 1);
                box.upper[2] = std::max(box.upper[2], k + 1);
            }
    if (!any) throw EmptyVolume("bounding_box of all-zero grid");
    return box;
}

Vec3 centroid(const BinaryGrid& grid) {
    double sx = 0, sy = 0, sz = 0;
    std::size_t n = 0;
    std::size_t idx = 0;
    for (int k = 0; k < grid.dims[2]; ++k)
        for (int j = 0; j < grid.dims[1]; ++j)
            for (int i = 0; i < grid.dims[0]; ++i, ++idx) {
                if (!grid.data[idx]) continue;
                sx += i;
                sy += j;
                sz += k;
                ++n;
            }
    if (n == 0) throw EmptyVolume("centroid of all-zero grid");
    double inv = 1.0 / static_cast<double>(n);
    return {grid.origin[0] + sx * inv * grid.spacing[0],
            grid.origin[1] + sy * inv * grid.spacing[1],
            grid.origin[2] + sz * inv * grid.spacing[2]};
}

BinaryGrid logical(const BinaryGrid& a, const BinaryGrid& b, MaskOp op) {
    require_same_geometry(a, b, "logical operands differ in geometry");
    BinaryGrid out(a.dims, a.spacing, a.origin);
    const std::size_t n = a.size();
    switch (op) {
        case MaskOp::And:
            for (std::size_t i = 0; i < n; ++i) out.data[i] = a.data[i] & b.data[i];
            break;
        case MaskOp::Or:
            for (std::size_t i = 0; i < n; ++i) out.data[i] = a.data[i] | b.data[i];
            break;
        case MaskOp::Xor:
            for (std::size_t i = 0; i < n; ++i) out.data[i] = a.data[i] ^ b.data[i];
            break;
        case MaskOp::AndNot:
            for (std::size_t i = 0; i < n; ++i)
                out.data[i] = static_cast<std::uint8_t>(a.data[i] & (b.data[i] ^ 1u));
            break;
    }
    return out;
}

} // namespace cranio
