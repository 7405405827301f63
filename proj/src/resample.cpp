#include "cranio/resample.hpp"

#include <algorithm>
#include <cmath>

#include "cranio/sampling.hpp"
#include "cranio/smoothing.hpp"

namespace cranio {

namespace {

Index3 resampled_dims_for(const Index3& dims, const Vec3& spacing, const Vec3& target) {
    Index3 nd;
    for (int ax = 0; ax < 3; ++ax) {
        if (target[ax] <= 0) throw ShapeMismatch("target spacing must be > 0");
        nd[ax] = std::max<int>(1, static_cast<int>(std::llround(dims[ax] * spacing[ax] / target[ax])));
    }
    return nd;
}

template <typename T>
Grid<T> resample_impl(const Grid<T>& grid, Index3 new_dims, Vec3 new_spacing, Interp interp,
                      bool threshold_binary) {
    Grid<T> out(new_dims, new_spacing, grid.origin);
    Vec3 ratio{new_spacing[0] / grid.spacing[0], new_spacing[1] / grid.spacing[1],
               new_spacing[2] / grid.spacing[2]};
    bool identity = same_geometry(out, grid);
    if (identity) {
        out.data = grid.data;
        return out;
    }
    std::size_t idx = 0;
    for (int k = 0; k < new_dims[2]; ++k) {
        double z = k * ratio[2];
        for (int j = 0; j < new_dims[1]; ++j) {
            double y = j * ratio[1];
            for (int i = 0; i < new_dims[0]; ++i, ++idx) {
                double x = i * ratio[0];
                double v;
                if (interp == Interp::Nearest) {
                    v = sample_nearest_clamp(grid, x, y, z);
                } else {
                    v = sample_trilinear_clamp(grid, x, y, z);
                    if (threshold_binary) v = (v >= 0.5) ? 1.0 : 0.0;
                }
                out.data[idx] = static_cast<T>(v);
            }
        }
    }
    return out;
}

} // namespace

BinaryGrid resample(const BinaryGrid& grid, Vec3 target_spacing, Interp interp) {
    return resample_impl(grid, resampled_dims_for(grid.dims, grid.spacing, target_spacing),
                         target_spacing, interp, true);
}

ScalarGrid resample(const ScalarGrid& grid, Vec3 target_spacing, Interp interp) {
    return resample_impl(grid, resampled_dims_for(grid.dims, grid.spacing, target_spacing),
                         target_spacing, interp, false);
}

BinaryGrid resample_to(const BinaryGrid& grid, Index3 new_dims, Vec3 new_spacing, Interp interp) {
    return resample_impl(grid, new_dims, new_spacing, interp, true);
}

ScalarGrid resample_to(const ScalarGrid& grid, Index3 new_dims, Vec3 new_spacing, Interp interp) {
    return resample_impl(grid, new_dims, new_spacing, interp, false);
}

BinaryGrid resample_smooth(const BinaryGrid& grid, Index3 new_dims, Vec3 new_spacing,
                           double sigma_vox) {
    if (new_dims == grid.dims) {
        bool same = true;
        for (int ax = 0; ax < 3; ++ax)
            if (std::abs(new_spacing[ax] - grid.spacing[ax]) > 1e-12) same = false;
        if (same) return grid; // identity stays exact
    }
    if (sigma_vox <= 0.0) return resample_impl(grid, new_dims, new_spacing, Interp::Trilinear, true);
    ScalarGrid field = gaussian_smooth(grid, sigma_vox);
    ScalarGrid sampled = resample_impl(field, new_dims, new_spacing, Interp::Trilinear, false);
    BinaryGrid out(new_dims, new_spacing, grid.origin);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = sampled.data[i] >= 0.5 ? 1 : 0;
    return out;
}

BinaryGrid crop(const BinaryGrid& grid, Index3 lower, Index3 extent) {
    for (int ax = 0; ax < 3; ++ax) {
        if (lower[ax] < 0 || extent[ax] < 1 || lower[ax] + extent[ax] > grid.dims[ax])
            throw ShapeMismatch("crop window outside grid");
    }
    BinaryGrid out(
        extent, grid.spacing,
        {grid.origin[0] + lower[0] * grid.spacing[0], grid.origin[1] + lower[1] * grid.spacing[1],
         grid.origin[2] + lower[2] * grid.spacing[2]});
    for (int k = 0; k < extent[2]; ++k)
        for (int j = 0; j < extent[1]; ++j)
            for (int i = 0; i < extent[0]; ++i)
                out(i, j, k) = grid(lower[0] + i, lower[1] + j, lower[2] + k);
    return out;
}

namespace {

// Places `content` into a target_dims canvas, centered; fills the placement
// fields of prov and returns the canvas.
BinaryGrid place_centered(const BinaryGrid& content, Index3 target_dims, GeometryProvenance& prov) {
    Index3 placed;
    for (int ax = 0; ax < 3; ++ax) {
        if (content.dims[ax] <= target_dims[ax]) {
            prov.pad_lower[ax] = (target_dims[ax] - content.dims[ax]) / 2;
            prov.content_lower[ax] = 0;
            placed[ax] = content.dims[ax];
        } else {
            prov.pad_lower[ax] = 0;
            prov.content_lower[ax] = (content.dims[ax] - target_dims[ax]) / 2;
            placed[ax] = target_dims[ax];
            prov.overflow = true;
        }
    }
    Vec3 origin;
    for (int ax = 0; ax < 3; ++ax)
        origin[ax] = content.origin[ax] +
                     (prov.content_lower[ax] - prov.pad_lower[ax]) * content.spacing[ax];
    BinaryGrid canvas(target_dims, content.spacing, origin);
    for (int k = 0; k < placed[2]; ++k)
        for (int j = 0; j < placed[1]; ++j)
            for (int i = 0; i < placed[0]; ++i)
                canvas(prov.pad_lower[0] + i, prov.pad_lower[1] + j, prov.pad_lower[2] + k) =
                    content(prov.content_lower[0] + i, prov.content_lower[1] + j,
                            prov.content_lower[2] + k);
    return canvas;
}

} // namespace

std::pair<BinaryGrid, GeometryProvenance> crop_pad(const BinaryGrid& grid, const BoundingBox& box,
                                                   int offset, Index3 target_dims) {
    GeometryProvenance prov;
    prov.original_dims = grid.dims;
    prov.original_spacing = grid.spacing;
    prov.original_origin = grid.origin;
    prov.target_spacing = grid.spacing;
    prov.target_dims = target_dims;
    prov.interp = Interp::Nearest;

    BoundingBox window = box.expanded(offset, grid.dims);
    prov.crop_lower = window.lower;
    prov.crop_dims = window.extent();
    prov.resampled_dims = prov.crop_dims;
    prov.resampled = false;

    BinaryGrid content = crop(grid, window.lower, window.extent());
    BinaryGrid canvas = place_centered(content, target_dims, prov);
    return {std::move(canvas), prov};
}

BinaryGrid apply_provenance(const BinaryGrid& grid, const GeometryProvenance& prov) {
    if (grid.dims != prov.original_dims)
        throw GeometryMismatch("apply_provenance: grid does not match recorded original dims");
    BinaryGrid content = crop(grid, prov.crop_lower, prov.crop_dims);
    if (prov.resampled) {
        content = prov.smooth_sigma > 0.0
                      ? resample_smooth(content, prov.resampled_dims, prov.target_spacing,
                                        prov.smooth_sigma)
                      : resample_to(content, prov.resampled_dims, prov.target_spacing, prov.interp);
    }
    GeometryProvenance scratch = prov;
    scratch.overflow = false;
    return place_centered(content, prov.target_dims, scratch);
}

BinaryGrid invert_provenance(const BinaryGrid& grid, const GeometryProvenance& prov) {
    if (grid.dims != prov.target_dims)
        throw GeometryMismatch("invert_provenance: grid does not match recorded target dims");

    // undo the centered placement
    BinaryGrid content(prov.resampled_dims, prov.target_spacing, {0, 0, 0});
    Index3 placed;
    for (int ax = 0; ax < 3; ++ax)
        placed[ax] = std::min(prov.resampled_dims[ax], prov.target_dims[ax]);
    for (int k = 0; k < placed[2]; ++k)
        for (int j = 0; j < placed[1]; ++j)
            for (int i = 0; i < placed[0]; ++i)
                content(prov.content_lower[0] + i, prov.content_lower[1] + j,
                        prov.content_lower[2] + k) =
                    grid(prov.pad_lower[0] + i, prov.pad_lower[1] + j, prov.pad_lower[2] + k);

    // undo the resample
    if (prov.resampled) {
        content = prov.smooth_sigma > 0.0
                      ? resample_smooth(content, prov.crop_dims, prov.original_spacing,
                                        prov.smooth_sigma)
                      : resample_to(content, prov.crop_dims, prov.original_spacing, prov.interp);
    }

    // undo the crop
    BinaryGrid out(prov.original_dims, prov.original_spacing, prov.original_origin);
    for (int k = 0; k < prov.crop_dims[2]; ++k)
        for (int j = 0; j < prov.crop_dims[1]; ++j)
            for (int i = 0; i < prov.crop_dims[0]; ++i)
                out(prov.crop_lower[0] + i, prov.crop_lower[1] + j, prov.crop_lower[2] + k) =
                    content(i, j, k);
    return out;
}

BinaryGrid translate_nearest(const BinaryGrid& grid, Vec3 shift_mm) {
    Vec3 shift_vox{shift_mm[0] / grid.spacing[0], shift_mm[1] / grid.spacing[1],
                   shift_mm[2] / grid.spacing[2]};
    BinaryGrid out(grid.dims, grid.spacing, grid.origin);
    std::size_t idx = 0;
    for (int k = 0; k < grid.dims[2]; ++k)
        for (int j = 0; j < grid.dims[1]; ++j)
            for (int i = 0; i < grid.dims[0]; ++i, ++idx)
                out.data[idx] = static_cast<std::uint8_t>(
                    sample_nearest_zero(grid, i - shift_vox[0], j - shift_vox[1], k - shift_vox[2]));
    return out;
}

} // namespace cranio
