#include "cranio/implant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cranio/morphology.hpp"
#include "cranio/resample.hpp"
#include "cranio/smoothing.hpp"
#include "cranio/sampling.hpp"

namespace cranio {

ImplantResult model_implant(const BinaryGrid& defect, const BinaryGrid& defective_skull,
                            const ImplantConfig& config) {
    require_same_geometry(defect, defective_skull, "implant: defect vs skull geometry");
    if (count_nonzero(defect) == 0) throw EmptyVolume("implant: defect is empty");
    if (count_nonzero(defective_skull) == 0) throw EmptyVolume("implant: skull is empty");

    ImplantResult res;

    BinaryGrid contour = logical(defect, erode(defect, 1), MaskOp::Xor);
    if (count_nonzero(contour) == 0) contour = defect; // single-voxel-thin defect

    Vec3 c_skull = centroid(defective_skull);
    Vec3 c_contour = centroid(contour);
    Vec3 dir = c_contour - c_skull;
    double len = norm(dir);
    if (len < 1e-6) {
        // fall back to the outward surface normal at the contour centroid
        res.degenerate_direction = true;
        ScalarGrid field = gaussian_smooth(defect, 1.0);
        Vec3 vox{(c_contour[0] - defect.origin[0]) / defect.spacing[0],
                 (c_contour[1] - defect.origin[1]) / defect.spacing[1],
                 (c_contour[2] - defect.origin[2]) / defect.spacing[2]};
        double value;
        Vec3 grad;
        sample_trilinear_grad(field, vox[0], vox[1], vox[2], value, grad);
        dir = {-grad[0] / defect.spacing[0], -grad[1] / defect.spacing[1],
               -grad[2] / defect.spacing[2]};
        len = norm(dir);
        if (len < 1e-9) {
            dir = {0, 0, 1};
            len = 1.0;
        }
        std::fprintf(stderr, "event=implant_degenerate_direction fallback=surface_normal\n");
    }
    dir = dir * (1.0 / len);

    // every iterate lives inside dilate(defect, median_radius); crop once
    BoundingBox box = bounding_box(defect);
    int margin = config.median_radius + 1;
    BoundingBox window = box.expanded(margin, defect.dims);
    BinaryGrid defect_w = crop(defect, window.lower, window.extent());
    BinaryGrid skull_w = crop(defective_skull, window.lower, window.extent());

    const double defect_count = static_cast<double>(count_nonzero(defect_w));
    BinaryGrid best = defect_w;
    double best_ratio = 1.0;

    for (int t = 1; t <= config.max_iterations; ++t) {
        Vec3 shift = dir * (static_cast<double>(t) * config.step_mm);
        BinaryGrid shifted = translate_nearest(defect_w, shift);
        BinaryGrid current = logical(defect_w, shifted, MaskOp::And);
        current = median_filter(current, config.median_radius);
        current = config.literal_xor_with_skull ? logical(current, skull_w, MaskOp::Xor)
                                                : logical(current, skull_w, MaskOp::AndNot);
        if (count_nonzero(current) > 0) current = keep_largest(current, 1);

        double ratio = static_cast<double>(count_nonzero(current)) / defect_count;
        res.iterations_used = t;
        if (ratio > best_ratio + 1e-12)
            std::fprintf(stderr, "event=implant_ratio_not_monotone t=%d ratio=%.4f prev=%.4f\n", t,
                         ratio, best_ratio);
        best = std::move(current);
        best_ratio = ratio;
        if (ratio <= config.target_volume_ratio) {
            res.converged = true;
            break;
        }
    }

    // paste the cropped result back into the full frame
    res.implant = BinaryGrid(defect.dims, defect.spacing, defect.origin);
    Index3 we = window.extent();
    for (int k = 0; k < we[2]; ++k)
        for (int j = 0; j < we[1]; ++j)
            for (int i = 0; i < we[0]; ++i)
                res.implant(window.lower[0] + i, window.lower[1] + j, window.lower[2] + k) =
                    best(i, j, k);
    res.final_ratio = best_ratio;
    return res;
}

} // namespace cranio
