#include "cranio/preprocess.hpp"

#include "cranio/morphology.hpp"

namespace cranio {

std::pair<BinaryGrid, GeometryProvenance> preprocess_case(const BinaryGrid& defective,
                                                          const PreprocessConfig& config) {
    BoundingBox box = bounding_box(defective); // throws EmptyVolume on all-zero input

    GeometryProvenance prov;
    prov.original_dims = defective.dims;
    prov.original_spacing = defective.spacing;
    prov.original_origin = defective.origin;
    prov.target_spacing = config.target_spacing;
    prov.target_dims = config.target_dims;
    prov.interp = config.interp;

    BoundingBox window = box.expanded(config.offset, defective.dims);
    prov.crop_lower = window.lower;
    prov.crop_dims = window.extent();

    BinaryGrid content = crop(defective, window.lower, window.extent());

    bool spacing_change = false;
    for (int ax = 0; ax < 3; ++ax)
        if (std::abs(config.target_spacing[ax] - defective.spacing[ax]) > 1e-12)
            spacing_change = true;
    if (spacing_change) {
        if (config.interp == Interp::Trilinear && config.smooth_sigma > 0.0) {
            Index3 nd;
            for (int ax = 0; ax < 3; ++ax)
                nd[ax] = std::max<int>(1, static_cast<int>(std::llround(
                                              content.dims[ax] * content.spacing[ax] /
                                              config.target_spacing[ax])));
            content = resample_smooth(content, nd, config.target_spacing, config.smooth_sigma);
            prov.smooth_sigma = config.smooth_sigma;
        } else {
            content = resample(content, config.target_spacing, config.interp);
        }
        prov.resampled = true;
    }
    prov.resampled_dims = content.dims;

    // center the content in the target canvas, recording the placement
    std::pair<BinaryGrid, GeometryProvenance> placed =
        crop_pad(content, BoundingBox{{0, 0, 0}, content.dims}, 0, config.target_dims);
    prov.pad_lower = placed.second.pad_lower;
    prov.content_lower = placed.second.content_lower;
    prov.overflow = placed.second.overflow;
    return {std::move(placed.first), prov};
}

BinaryGrid postprocess_defect(const BinaryGrid& defect_pred, const GeometryProvenance& prov,
                              const BinaryGrid& defective_original,
                              const PostprocessConfig& config) {
    BinaryGrid restored = invert_provenance(defect_pred, prov);
    require_same_geometry(restored, defective_original,
                          "postprocess: skull does not match recorded original geometry");

    BinaryGrid cleaned;
    if (config.close_union) {
        BinaryGrid closed = morphology(logical(restored, defective_original, MaskOp::Or),
                                       MorphOp::Close, config.closing_radius);
        // equals closed xor skull while staying disjoint from the skull even
        // when border erosion nibbles the union
        cleaned = logical(closed, defective_original, MaskOp::AndNot);
    } else {
        BinaryGrid closed = morphology(restored, MorphOp::Close, config.closing_radius);
        cleaned = logical(closed, defective_original, MaskOp::AndNot);
    }

    if (count_nonzero(cleaned) == 0) return cleaned;
    return keep_largest(cleaned, config.keep_components);
}

} // namespace cranio
