#ifndef CRANIO_PREPROCESS_HPP
#define CRANIO_PREPROCESS_HPP

#include <utility>

#include "cranio/grid.hpp"
#include "cranio/resample.hpp"

namespace cranio {

struct PreprocessConfig {
    int offset = 20;                    // crop margin around the skull box, voxels
    Vec3 target_spacing{1.0, 1.0, 1.0};
    Index3 target_dims{240, 200, 240};
    Interp interp = Interp::Trilinear;  // binary resample, thresholded at 0.5
    double smooth_sigma = 0.6;          // anti-aliased resample legs; 0 disables
};

// bounding box -> expand by offset -> crop -> resample -> center-pad.
// The provenance record inverts the chain exactly when the spacing is
// unchanged and nothing overflowed the target canvas.
std::pair<BinaryGrid, GeometryProvenance> preprocess_case(const BinaryGrid& defective,
                                                          const PreprocessConfig& config = {});

struct PostprocessConfig {
    int closing_radius = 2;
    int keep_components = 1;
    bool close_union = true; // close defect|skull (default) vs. the defect alone
};

// Restores a predicted defect to the original geometry, then improves the
// boundary: close the union with the skull and subtract the skull back out,
// keeping the largest component(s). The result never overlaps the skull.
BinaryGrid postprocess_defect(const BinaryGrid& defect_pred, const GeometryProvenance& prov,
                              const BinaryGrid& defective_original,
                              const PostprocessConfig& config = {});

} // namespace cranio

#endif
