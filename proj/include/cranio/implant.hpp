#ifndef CRANIO_IMPLANT_HPP
#define CRANIO_IMPLANT_HPP

#include "cranio/grid.hpp"

namespace cranio {

struct ImplantConfig {
    double target_volume_ratio = 0.7; // stop once |current| / |defect| drops to this
    double step_mm = 0.5;
    int median_radius = 1;
    int max_iterations = 200;
    bool literal_xor_with_skull = false; // inspection-only alternative reading
};

struct ImplantResult {
    BinaryGrid implant;
    int iterations_used = 0;
    double final_ratio = 1.0;
    bool converged = false;
    bool degenerate_direction = false; // centroid fallback was used
};

// Iterative thinning: shift the defect along the outward skull-to-rim
// direction, intersect with the original, median-filter, carve the skull
// out and keep the largest component until the target ratio is reached.
ImplantResult model_implant(const BinaryGrid& defect, const BinaryGrid& defective_skull,
                            const ImplantConfig& config = {});

} // namespace cranio

#endif
