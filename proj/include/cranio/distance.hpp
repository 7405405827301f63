#ifndef CRANIO_DISTANCE_HPP
#define CRANIO_DISTANCE_HPP

#include "cranio/grid.hpp"

namespace cranio {

// Exact Euclidean distance (mm, spacing-aware) from every voxel center to the
// nearest nonzero voxel center. Nonzero voxels map to 0. An all-zero input
// yields +infinity everywhere.
ScalarGrid distance_transform(const BinaryGrid& grid);

} // namespace cranio

#endif
