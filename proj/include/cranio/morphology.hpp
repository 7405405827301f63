#ifndef CRANIO_MORPHOLOGY_HPP
#define CRANIO_MORPHOLOGY_HPP

#include <cstddef>
#include <vector>

#include "cranio/grid.hpp"

namespace cranio {

enum class MorphOp { Erode, Dilate, Close, Open };

// Offsets of the discrete Euclidean ball: |(i,j,k)| <= radius in voxel units.
std::vector<Index3> ball_offsets(int radius);

// Binary morphology with the ball structuring element. The region outside the
// grid counts as background, so erosion shrinks masks at the image border.
// close = dilate then erode, open = erode then dilate.
BinaryGrid morphology(const BinaryGrid& grid, MorphOp op, int radius);

BinaryGrid erode(const BinaryGrid& grid, int radius);
BinaryGrid dilate(const BinaryGrid& grid, int radius);

// Majority vote over the (2r+1)^3 cube clipped to the grid; ties go to 0.
BinaryGrid median_filter(const BinaryGrid& grid, int radius);

struct ComponentLabels {
    Grid<std::int32_t> labels;           // 0 = background, 1..K ordered by size desc
    std::vector<std::size_t> sizes;      // sizes[i] = voxel count of label i+1
};

ComponentLabels connected_components(const BinaryGrid& grid, int connectivity = 26);

// Zeroes all but the k largest components.
BinaryGrid keep_largest(const BinaryGrid& grid, int k = 1, int connectivity = 26);

} // namespace cranio

#endif
