#ifndef CRANIO_SMOOTHING_HPP
#define CRANIO_SMOOTHING_HPP

#include "cranio/grid.hpp"

namespace cranio {

// Separable Gaussian convolution, kernel truncated at 3 sigma and
// renormalized, edge-clamped. Sigma is in voxels.
ScalarGrid gaussian_smooth(const ScalarGrid& grid, double sigma_vox);
ScalarGrid gaussian_smooth(const BinaryGrid& grid, double sigma_vox);

ScalarGrid to_scalar(const BinaryGrid& grid);
BinaryGrid threshold(const ScalarGrid& grid, double level = 0.5);

} // namespace cranio

#endif
