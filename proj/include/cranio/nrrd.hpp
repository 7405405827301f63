#ifndef CRANIO_NRRD_HPP
#define CRANIO_NRRD_HPP

#include <string>

#include "cranio/grid.hpp"

namespace cranio {

// NRRD subset: 3-D, types {uint8, int16, float}, encodings {raw, gzip},
// diagonal space directions, little-endian data.

enum class NrrdType { UInt8, Int16, Float32 };
enum class NrrdEncoding { Raw, Gzip };

ScalarGrid read_nrrd_scalar(const std::string& path);

// Nonzero voxels map to 1 (challenge masks are stored as 0/1 or 0/255).
BinaryGrid read_nrrd_binary(const std::string& path);

void write_nrrd(const BinaryGrid& grid, const std::string& path,
                NrrdEncoding encoding = NrrdEncoding::Gzip);
void write_nrrd(const ScalarGrid& grid, const std::string& path,
                NrrdType type = NrrdType::Float32, NrrdEncoding encoding = NrrdEncoding::Gzip);

} // namespace cranio

#endif
