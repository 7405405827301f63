#ifndef CRANIO_STL_IO_HPP
#define CRANIO_STL_IO_HPP

#include <string>

#include "cranio/mesh.hpp"

namespace cranio {

enum class StlFormat { Binary, Ascii };

// Binary STL: 80-byte header, little-endian u32 triangle count, then per
// triangle 12 f32 (normal + 3 vertices) and a zero u16 attribute.
// File size is 84 + 50 * triangle_count bytes.
void write_stl(const TriangleMesh& mesh, const std::string& path,
               StlFormat format = StlFormat::Binary);

TriangleMesh read_stl(const std::string& path);

} // namespace cranio

#endif
