#ifndef CRANIO_MESH_HPP
#define CRANIO_MESH_HPP

#include <array>
#include <string>
#include <vector>

#include "cranio/grid.hpp"
#include "cranio/smoothing.hpp"

namespace cranio {

// Indexed triangle surface in physical millimeters.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Vec3> normals; // per triangle, unit length

    void recompute_normals();
};

extern const signed char kMcTriangleTable[256][16];

// Marching cubes on the voxel-center lattice with linear edge interpolation.
// Vertices are welded on shared grid edges, so the surface is watertight for
// content at least one voxel away from the grid boundary. Inside = value >= iso.
TriangleMesh extract_isosurface(const ScalarGrid& field, double iso = 0.5);

// Windowed-sinc low-pass vertex smoothing: per pass one positive and one
// negative uniform-Laplacian relaxation whose coefficients follow from the
// passband. Connectivity is unchanged.
TriangleMesh sinc_smooth(const TriangleMesh& mesh, int iterations = 20, double passband = 0.1);

// Drops edge-connected components below min_component_triangles, removes
// degenerate triangles and unreferenced vertices.
TriangleMesh clean_mesh(const TriangleMesh& mesh, int min_component_triangles = 50);

// Clips the mesh with an axis-aligned plane, capping the cut with a fan per
// boundary loop (the printer-bed halving step).
TriangleMesh clip_axial(const TriangleMesh& mesh, int axis, double plane_mm, bool keep_below);

// full chain: smooth -> isosurface -> sinc -> clean
struct MeshConfig {
    double gaussian_sigma = 1.0;
    double iso = 0.5;
    int sinc_iterations = 20;
    double sinc_passband = 0.1;
    int min_component_triangles = 50;
};
TriangleMesh mask_to_mesh(const BinaryGrid& mask, const MeshConfig& config = {});

// diagnostics used by tests and the acceptance suite
double mesh_area(const TriangleMesh& mesh);
double mesh_signed_volume(const TriangleMesh& mesh);
bool mesh_watertight(const TriangleMesh& mesh); // every edge on exactly 2 triangles
int mesh_euler_characteristic(const TriangleMesh& mesh);

} // namespace cranio

#endif
