#include "cranio/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace cranio {

void TriangleMesh::recompute_normals() {
    normals.resize(triangles.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const Vec3& a = vertices[static_cast<std::size_t>(triangles[t][0])];
        const Vec3& b = vertices[static_cast<std::size_t>(triangles[t][1])];
        const Vec3& c = vertices[static_cast<std::size_t>(triangles[t][2])];
        Vec3 n = cross(b - a, c - a);
        double len = norm(n);
        normals[t] = len > 0 ? n * (1.0 / len) : Vec3{0, 0, 1};
    }
}

namespace {

// cube corners in Bourke order
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
// cube edges as corner pairs
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
// edge -> (corner offset of the lattice edge tail, axis)
struct EdgeKeyInfo {
    int di, dj, dk, axis;
};
constexpr EdgeKeyInfo kEdgeKey[12] = {
    {0, 0, 0, 0}, {1, 0, 0, 1}, {0, 1, 0, 0}, {0, 0, 0, 1},
    {0, 0, 1, 0}, {1, 0, 1, 1}, {0, 1, 1, 0}, {0, 0, 1, 1},
    {0, 0, 0, 2}, {1, 0, 0, 2}, {1, 1, 0, 2}, {0, 1, 0, 2},
};

} // namespace

TriangleMesh extract_isosurface(const ScalarGrid& field, double iso) {
    TriangleMesh mesh;
    const int nx = field.dims[0], ny = field.dims[1], nz = field.dims[2];
    if (nx < 2 || ny < 2 || nz < 2) return mesh;

    std::unordered_map<std::uint64_t, int> edge_vertex;
    edge_vertex.reserve(4096);
    auto edge_id = [&](int i, int j, int k, int axis) {
        return (static_cast<std::uint64_t>(i) +
                static_cast<std::uint64_t>(nx) *
                    (static_cast<std::uint64_t>(j) + static_cast<std::uint64_t>(ny) * k)) *
                   3 +
               static_cast<std::uint64_t>(axis);
    };

    double value[8];
    for (int k = 0; k + 1 < nz; ++k)
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i + 1 < nx; ++i) {
                int index = 0;
                for (int c = 0; c < 8; ++c) {
                    value[c] = field(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
                    if (value[c] >= iso) index |= 1 << c;
                }
                if (index == 0 || index == 255) continue;

                const signed char* tri = kMcTriangleTable[index];
                int vert_of_edge[12];
                for (int t = 0; tri[t] != -1; t += 3) {
                    for (int e = 0; e < 3; ++e) {
                        int edge = tri[t + e];
                        auto key = edge_id(i + kEdgeKey[edge].di, j + kEdgeKey[edge].dj,
                                           k + kEdgeKey[edge].dk, kEdgeKey[edge].axis);
                        auto it = edge_vertex.find(key);
                        if (it != edge_vertex.end()) {
                            vert_of_edge[edge] = it->second;
                            continue;
                        }
                        int ca = kEdge[edge][0], cb = kEdge[edge][1];
                        double va = value[ca], vb = value[cb];
                        double t01 = (vb != va) ? (iso - va) / (vb - va) : 0.5;
                        t01 = std::clamp(t01, 0.0, 1.0);
                        Vec3 pa = field.position(i + kCorner[ca][0], j + kCorner[ca][1],
                                                 k + kCorner[ca][2]);
                        Vec3 pb = field.position(i + kCorner[cb][0], j + kCorner[cb][1],
                                                 k + kCorner[cb][2]);
                        Vec3 p = pa + (pb - pa) * t01;
                        int id = static_cast<int>(mesh.vertices.size());
                        mesh.vertices.push_back(p);
                        edge_vertex.emplace(key, id);
                        vert_of_edge[edge] = id;
                    }
                    // the table winds for inside = below iso; inside-high flips it
                    mesh.triangles.push_back(
                        {vert_of_edge[tri[t]], vert_of_edge[tri[t + 2]], vert_of_edge[tri[t + 1]]});
                }
            }
    mesh.recompute_normals();
    return mesh;
}

namespace {

std::vector<std::vector<int>> vertex_neighbors(const TriangleMesh& mesh) {
    std::vector<std::vector<int>> nb(mesh.vertices.size());
    for (const auto& t : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            int a = t[static_cast<std::size_t>(e)], b = t[(e + 1) % 3];
            nb[static_cast<std::size_t>(a)].push_back(b);
            nb[static_cast<std::size_t>(b)].push_back(a);
        }
    for (auto& v : nb) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return nb;
}

void relax(std::vector<Vec3>& pos, const std::vector<std::vector<int>>& nb, double coeff) {
    std::vector<Vec3> next(pos.size());
    for (std::size_t v = 0; v < pos.size(); ++v) {
        if (nb[v].empty()) {
            next[v] = pos[v];
            continue;
        }
        Vec3 mean{0, 0, 0};
        for (int u : nb[v]) mean = mean + pos[static_cast<std::size_t>(u)];
        mean = mean * (1.0 / static_cast<double>(nb[v].size()));
        next[v] = pos[v] + (mean - pos[v]) * coeff;
    }
    pos.swap(next);
}

} // namespace

TriangleMesh sinc_smooth(const TriangleMesh& mesh, int iterations, double passband) {
    TriangleMesh out = mesh;
    if (iterations <= 0 || mesh.vertices.empty()) return out;

    // Taubin lambda/mu pair from the passband: k_pb = 1/lambda + 1/mu
    const double lambda = 0.5;
    double mu = 1.0 / (passband - 1.0 / lambda);

    auto nb = vertex_neighbors(out);
    for (int it = 0; it < iterations; ++it) {
        relax(out.vertices, nb, lambda);
        relax(out.vertices, nb, mu);
    }
    out.recompute_normals();
    return out;
}

namespace {

struct MeshUnionFind {
    std::vector<int> parent;
    explicit MeshUnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

std::uint64_t undirected_edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

} // namespace

TriangleMesh clean_mesh(const TriangleMesh& mesh, int min_component_triangles) {
    // drop degenerate triangles first
    std::vector<std::array<int, 3>> tris;
    tris.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
        const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[0])];
        const Vec3& b = mesh.vertices[static_cast<std::size_t>(t[1])];
        const Vec3& c = mesh.vertices[static_cast<std::size_t>(t[2])];
        if (norm(cross(b - a, c - a)) < 1e-12) continue;
        tris.push_back(t);
    }

    // connected components over shared edges
    MeshUnionFind uf(tris.size());
    std::unordered_map<std::uint64_t, int> first_tri_on_edge;
    first_tri_on_edge.reserve(tris.size() * 2);
    for (std::size_t t = 0; t < tris.size(); ++t)
        for (int e = 0; e < 3; ++e) {
            auto key = undirected_edge_key(tris[t][static_cast<std::size_t>(e)], tris[t][(e + 1) % 3]);
            auto [it, inserted] = first_tri_on_edge.emplace(key, static_cast<int>(t));
            if (!inserted) uf.unite(static_cast<int>(t), it->second);
        }
    std::vector<int> comp_size(tris.size(), 0);
    for (std::size_t t = 0; t < tris.size(); ++t)
        ++comp_size[static_cast<std::size_t>(uf.find(static_cast<int>(t)))];

    TriangleMesh out;
    std::vector<int> vmap(mesh.vertices.size(), -1);
    for (std::size_t t = 0; t < tris.size(); ++t) {
        if (comp_size[static_cast<std::size_t>(uf.find(static_cast<int>(t)))] <
            min_component_triangles)
            continue;
        std::array<int, 3> nt;
        for (int e = 0; e < 3; ++e) {
            int v = tris[t][static_cast<std::size_t>(e)];
            if (vmap[static_cast<std::size_t>(v)] < 0) {
                vmap[static_cast<std::size_t>(v)] = static_cast<int>(out.vertices.size());
                out.vertices.push_back(mesh.vertices[static_cast<std::size_t>(v)]);
            }
            nt[static_cast<std::size_t>(e)] = vmap[static_cast<std::size_t>(v)];
        }
        out.triangles.push_back(nt);
    }
    out.recompute_normals();
    return out;
}

TriangleMesh clip_axial(const TriangleMesh& mesh, int axis, double plane_mm, bool keep_below) {
    TriangleMesh out;
    auto side = [&](const Vec3& p) {
        double d = p[axis] - plane_mm;
        return keep_below ? -d : d; // >= 0 means kept
    };
    auto lerp_plane = [&](const Vec3& a, const Vec3& b) {
        double da = side(a), db = side(b);
        double t = da / (da - db);
        return a + (b - a) * t;
    };

    std::vector<std::pair<Vec3, Vec3>> cut_segments;
    for (const auto& t : mesh.triangles) {
        Vec3 p[3] = {mesh.vertices[static_cast<std::size_t>(t[0])],
                     mesh.vertices[static_cast<std::size_t>(t[1])],
                     mesh.vertices[static_cast<std::size_t>(t[2])]};
        double s[3] = {side(p[0]), side(p[1]), side(p[2])};
        bool in[3] = {s[0] >= 0, s[1] >= 0, s[2] >= 0};
        int kept = in[0] + in[1] + in[2];
        auto add_tri = [&](const Vec3& a, const Vec3& b, const Vec3& c) {
            int base = static_cast<int>(out.vertices.size());
            out.vertices.push_back(a);
            out.vertices.push_back(b);
            out.vertices.push_back(c);
            out.triangles.push_back({base, base + 1, base + 2});
        };
        if (kept == 3) {
            add_tri(p[0], p[1], p[2]);
        } else if (kept == 1) {
            int a = in[0] ? 0 : (in[1] ? 1 : 2);
            Vec3 q1 = lerp_plane(p[a], p[(a + 1) % 3]);
            Vec3 q2 = lerp_plane(p[a], p[(a + 2) % 3]);
            add_tri(p[a], q1, q2);
            cut_segments.emplace_back(q1, q2);
        } else if (kept == 2) {
            int o = !in[0] ? 0 : (!in[1] ? 1 : 2);
            int a = (o + 1) % 3, b = (o + 2) % 3;
            Vec3 q1 = lerp_plane(p[b], p[o]);
            Vec3 q2 = lerp_plane(p[a], p[o]);
            add_tri(p[a], p[b], q1);
            add_tri(p[a], q1, q2);
            cut_segments.emplace_back(q1, q2);
        }
    }

    // cap: fan each cut loop around its centroid (segments are oriented so the
    // cap winding faces the removed half)
    if (!cut_segments.empty()) {
        Vec3 centroid{0, 0, 0};
        for (const auto& s : cut_segments) centroid = centroid + (s.first + s.second) * 0.5;
        centroid = centroid * (1.0 / static_cast<double>(cut_segments.size()));
        for (const auto& s : cut_segments) {
            int base = static_cast<int>(out.vertices.size());
            out.vertices.push_back(s.second);
            out.vertices.push_back(s.first);
            out.vertices.push_back(centroid);
            out.triangles.push_back({base, base + 1, base + 2});
        }
    }

    // weld duplicated vertices so the cap fuses with the wall
    std::map<std::array<long long, 3>, int> welded;
    std::vector<int> vmap(out.vertices.size());
    TriangleMesh final_mesh;
    auto quantize = [](const Vec3& p) {
        return std::array<long long, 3>{static_cast<long long>(std::llround(p[0] * 1e7)),
                                        static_cast<long long>(std::llround(p[1] * 1e7)),
                                        static_cast<long long>(std::llround(p[2] * 1e7))};
    };
    for (std::size_t v = 0; v < out.vertices.size(); ++v) {
        auto key = quantize(out.vertices[v]);
        auto it = welded.find(key);
        if (it == welded.end()) {
            int id = static_cast<int>(final_mesh.vertices.size());
            welded.emplace(key, id);
            final_mesh.vertices.push_back(out.vertices[v]);
            vmap[v] = id;
        } else {
            vmap[v] = it->second;
        }
    }
    for (const auto& t : out.triangles) {
        std::array<int, 3> nt{vmap[static_cast<std::size_t>(t[0])],
                              vmap[static_cast<std::size_t>(t[1])],
                              vmap[static_cast<std::size_t>(t[2])]};
        if (nt[0] == nt[1] || nt[1] == nt[2] || nt[0] == nt[2]) continue;
        final_mesh.triangles.push_back(nt);
    }
    final_mesh.recompute_normals();
    return final_mesh;
}

TriangleMesh mask_to_mesh(const BinaryGrid& mask, const MeshConfig& config) {
    ScalarGrid field = gaussian_smooth(mask, config.gaussian_sigma);
    TriangleMesh mesh = extract_isosurface(field, config.iso);
    mesh = sinc_smooth(mesh, config.sinc_iterations, config.sinc_passband);
    return clean_mesh(mesh, config.min_component_triangles);
}

double mesh_area(const TriangleMesh& mesh) {
    double area = 0;
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[0])];
        const Vec3& b = mesh.vertices[static_cast<std::size_t>(t[1])];
        const Vec3& c = mesh.vertices[static_cast<std::size_t>(t[2])];
        area += 0.5 * norm(cross(b - a, c - a));
    }
    return area;
}

double mesh_signed_volume(const TriangleMesh& mesh) {
    double vol = 0;
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[0])];
        const Vec3& b = mesh.vertices[static_cast<std::size_t>(t[1])];
        const Vec3& c = mesh.vertices[static_cast<std::size_t>(t[2])];
        vol += dot(a, cross(b, c)) / 6.0;
    }
    return vol;
}

bool mesh_watertight(const TriangleMesh& mesh) {
    if (mesh.triangles.empty()) return false;
    std::unordered_map<std::uint64_t, int> edge_count;
    edge_count.reserve(mesh.triangles.size() * 2);
    for (const auto& t : mesh.triangles)
        for (int e = 0; e < 3; ++e)
            ++edge_count[undirected_edge_key(t[static_cast<std::size_t>(e)], t[(e + 1) % 3])];
    for (const auto& [k, c] : edge_count)
        if (c != 2) return false;
    return true;
}

int mesh_euler_characteristic(const TriangleMesh& mesh) {
    std::unordered_map<std::uint64_t, int> edges;
    for (const auto& t : mesh.triangles)
        for (int e = 0; e < 3; ++e)
            edges.emplace(undirected_edge_key(t[static_cast<std::size_t>(e)], t[(e + 1) % 3]), 1);
    return static_cast<int>(mesh.vertices.size()) - static_cast<int>(edges.size()) +
           static_cast<int>(mesh.triangles.size());
}

} // namespace cranio
