#include "cranio/stl_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace cranio {

namespace {

void put_f32(std::vector<char>& buf, float v) {
    char b[4];
    std::memcpy(b, &v, 4);
    buf.insert(buf.end(), b, b + 4);
}

} // namespace

void write_stl(const TriangleMesh& mesh, const std::string& path, StlFormat format) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw MissingFile("cannot open " + path + " for writing");

    if (format == StlFormat::Ascii) {
        out << "solid cranio\n";
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            const Vec3& n = mesh.normals[t];
            char buf[128];
            std::snprintf(buf, sizeof(buf), "facet normal %g %g %g\n", n[0], n[1], n[2]);
            out << buf << "  outer loop\n";
            for (int e = 0; e < 3; ++e) {
                const Vec3& v =
                    mesh.vertices[static_cast<std::size_t>(mesh.triangles[t][static_cast<std::size_t>(e)])];
                std::snprintf(buf, sizeof(buf), "    vertex %g %g %g\n", v[0], v[1], v[2]);
                out << buf;
            }
            out << "  endloop\nendfacet\n";
        }
        out << "endsolid cranio\n";
        return;
    }

    char header[80] = {0};
    std::snprintf(header, sizeof(header), "cranio binary stl");
    out.write(header, 80);
    std::uint32_t count = static_cast<std::uint32_t>(mesh.triangles.size());
    out.write(reinterpret_cast<const char*>(&count), 4);

    std::vector<char> buf;
    buf.reserve(mesh.triangles.size() * 50);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Vec3& n = t < mesh.normals.size() ? mesh.normals[t] : Vec3{0, 0, 1};
        put_f32(buf, static_cast<float>(n[0]));
        put_f32(buf, static_cast<float>(n[1]));
        put_f32(buf, static_cast<float>(n[2]));
        for (int e = 0; e < 3; ++e) {
            const Vec3& v =
                mesh.vertices[static_cast<std::size_t>(mesh.triangles[t][static_cast<std::size_t>(e)])];
            put_f32(buf, static_cast<float>(v[0]));
            put_f32(buf, static_cast<float>(v[1]));
            put_f32(buf, static_cast<float>(v[2]));
        }
        buf.push_back(0);
        buf.push_back(0);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw CorruptFile("write failed for " + path);
}

TriangleMesh read_stl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile("cannot open " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 84) throw CorruptFile(path + ": too short for binary STL");

    std::uint32_t count;
    std::memcpy(&count, bytes.data() + 80, 4);
    if (bytes.size() != 84 + 50ull * count)
        throw CorruptFile(path + ": size does not match the triangle count");

    TriangleMesh mesh;
    mesh.vertices.reserve(count * 3ull);
    mesh.triangles.reserve(count);
    mesh.normals.reserve(count);
    const char* p = bytes.data() + 84;
    for (std::uint32_t t = 0; t < count; ++t, p += 50) {
        float f[12];
        std::memcpy(f, p, 48);
        mesh.normals.push_back({f[0], f[1], f[2]});
        int base = static_cast<int>(mesh.vertices.size());
        for (int e = 0; e < 3; ++e)
            mesh.vertices.push_back({f[3 + 3 * e], f[4 + 3 * e], f[5 + 3 * e]});
        mesh.triangles.push_back({base, base + 1, base + 2});
    }
    return mesh;
}

} // namespace cranio
