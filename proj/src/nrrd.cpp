#include "cranio/nrrd.hpp"

#include <zlib.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace cranio {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<char> gzip_compress(const char* data, std::size_t n) {
    z_stream zs{};
    if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw CorruptFile("zlib deflateInit failed");
    std::vector<char> out;
    out.resize(deflateBound(&zs, static_cast<uLong>(n)));
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data));
    zs.avail_in = static_cast<uInt>(n);
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw CorruptFile("gzip compression failed");
    out.resize(zs.total_out);
    return out;
}

std::vector<char> gzip_decompress(const char* data, std::size_t n, std::size_t expected) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) throw CorruptFile("zlib inflateInit failed");
    std::vector<char> out(expected);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data));
    zs.avail_in = static_cast<uInt>(n);
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    std::size_t got = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || got != expected)
        throw CorruptFile("gzip data does not decompress to the expected size");
    return out;
}

struct RawVolume {
    Index3 dims;
    Vec3 spacing{1, 1, 1};
    Vec3 origin{0, 0, 0};
    NrrdType type;
    std::vector<char> bytes; // little-endian payload, x fastest
};

// Parses "(a,b,c)" with optional whitespace.
Vec3 parse_vec3(const std::string& s) {
    Vec3 v{};
    std::string t = trim(s);
    if (t.size() < 2 || t.front() != '(' || t.back() != ')')
        throw CorruptFile("malformed NRRD vector: " + s);
    t = t.substr(1, t.size() - 2);
    for (auto& c : t)
        if (c == ',') c = ' ';
    std::istringstream is(t);
    if (!(is >> v[0] >> v[1] >> v[2])) throw CorruptFile("malformed NRRD vector: " + s);
    return v;
}

RawVolume read_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile("cannot open " + path);

    std::string magic;
    if (!std::getline(in, magic)) throw CorruptFile(path + ": empty file");
    magic = trim(magic);
    if (magic.rfind("NRRD000", 0) != 0)
        throw CorruptFile(path + ": not an NRRD file (magic '" + magic + "')");

    RawVolume vol;
    vol.dims = {0, 0, 0};
    int dimension = 0;
    std::string type_str, encoding_str, endian_str = "little";
    bool have_sizes = false, have_type = false, have_encoding = false;
    bool have_directions = false, have_spacings = false;

    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) break; // header/data separator
        if (line[0] == '#') continue;
        if (line.find(":=") != std::string::npos) continue; // key/value pairs ignored
        std::size_t colon = line.find(':');
        if (colon == std::string::npos) throw CorruptFile(path + ": malformed header line: " + line);
        std::string field = lower(trim(line.substr(0, colon)));
        std::string value = trim(line.substr(colon + 1));

        if (field == "type") {
            type_str = lower(value);
            have_type = true;
        } else if (field == "dimension") {
            dimension = std::stoi(value);
        } else if (field == "sizes") {
            std::istringstream is(value);
            if (!(is >> vol.dims[0] >> vol.dims[1] >> vol.dims[2]))
                throw CorruptFile(path + ": malformed sizes: " + value);
            int extra;
            if (is >> extra) throw UnsupportedNrrdFeature(path + ": more than 3 sizes");
            have_sizes = true;
        } else if (field == "encoding") {
            encoding_str = lower(value);
            have_encoding = true;
        } else if (field == "endian") {
            endian_str = lower(value);
        } else if (field == "space directions") {
            std::istringstream is(value);
            std::string tok;
            int axis = 0;
            while (is >> tok) {
                if (axis >= 3) throw UnsupportedNrrdFeature(path + ": more than 3 space directions");
                if (lower(tok) == "none") continue; // non-spatial axis marker
                Vec3 dir = parse_vec3(tok);
                for (int c = 0; c < 3; ++c)
                    if (c != axis && std::abs(dir[c]) > 1e-12)
                        throw UnsupportedNrrdFeature(path + ": non-diagonal space directions");
                if (dir[axis] <= 0)
                    throw UnsupportedNrrdFeature(path + ": non-positive space direction");
                vol.spacing[axis] = dir[axis];
                ++axis;
            }
            have_directions = true;
        } else if (field == "spacings") {
            std::istringstream is(value);
            if (!(is >> vol.spacing[0] >> vol.spacing[1] >> vol.spacing[2]))
                throw CorruptFile(path + ": malformed spacings: " + value);
            have_spacings = true;
        } else if (field == "space origin") {
            vol.origin = parse_vec3(value);
        }
        // other fields (space, kinds, content, space units, ...) are ignored
    }

    if (!have_type || !have_sizes || !have_encoding)
        throw CorruptFile(path + ": missing required NRRD fields");
    if (dimension != 3) throw UnsupportedNrrdFeature(path + ": dimension != 3");
    if (vol.dims[0] < 1 || vol.dims[1] < 1 || vol.dims[2] < 1)
        throw CorruptFile(path + ": non-positive sizes");
    (void)have_directions;
    (void)have_spacings;

    std::size_t elem;
    if (type_str == "uint8" || type_str == "uchar" || type_str == "unsigned char" ||
        type_str == "uint8_t") {
        vol.type = NrrdType::UInt8;
        elem = 1;
    } else if (type_str == "int16" || type_str == "short" || type_str == "short int" ||
               type_str == "signed short" || type_str == "int16_t") {
        vol.type = NrrdType::Int16;
        elem = 2;
    } else if (type_str == "float") {
        vol.type = NrrdType::Float32;
        elem = 4;
    } else {
        throw UnsupportedNrrdFeature(path + ": type " + type_str);
    }
    if (elem > 1 && endian_str != "little")
        throw UnsupportedNrrdFeature(path + ": big-endian data");

    std::size_t count = static_cast<std::size_t>(vol.dims[0]) * vol.dims[1] * vol.dims[2];
    std::size_t expected = count * elem;

    std::vector<char> payload((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());

    if (encoding_str == "raw") {
        if (payload.size() < expected) throw CorruptFile(path + ": truncated raw data");
        payload.resize(expected);
        vol.bytes = std::move(payload);
    } else if (encoding_str == "gzip" || encoding_str == "gz") {
        vol.bytes = gzip_decompress(payload.data(), payload.size(), expected);
    } else {
        throw UnsupportedNrrdFeature(path + ": encoding " + encoding_str);
    }
    return vol;
}

void write_raw(const RawVolume& vol, const std::string& path, NrrdEncoding encoding) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw MissingFile("cannot open " + path + " for writing");

    const char* type_str = vol.type == NrrdType::UInt8   ? "uint8"
                           : vol.type == NrrdType::Int16 ? "int16"
                                                         : "float";
    char buf[256];
    out << "NRRD0004\n";
    out << "type: " << type_str << "\n";
    out << "dimension: 3\n";
    out << "sizes: " << vol.dims[0] << " " << vol.dims[1] << " " << vol.dims[2] << "\n";
    out << "space dimension: 3\n";
    std::snprintf(buf, sizeof(buf), "space directions: (%.17g,0,0) (0,%.17g,0) (0,0,%.17g)\n",
                  vol.spacing[0], vol.spacing[1], vol.spacing[2]);
    out << buf;
    std::snprintf(buf, sizeof(buf), "space origin: (%.17g,%.17g,%.17g)\n", vol.origin[0],
                  vol.origin[1], vol.origin[2]);
    out << buf;
    if (vol.type != NrrdType::UInt8) out << "endian: little\n";
    out << "encoding: " << (encoding == NrrdEncoding::Raw ? "raw" : "gzip") << "\n";
    out << "\n";

    if (encoding == NrrdEncoding::Raw) {
        out.write(vol.bytes.data(), static_cast<std::streamsize>(vol.bytes.size()));
    } else {
        auto compressed = gzip_compress(vol.bytes.data(), vol.bytes.size());
        out.write(compressed.data(), static_cast<std::streamsize>(compressed.size()));
    }
    if (!out) throw CorruptFile("write failed for " + path);
}

} // namespace

ScalarGrid read_nrrd_scalar(const std::string& path) {
    RawVolume vol = read_raw(path);
    ScalarGrid grid(vol.dims, vol.spacing, vol.origin);
    std::size_t n = grid.size();
    switch (vol.type) {
        case NrrdType::UInt8: {
            const auto* p = reinterpret_cast<const std::uint8_t*>(vol.bytes.data());
            for (std::size_t i = 0; i < n; ++i) grid.data[i] = p[i];
            break;
        }
        case NrrdType::Int16: {
            const auto* p = reinterpret_cast<const char*>(vol.bytes.data());
            for (std::size_t i = 0; i < n; ++i) {
                std::int16_t v;
                std::memcpy(&v, p + 2 * i, 2);
                grid.data[i] = v;
            }
            break;
        }
        case NrrdType::Float32: {
            const auto* p = reinterpret_cast<const char*>(vol.bytes.data());
            for (std::size_t i = 0; i < n; ++i) {
                float v;
                std::memcpy(&v, p + 4 * i, 4);
                grid.data[i] = v;
            }
            break;
        }
    }
    return grid;
}

BinaryGrid read_nrrd_binary(const std::string& path) {
    ScalarGrid s = read_nrrd_scalar(path);
    BinaryGrid grid(s.dims, s.spacing, s.origin);
    for (std::size_t i = 0; i < s.size(); ++i) grid.data[i] = (s.data[i] != 0.0) ? 1 : 0;
    return grid;
}

void write_nrrd(const BinaryGrid& grid, const std::string& path, NrrdEncoding encoding) {
    RawVolume vol;
    vol.dims = grid.dims;
    vol.spacing = grid.spacing;
    vol.origin = grid.origin;
    vol.type = NrrdType::UInt8;
    vol.bytes.assign(reinterpret_cast<const char*>(grid.data.data()),
                     reinterpret_cast<const char*>(grid.data.data()) + grid.size());
    write_raw(vol, path, encoding);
}

void write_nrrd(const ScalarGrid& grid, const std::string& path, NrrdType type,
                NrrdEncoding encoding) {
    RawVolume vol;
    vol.dims = grid.dims;
    vol.spacing = grid.spacing;
    vol.origin = grid.origin;
    vol.type = type;
    std::size_t n = grid.size();
    switch (type) {
        case NrrdType::UInt8: {
            vol.bytes.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                vol.bytes[i] = static_cast<char>(static_cast<std::uint8_t>(grid.data[i]));
            break;
        }
        case NrrdType::Int16: {
            vol.bytes.resize(2 * n);
            for (std::size_t i = 0; i < n; ++i) {
                auto v = static_cast<std::int16_t>(grid.data[i]);
                std::memcpy(vol.bytes.data() + 2 * i, &v, 2);
            }
            break;
        }
        case NrrdType::Float32: {
            vol.bytes.resize(4 * n);
            for (std::size_t i = 0; i < n; ++i) {
                auto v = static_cast<float>(grid.data[i]);
                std::memcpy(vol.bytes.data() + 4 * i, &v, 4);
            }
            break;
        }
    }
    write_raw(vol, path, encoding);
}

} // namespace cranio
