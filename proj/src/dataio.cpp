#include "cranio/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "cranio/nrrd.hpp"
#include "cranio/rng.hpp"

namespace fs = std::filesystem;

namespace cranio {

void validate_case(CaseRecord& rec, double tolerance_frac) {
    require_same_geometry(rec.complete, rec.defective, "case " + rec.case_id);
    require_same_geometry(rec.complete, rec.defect, "case " + rec.case_id);
    std::size_t total = count_nonzero(rec.complete);
    if (total == 0) throw InvalidCase("case " + rec.case_id + ": empty complete skull");

    std::size_t violations = 0;
    for (std::size_t i = 0; i < rec.complete.size(); ++i) {
        std::uint8_t d = rec.defective.data[i], f = rec.defect.data[i], c = rec.complete.data[i];
        if ((d & f) || ((d | f) != c)) ++violations;
    }
    if (violations == 0) return;
    if (static_cast<double>(violations) > tolerance_frac * static_cast<double>(total))
        throw InvalidCase("case " + rec.case_id + ": " + std::to_string(violations) +
                          " voxels violate the union/disjointness invariants");
    // small violations in real ground truth: remove overlap, rebuild the union
    rec.defect = logical(rec.defect, rec.defective, MaskOp::AndNot);
    rec.complete = logical(rec.defective, rec.defect, MaskOp::Or);
}

namespace {

struct Ellipsoid {
    Vec3 center;
    Vec3 semi; // mm
    double eval(const Vec3& p) const {
        double s = 0;
        for (int ax = 0; ax < 3; ++ax) {
            double d = (p[ax] - center[ax]) / semi[ax];
            s += d * d;
        }
        return s;
    }
    // distance from center to the surface along unit direction d
    double surface_radius(const Vec3& d) const {
        double s = 0;
        for (int ax = 0; ax < 3; ++ax) s += (d[ax] / semi[ax]) * (d[ax] / semi[ax]);
        return 1.0 / std::sqrt(s);
    }
};

Vec3 random_unit(Rng& rng) {
    for (;;) {
        Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        double n = norm(v);
        if (n > 1e-3 && n <= 1.0) return v * (1.0 / n);
    }
}

BinaryGrid carve_ball(const BinaryGrid& complete, const Vec3& center, double radius) {
    BinaryGrid cut(complete.dims, complete.spacing, complete.origin);
    std::size_t idx = 0;
    const double r2 = radius * radius;
    for (int k = 0; k < complete.dims[2]; ++k)
        for (int j = 0; j < complete.dims[1]; ++j)
            for (int i = 0; i < complete.dims[0]; ++i, ++idx) {
                if (!complete.data[idx]) continue;
                Vec3 p = complete.position(i, j, k);
                Vec3 d = p - center;
                if (dot(d, d) <= r2) cut.data[idx] = 1;
            }
    return cut;
}

BinaryGrid carve_box(const BinaryGrid& complete, const Vec3& center, double half) {
    BinaryGrid cut(complete.dims, complete.spacing, complete.origin);
    std::size_t idx = 0;
    for (int k = 0; k < complete.dims[2]; ++k)
        for (int j = 0; j < complete.dims[1]; ++j)
            for (int i = 0; i < complete.dims[0]; ++i, ++idx) {
                if (!complete.data[idx]) continue;
                Vec3 p = complete.position(i, j, k);
                if (std::abs(p[0] - center[0]) <= half && std::abs(p[1] - center[1]) <= half &&
                    std::abs(p[2] - center[2]) <= half)
                    cut.data[idx] = 1;
            }
    return cut;
}

} // namespace

CaseRecord generate_synthetic_case(std::uint64_t seed, const SyntheticConfig& config) {
    if (config.shell_thickness_mm >= config.shell_radius_mm)
        throw DegenerateConfig("shell thickness must be below the radius");
    if (config.defect_fraction <= 0.0 || config.defect_fraction > 0.5)
        throw DegenerateConfig("defect fraction must be in (0, 0.5]");

    Rng rng(seed * 0x9e3779b97f4a7c15ULL + 0x2b5bf5d15ULL);

    BinaryGrid complete(config.grid_dims, config.spacing, {0, 0, 0});
    Ellipsoid outer;
    for (int ax = 0; ax < 3; ++ax)
        outer.center[ax] = 0.5 * (config.grid_dims[ax] - 1) * config.spacing[ax];
    for (int ax = 0; ax < 3; ++ax) {
        double jitter = rng.uniform(-config.axis_jitter, config.axis_jitter);
        outer.semi[ax] = config.shell_radius_mm * (1.0 + jitter);
        outer.center[ax] += rng.uniform(-1.0, 1.0) * config.spacing[ax];
    }
    Ellipsoid inner = outer;
    for (int ax = 0; ax < 3; ++ax)
        inner.semi[ax] = std::max(0.5, outer.semi[ax] - config.shell_thickness_mm);

    std::size_t idx = 0;
    for (int k = 0; k < config.grid_dims[2]; ++k)
        for (int j = 0; j < config.grid_dims[1]; ++j)
            for (int i = 0; i < config.grid_dims[0]; ++i, ++idx) {
                Vec3 p = complete.position(i, j, k);
                if (outer.eval(p) <= 1.0 && inner.eval(p) >= 1.0) complete.data[idx] = 1;
            }

    std::size_t shell_count = count_nonzero(complete);
    if (shell_count == 0)
        throw DegenerateConfig("shell is empty at the given dims/spacing");

    double mean_radius = (outer.semi[0] + outer.semi[1] + outer.semi[2]) / 3.0;

    CaseRecord rec;
    rec.case_id = "synthetic_" + std::to_string(seed);
    rec.complete = complete;

    // defect fraction jittered per case, cutter sized for a thin shell
    double frac = config.defect_fraction * rng.uniform(0.7, 1.3);
    double cutter_radius = 2.0 * mean_radius * std::sqrt(frac);

    const int max_attempts = 20;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Vec3 dir = random_unit(rng);
        Vec3 anchor = outer.center + dir * outer.surface_radius(dir);

        BinaryGrid defect;
        switch (config.defect_type) {
            case DefectType::SphericalCap:
                defect = carve_ball(complete, anchor, cutter_radius);
                break;
            case DefectType::Box:
                defect = carve_box(complete, anchor, cutter_radius * 0.85);
                break;
            case DefectType::Composite: {
                defect = carve_ball(complete, anchor, cutter_radius * 0.8);
                Vec3 dir2 = random_unit(rng);
                Vec3 anchor2 = outer.center + dir2 * outer.surface_radius(dir2);
                BinaryGrid second = carve_box(complete, anchor2, cutter_radius * 0.6);
                defect = logical(defect, second, MaskOp::Or);
                break;
            }
        }

        std::size_t defect_count = count_nonzero(defect);
        if (defect_count == 0 || defect_count >= shell_count) continue;

        rec.defect = defect;
        rec.defective = logical(complete, defect, MaskOp::AndNot);
        validate_case(rec, 0.0);
        return rec;
    }
    throw DegenerateConfig("could not place a nonempty defect after " +
                           std::to_string(max_attempts) + " attempts");
}

std::vector<CaseRef> dataset_manifest(const std::string& dir) {
    if (!fs::is_directory(dir)) throw MissingFile("dataset directory " + dir + " does not exist");
    std::vector<CaseRef> refs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_directory()) continue;
        CaseRef ref;
        ref.case_id = entry.path().filename().string();
        ref.dir = entry.path().string();
        ref.has_complete = fs::exists(entry.path() / "complete.nrrd");
        ref.has_defective = fs::exists(entry.path() / "defective.nrrd");
        ref.has_defect = fs::exists(entry.path() / "defect.nrrd");
        if (ref.has_complete || ref.has_defective || ref.has_defect) refs.push_back(ref);
    }
    std::sort(refs.begin(), refs.end(),
              [](const CaseRef& a, const CaseRef& b) { return a.case_id < b.case_id; });
    return refs;
}

std::pair<std::vector<CaseRef>, std::vector<CaseRef>> split_dataset(
    const std::vector<CaseRef>& manifest, double train_fraction, std::uint64_t seed) {
    if (manifest.empty()) throw EmptyDataset();
    if (train_fraction <= 0.0 || train_fraction > 1.0)
        throw ConfigError("train fraction must be in (0, 1]");

    std::vector<std::size_t> order(manifest.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    auto n = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(manifest.size())));
    if (train_fraction < 1.0 && n == manifest.size()) --n;
    if (n == 0) n = 1;

    std::pair<std::vector<CaseRef>, std::vector<CaseRef>> out;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < n ? out.first : out.second).push_back(manifest[order[i]]);
    return out;
}

CaseRecord load_case(const CaseRef& ref, bool require_all, double tolerance_frac) {
    CaseRecord rec;
    rec.case_id = ref.case_id;
    auto path = [&](const char* name) { return (fs::path(ref.dir) / name).string(); };
    if (require_all && (!ref.has_complete || !ref.has_defective || !ref.has_defect))
        throw MissingFile("case " + ref.case_id + " is missing volumes required for training");
    if (ref.has_complete) rec.complete = read_nrrd_binary(path("complete.nrrd"));
    if (ref.has_defective) rec.defective = read_nrrd_binary(path("defective.nrrd"));
    if (ref.has_defect) rec.defect = read_nrrd_binary(path("defect.nrrd"));
    if (ref.has_complete && ref.has_defective && ref.has_defect)
        validate_case(rec, tolerance_frac);
    return rec;
}

void save_case(const CaseRecord& rec, const std::string& dataset_dir) {
    fs::path dir = fs::path(dataset_dir) / rec.case_id;
    fs::create_directories(dir);
    write_nrrd(rec.complete, (dir / "complete.nrrd").string());
    write_nrrd(rec.defective, (dir / "defective.nrrd").string());
    write_nrrd(rec.defect, (dir / "defect.nrrd").string());
}

} // namespace cranio
