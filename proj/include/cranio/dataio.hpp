#ifndef CRANIO_DATAIO_HPP
#define CRANIO_DATAIO_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cranio/grid.hpp"

namespace cranio {

struct InvalidCase : Error {
    explicit InvalidCase(const std::string& what)
        : Error(ErrorCategory::data, "InvalidCase: " + what) {}
};

// One training/evaluation unit: complete skull, defective skull and the
// defect, all on a shared lattice with defective = complete minus defect.
struct CaseRecord {
    std::string case_id;
    BinaryGrid complete;
    BinaryGrid defective;
    BinaryGrid defect;
};

// Checks the CaseRecord invariants. Disjointness/union violations up to
// tolerance_frac (fraction of |complete|) are auto-corrected
// (defect := defect and-not defective, complete := defective or defect);
// anything above throws InvalidCase. Synthetic cases use tolerance 0.
void validate_case(CaseRecord& rec, double tolerance_frac = 0.0);

enum class DefectType { SphericalCap, Box, Composite };

struct SyntheticConfig {
    Index3 grid_dims{64, 56, 64};
    Vec3 spacing{1.0, 1.0, 1.0};
    double shell_radius_mm = 16.0;
    double shell_thickness_mm = 4.0;
    double axis_jitter = 0.12;       // relative semi-axis perturbation
    DefectType defect_type = DefectType::SphericalCap;
    double defect_fraction = 0.12;   // target |defect| / |complete|
};

// Deterministic per seed. The complete skull is an ellipsoidal shell with
// seed-jittered semi-axes; the defect is carved by a cutting solid placed on
// the outer surface.
CaseRecord generate_synthetic_case(std::uint64_t seed, const SyntheticConfig& config);

struct CaseRef {
    std::string case_id;
    std::string dir;       // directory containing the nrrd files
    bool has_complete = false;
    bool has_defective = false;
    bool has_defect = false;
};

// Scans dir for <case_id>/{complete,defective,defect}.nrrd, sorted by id.
std::vector<CaseRef> dataset_manifest(const std::string& dir);

// Deterministic train/validation split; train_fraction honored within one
// case, with at least one case on each side when possible.
std::pair<std::vector<CaseRef>, std::vector<CaseRef>> split_dataset(
    const std::vector<CaseRef>& manifest, double train_fraction, std::uint64_t seed);

// Loads and validates a case. require_all demands all three volumes
// (MissingFile otherwise); otherwise absent volumes stay empty (dims 0).
CaseRecord load_case(const CaseRef& ref, bool require_all = true, double tolerance_frac = 0.0);

void save_case(const CaseRecord& rec, const std::string& dataset_dir);

} // namespace cranio

#endif
