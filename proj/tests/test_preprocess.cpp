#include "doctest.h"

#include "cranio/dataio.hpp"
#include "cranio/metrics.hpp"
#include "cranio/morphology.hpp"
#include "cranio/preprocess.hpp"
#include "cranio/rng.hpp"

using namespace cranio;

namespace {

BinaryGrid shell_ball(Index3 dims, Vec3 spacing, double radius_mm, double thickness_mm) {
    BinaryGrid g(dims, spacing);
    Vec3 c{0.5 * (dims[0] - 1) * spacing[0], 0.5 * (dims[1] - 1) * spacing[1],
           0.5 * (dims[2] - 1) * spacing[2]};
    std::size_t idx = 0;
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i, ++idx) {
                Vec3 p = g.position(i, j, k);
                double r = norm(p - c);
                if (r <= radius_mm && r >= radius_mm - thickness_mm) g.data[idx] = 1;
            }
    return g;
}

} // namespace

TEST_CASE("preprocess hits the full-scale canvas dims") {
    BinaryGrid skull = shell_ball({200, 170, 200}, {1, 1, 1}, 78.0, 6.0);
    PreprocessConfig cfg; // defaults: offset 20, 1mm, 240x200x240
    auto [pre, prov] = preprocess_case(skull, cfg);
    CHECK(pre.dims == Index3{240, 200, 240});
    CHECK_FALSE(prov.overflow);
    CHECK_FALSE(prov.resampled);
}

TEST_CASE("preprocess identity-spacing round trip is exact") {
    SyntheticConfig gen;
    auto rec = generate_synthetic_case(3, gen);
    PreprocessConfig cfg;
    cfg.offset = 4;
    cfg.target_dims = {48, 40, 48};
    cfg.target_spacing = {1, 1, 1};
    auto [pre, prov] = preprocess_case(rec.defective, cfg);
    CHECK(pre.dims == Index3{48, 40, 48});
    CHECK_FALSE(prov.resampled);

    auto back = invert_provenance(pre, prov);
    CHECK(back.data == rec.defective.data);
    CHECK(dsc(back, rec.defective) == 1.0);

    // the companion defect maps through the same record and returns exactly
    auto defect_pre = apply_provenance(rec.defect, prov);
    auto defect_back = invert_provenance(defect_pre, prov);
    CHECK(defect_back.data == rec.defect.data);
}

TEST_CASE("desk-scale config passthrough") {
    BinaryGrid skull = shell_ball({80, 70, 80}, {1.5, 1.5, 1.5}, 50.0, 7.0);
    PreprocessConfig cfg;
    cfg.offset = 4;
    cfg.target_spacing = {2.5, 2.5, 2.5};
    cfg.target_dims = {48, 40, 48};
    auto [pre, prov] = preprocess_case(skull, cfg);
    CHECK(pre.dims == Index3{48, 40, 48});
    CHECK(prov.resampled);
    CHECK(pre.spacing[0] == doctest::Approx(2.5));
}

TEST_CASE("resampling round trip keeps DSC >= 0.98 on thick shells") {
    // calvarial-thickness shell (5mm, >= 3 voxels at both spacings)
    BinaryGrid skull = shell_ball({70, 64, 70}, {0.8, 0.8, 0.8}, 22.0, 5.0);
    PreprocessConfig cfg;
    cfg.offset = 6;
    cfg.target_spacing = {1, 1, 1};
    cfg.target_dims = {64, 56, 64};
    auto [pre, prov] = preprocess_case(skull, cfg);
    CHECK(prov.resampled);
    auto back = invert_provenance(pre, prov);
    CHECK(dsc(back, skull) >= 0.98);
}

TEST_CASE("postprocess closes the rim gap and stays off the skull") {
    SyntheticConfig gen;
    gen.defect_fraction = 0.15;
    auto rec = generate_synthetic_case(9, gen);

    PreprocessConfig pcfg;
    pcfg.offset = 4;
    pcfg.target_dims = {48, 40, 48};
    auto [pre, prov] = preprocess_case(rec.defective, pcfg);

    // open a 2-voxel gap: erode the true defect so it pulls back from the rim
    BinaryGrid shrunk = erode(rec.defect, 2);
    REQUIRE(count_nonzero(shrunk) > 0);
    auto pred_pre = apply_provenance(shrunk, prov);

    PostprocessConfig post;
    post.closing_radius = 2;
    auto result = postprocess_defect(pred_pre, prov, rec.defective, post);

    CHECK(count_nonzero(logical(result, rec.defective, MaskOp::And)) == 0);

    // gap filled: the restored defect touches the skull again
    auto near_skull = dilate(rec.defective, 1);
    CHECK(count_nonzero(logical(result, near_skull, MaskOp::And)) > 0);
    // and it grew back beyond the eroded prediction
    CHECK(count_nonzero(result) > count_nonzero(shrunk));
}

TEST_CASE("postprocess keeps only the largest component") {
    SyntheticConfig gen;
    auto rec = generate_synthetic_case(21, gen);
    PreprocessConfig pcfg;
    pcfg.offset = 4;
    pcfg.target_dims = {48, 40, 48};
    auto [pre, prov] = preprocess_case(rec.defective, pcfg);

    auto pred_pre = apply_provenance(rec.defect, prov);
    // inject a far-away 5-voxel speck inside the canvas
    for (int t = 0; t < 5; ++t) pred_pre(2 + t, 2, 2) = 1;

    PostprocessConfig post;
    post.keep_components = 1;
    auto result = postprocess_defect(pred_pre, prov, rec.defective, post);
    auto cc = connected_components(result, 26);
    CHECK(cc.sizes.size() == 1);
}

TEST_CASE("postprocess output is always disjoint from the skull") {
    Rng rng(77);
    SyntheticConfig gen;
    for (std::uint64_t seed = 40; seed < 44; ++seed) {
        auto rec = generate_synthetic_case(seed, gen);
        PreprocessConfig pcfg;
        pcfg.offset = 4;
        pcfg.target_dims = {48, 40, 48};
        auto [pre, prov] = preprocess_case(rec.defective, pcfg);
        // noisy prediction: true defect plus random speckle
        auto pred = apply_provenance(rec.defect, prov);
        for (int t = 0; t < 200; ++t) {
            int i = static_cast<int>(rng.uniform_index(48));
            int j = static_cast<int>(rng.uniform_index(40));
            int k = static_cast<int>(rng.uniform_index(48));
            pred(i, j, k) = 1;
        }
        auto result = postprocess_defect(pred, prov, rec.defective);
        CHECK(count_nonzero(logical(result, rec.defective, MaskOp::And)) == 0);
    }
}
