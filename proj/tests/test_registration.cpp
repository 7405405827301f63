#include "doctest.h"

#include <cmath>

#include "cranio/dataio.hpp"
#include "cranio/metrics.hpp"
#include "cranio/registration.hpp"
#include "cranio/sampling.hpp"
#include "cranio/rng.hpp"
#include "cranio/smoothing.hpp"

using namespace cranio;

namespace {

SyntheticConfig small_cfg() {
    SyntheticConfig cfg;
    cfg.grid_dims = {48, 40, 48};
    cfg.shell_radius_mm = 14.0;
    cfg.shell_thickness_mm = 4.0;
    cfg.defect_fraction = 0.12;
    return cfg;
}

BinaryGrid shifted_copy(const BinaryGrid& g, Index3 d) {
    BinaryGrid out(g.dims, g.spacing, g.origin);
    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i) {
                int ni = i + d[0], nj = j + d[1], nk = k + d[2];
                if (g(i, j, k) && out.in_bounds(ni, nj, nk)) out(ni, nj, nk) = 1;
            }
    return out;
}

// smooth small random displacement field
VectorGrid random_smooth_field(Index3 dims, double amplitude, Rng& rng) {
    VectorGrid u(dims, {1, 1, 1}, {0, 0, 0});
    for (int c = 0; c < 3; ++c) {
        ScalarGrid noise(dims);
        for (auto& v : noise.data) v = rng.normal();
        ScalarGrid sm = gaussian_smooth(noise, 3.0);
        double peak = 0;
        for (auto v : sm.data) peak = std::max(peak, std::abs(v));
        double s = peak > 0 ? amplitude / peak : 0.0;
        for (std::size_t q = 0; q < u.size(); ++q) u.data[q][c] = sm.data[q] * s;
    }
    return u;
}

} // namespace

TEST_CASE("warp with the zero field is the identity") {
    auto rec = generate_synthetic_case(1, small_cfg());
    VectorGrid zero(rec.complete.dims, rec.complete.spacing, rec.complete.origin, Vec3{0, 0, 0});
    CHECK(warp(rec.complete, zero, Interp::Nearest).data == rec.complete.data);
    CHECK(warp(rec.complete, zero, Interp::Trilinear).data == rec.complete.data);
}

TEST_CASE("constant field shifts content the opposite way") {
    BinaryGrid g({12, 12, 12});
    g(6, 6, 6) = 1;
    VectorGrid u(g.dims, g.spacing, g.origin, Vec3{-2, 0, 0});
    auto w = warp(g, u, Interp::Nearest);
    CHECK(w(8, 6, 6) == 1);
    CHECK(count_nonzero(w) == 1);
}

TEST_CASE("warp round trip through the numeric inverse field") {
    Rng rng(7);
    auto rec = generate_synthetic_case(2, small_cfg());
    VectorGrid u = random_smooth_field(rec.complete.dims, 2.0, rng);

    // fixed-point inverse: ubar(x) = -u(x + ubar(x))
    VectorGrid ubar(u.dims, u.spacing, u.origin, Vec3{0, 0, 0});
    for (int it = 0; it < 20; ++it) {
        VectorGrid next = ubar;
        std::size_t idx = 0;
        for (int k = 0; k < u.dims[2]; ++k)
            for (int j = 0; j < u.dims[1]; ++j)
                for (int i = 0; i < u.dims[0]; ++i, ++idx) {
                    const Vec3& b = ubar.data[idx];
                    // sample u at x + ubar(x)
                    double x = i + b[0], y = j + b[1], z = k + b[2];
                    Vec3 s{0, 0, 0};
                    if (x > -1 && y > -1 && z > -1 && x < u.dims[0] && y < u.dims[1] &&
                        z < u.dims[2]) {
                        int i0 = static_cast<int>(std::floor(x));
                        int j0 = static_cast<int>(std::floor(y));
                        int k0 = static_cast<int>(std::floor(z));
                        double fx = x - i0, fy = y - j0, fz = z - k0;
                        for (int dk = 0; dk <= 1; ++dk)
                            for (int dj = 0; dj <= 1; ++dj)
                                for (int di = 0; di <= 1; ++di) {
                                    int ii = i0 + di, jj = j0 + dj, kk = k0 + dk;
                                    if (ii < 0 || jj < 0 || kk < 0 || ii >= u.dims[0] ||
                                        jj >= u.dims[1] || kk >= u.dims[2])
                                        continue;
                                    double w = (di ? fx : 1 - fx) * (dj ? fy : 1 - fy) *
                                               (dk ? fz : 1 - fz);
                                    s[0] += w * u(ii, jj, kk)[0];
                                    s[1] += w * u(ii, jj, kk)[1];
                                    s[2] += w * u(ii, jj, kk)[2];
                                }
                    }
                    next.data[idx] = {-s[0], -s[1], -s[2]};
                }
        ubar = std::move(next);
    }

    auto once = warp(rec.complete, u);
    auto back = warp(once, ubar);
    CHECK(dsc(back, rec.complete) >= 0.95);
}

TEST_CASE("warp is linear in the moving image for trilinear interpolation") {
    Rng rng(9);
    ScalarGrid a({10, 10, 10}), b({10, 10, 10});
    for (auto& v : a.data) v = rng.uniform();
    for (auto& v : b.data) v = rng.uniform();
    VectorGrid u = random_smooth_field({10, 10, 10}, 1.5, rng);

    ScalarGrid sum(a.dims, a.spacing, a.origin);
    for (std::size_t i = 0; i < sum.size(); ++i) sum.data[i] = a.data[i] + b.data[i];

    auto wa = warp(a, u), wb = warp(b, u), ws = warp(sum, u);
    for (std::size_t i = 0; i < ws.size(); ++i)
        CHECK(ws.data[i] == doctest::Approx(wa.data[i] + wb.data[i]).epsilon(1e-12));
}

TEST_CASE("diffusion regularizer is zero iff the field is constant") {
    VectorGrid c({8, 8, 8}, {1, 1, 1}, {0, 0, 0}, Vec3{3.0, -1.0, 0.5});
    CHECK(diffusion_regularizer(c) == 0.0);
    c(4, 4, 4)[1] += 0.25;
    CHECK(diffusion_regularizer(c) > 0.0);
}

TEST_CASE("exponentiating the zero velocity gives the zero field exactly") {
    VectorGrid zero({9, 9, 9}, {1, 1, 1}, {0, 0, 0}, Vec3{0, 0, 0});
    auto u = exponentiate_velocity(zero, 7);
    for (const auto& v : u.data) {
        CHECK(v[0] == 0.0);
        CHECK(v[1] == 0.0);
        CHECK(v[2] == 0.0);
    }
}

TEST_CASE("affine registration on an identical pair does not worsen") {
    auto rec = generate_synthetic_case(3, small_cfg());
    auto aff = register_affine(rec.complete, rec.complete, 3, 40, 0.05);
    // near-identity: content displacement below half a voxel
    Vec3 c = centroid(rec.complete);
    Vec3 moved = aff.apply(c);
    CHECK(norm(moved - c) <= 0.5);
    CHECK(std::abs(aff.scale() - 1.0) <= 0.02);
}

TEST_CASE("affine recovers a 5-voxel translation") {
    auto rec = generate_synthetic_case(4, small_cfg());
    BinaryGrid target = shifted_copy(rec.complete, {5, 0, 0});
    auto aff = register_affine(rec.complete, target, 3, 80, 0.05);

    double initial = mask_mse(rec.complete, target);
    VectorGrid u(target.dims, target.spacing, target.origin, Vec3{0, 0, 0});
    // affine-only displacement field
    RegistrationPreset p = RegistrationPreset::imperfect();
    p.iterations_per_level = 0;
    VectorGrid total = register_deformable(rec.complete, target, aff, p);
    double final_mse = mask_mse(warp(rec.complete, total), target);
    CHECK(final_mse <= 0.05 * initial); // >= 95% reduction by the affine alone

    // recovered translation: the sampling map sends target x to x - 5 voxels
    Vec3 c = centroid(target);
    Vec3 mapped = aff.apply(c);
    CHECK(std::abs((c[0] - mapped[0]) - 5.0) <= 0.5);
    CHECK(std::abs(c[1] - mapped[1]) <= 0.5);
    CHECK(std::abs(c[2] - mapped[2]) <= 0.5);
}

TEST_CASE("affine recovers a 1.05 scale") {
    auto rec = generate_synthetic_case(5, small_cfg());
    // scaled target: sample source at coordinates shrunk about the centroid
    Vec3 c = centroid(rec.complete);
    BinaryGrid target(rec.complete.dims, rec.complete.spacing, rec.complete.origin);
    ScalarGrid fs = gaussian_smooth(rec.complete, 0.6);
    std::size_t idx = 0;
    for (int k = 0; k < target.dims[2]; ++k)
        for (int j = 0; j < target.dims[1]; ++j)
            for (int i = 0; i < target.dims[0]; ++i, ++idx) {
                double x = c[0] + (i - c[0]) / 1.05;
                double y = c[1] + (j - c[1]) / 1.05;
                double z = c[2] + (k - c[2]) / 1.05;
                target.data[idx] = sample_trilinear_zero(fs, x, y, z) >= 0.5 ? 1 : 0;
            }

    auto aff = register_affine(rec.complete, target, 3, 80, 0.05);
    double recovered = 1.0 / aff.scale(); // content magnification
    CHECK(recovered >= 1.03);
    CHECK(recovered <= 1.07);
}

TEST_CASE("deformable on an identical pair stays near zero") {
    auto rec = generate_synthetic_case(6, small_cfg());
    AffineTransform id;
    for (auto preset : {RegistrationPreset::smooth_invertible(), RegistrationPreset::imperfect()}) {
        preset.iterations_per_level = 30;
        auto u = register_deformable(rec.complete, rec.complete, id, preset);
        double mean_u = 0;
        for (const auto& v : u.data) mean_u += norm(v);
        mean_u /= static_cast<double>(u.size());
        CHECK(mean_u <= 0.5);
        CHECK(mask_mse(warp(rec.complete, u), rec.complete) <=
              mask_mse(rec.complete, rec.complete) + 1e-12);
    }
}

TEST_CASE("smooth preset: positive Jacobians, large MSE reduction") {
    auto a = generate_synthetic_case(7, small_cfg());
    auto b = generate_synthetic_case(8, small_cfg());

    double initial = mask_mse(a.complete, b.complete);
    auto aff = register_affine(a.complete, b.complete);
    auto u = register_deformable(a.complete, b.complete, aff,
                                 RegistrationPreset::smooth_invertible());
    double final_mse = mask_mse(warp(a.complete, u), b.complete);
    CHECK(final_mse <= 0.20 * initial);

    auto jac = jacobian_determinant(u);
    std::size_t fg = 0, pos = 0;
    for (std::size_t i = 0; i < b.complete.size(); ++i) {
        if (!b.complete.data[i]) continue;
        ++fg;
        pos += jac.data[i] > 0;
    }
    CHECK(static_cast<double>(pos) >= 0.999 * static_cast<double>(fg));
}

TEST_CASE("imperfect preset reduces MSE substantially without guarantees") {
    auto a = generate_synthetic_case(9, small_cfg());
    auto b = generate_synthetic_case(10, small_cfg());
    double initial = mask_mse(a.complete, b.complete);
    auto aff = register_affine(a.complete, b.complete);
    auto u = register_deformable(a.complete, b.complete, aff, RegistrationPreset::imperfect());
    double final_mse = mask_mse(warp(a.complete, u), b.complete);
    CHECK(final_mse <= 0.20 * initial);
}

TEST_CASE("augmentation emits valid cases for every sampled pair") {
    std::vector<CaseRecord> train;
    train.push_back(generate_synthetic_case(11, small_cfg()));
    train.push_back(generate_synthetic_case(12, small_cfg()));

    AugmentStats stats;
    auto preset = RegistrationPreset::imperfect();
    auto fresh = augment_by_registration(train, preset, 100, 5, &stats);
    CHECK(stats.pairs_attempted == 2); // n(n-1) = 2
    REQUIRE(fresh.size() == 2);
    for (auto& rec : fresh) {
        CHECK(count_nonzero(logical(rec.defective, rec.defect, MaskOp::And)) == 0);
        CHECK(logical(rec.defective, rec.defect, MaskOp::Or).data == rec.complete.data);
    }
    CHECK(fresh[0].case_id == "synthetic_11_to_synthetic_12");

    std::vector<CaseRecord> one{train[0]};
    CHECK_THROWS_AS(augment_by_registration(one, preset, 10, 1, nullptr), EmptyDataset);
}

TEST_CASE("imperfect augmentation lands between the endpoint skulls") {
    auto a = generate_synthetic_case(13, small_cfg());
    auto b = generate_synthetic_case(14, small_cfg());
    double endpoint_dsc = dsc(a.complete, b.complete);

    auto aff = register_affine(a.complete, b.complete);
    auto u_im = register_deformable(a.complete, b.complete, aff, RegistrationPreset::imperfect());
    auto warped_im = warp(a.complete, u_im);

    auto u_sm = register_deformable(a.complete, b.complete, aff,
                                    RegistrationPreset::smooth_invertible());
    auto warped_sm = warp(a.complete, u_sm);

    // imperfect matches the target no better than the converged smooth run
    CHECK(dsc(warped_im, b.complete) <= dsc(warped_sm, b.complete) + 0.02);
    // and the warped skull resembles both endpoints more than they resemble
    // each other
    CHECK(dsc(warped_im, a.complete) > endpoint_dsc);
    CHECK(dsc(warped_im, b.complete) > endpoint_dsc);
}
