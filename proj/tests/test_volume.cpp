#include "doctest.h"

#include <cmath>
#include <limits>
#include <numeric>

#include "cranio/distance.hpp"
#include "cranio/grid.hpp"
#include "cranio/morphology.hpp"
#include "cranio/resample.hpp"
#include "cranio/rng.hpp"

using namespace cranio;

namespace {

BinaryGrid random_mask(Index3 dims, double density, Rng& rng, Vec3 spacing = {1, 1, 1}) {
    BinaryGrid g(dims, spacing);
    for (auto& v : g.data) v = rng.uniform() < density ? 1 : 0;
    return g;
}

BinaryGrid solid_cube(Index3 dims, Index3 lo, Index3 hi) {
    BinaryGrid g(dims);
    for (int k = lo[2]; k < hi[2]; ++k)
        for (int j = lo[1]; j < hi[1]; ++j)
            for (int i = lo[0]; i < hi[0]; ++i) g(i, j, k) = 1;
    return g;
}

bool subset_of(const BinaryGrid& a, const BinaryGrid& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.data[i] && !b.data[i]) return false;
    return true;
}

// independent union-find component counter
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

std::vector<std::size_t> component_sizes_oracle(const BinaryGrid& g, int connectivity) {
    UnionFind uf(g.size());
    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i) {
                if (!g(i, j, k)) continue;
                for (int dk = -1; dk <= 1; ++dk)
                    for (int dj = -1; dj <= 1; ++dj)
                        for (int di = -1; di <= 1; ++di) {
                            if (!di && !dj && !dk) continue;
                            if (connectivity == 6 && std::abs(di) + std::abs(dj) + std::abs(dk) != 1)
                                continue;
                            int ni = i + di, nj = j + dj, nk = k + dk;
                            if (!g.in_bounds(ni, nj, nk) || !g(ni, nj, nk)) continue;
                            uf.unite(static_cast<int>(g.index(i, j, k)),
                                     static_cast<int>(g.index(ni, nj, nk)));
                        }
            }
    std::vector<std::size_t> counts(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.data[i]) ++counts[static_cast<std::size_t>(uf.find(static_cast<int>(i)))];
    std::vector<std::size_t> sizes;
    for (auto c : counts)
        if (c) sizes.push_back(c);
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

} // namespace

TEST_CASE("bounding_box basics") {
    BinaryGrid g({8, 8, 8});
    g(3, 4, 5) = 1;
    auto box = bounding_box(g);
    CHECK(box.lower == Index3{3, 4, 5});
    CHECK(box.upper == Index3{4, 5, 6});

    BinaryGrid full({8, 8, 8});
    full.fill(1);
    auto fb = bounding_box(full);
    CHECK(fb.lower == Index3{0, 0, 0});
    CHECK(fb.upper == Index3{8, 8, 8});

    BinaryGrid two({8, 8, 8});
    two(1, 1, 1) = 1;
    two(6, 2, 3) = 1;
    auto tb = bounding_box(two);
    CHECK(tb.lower == Index3{1, 1, 1});
    CHECK(tb.upper == Index3{7, 3, 4});

    BinaryGrid empty({4, 4, 4});
    CHECK_THROWS_AS(bounding_box(empty), EmptyVolume);
}

TEST_CASE("resample dims and identity") {
    BinaryGrid g({10, 10, 10}, {2, 2, 2});
    g(5, 5, 5) = 1;
    auto r = resample(g, {1, 1, 1}, Interp::Nearest);
    CHECK(r.dims == Index3{20, 20, 20});

    Rng rng(7);
    BinaryGrid m = random_mask({9, 7, 11}, 0.3, rng, {1.5, 1.0, 0.5});
    auto id = resample(m, m.spacing, Interp::Nearest);
    CHECK(id.dims == m.dims);
    CHECK(id.data == m.data);
}

TEST_CASE("resample preserves physical volume of a solid cube") {
    BinaryGrid g = solid_cube({12, 12, 12}, {3, 3, 3}, {9, 9, 9});
    double vol_before = static_cast<double>(count_nonzero(g)); // 1mm^3 voxels
    auto r = resample(g, {2, 2, 2}, Interp::Nearest);
    double vol_after = static_cast<double>(count_nonzero(r)) * 8.0;
    CHECK(std::abs(vol_after - vol_before) / vol_before <= 0.15);
}

TEST_CASE("resample volume bound for random blobs (nearest)") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        BinaryGrid g({14, 14, 14});
        // a random ball
        double r = rng.uniform(2.5, 5.0);
        Vec3 c{rng.uniform(5, 9), rng.uniform(5, 9), rng.uniform(5, 9)};
        std::size_t idx = 0;
        for (int k = 0; k < 14; ++k)
            for (int j = 0; j < 14; ++j)
                for (int i = 0; i < 14; ++i, ++idx) {
                    double dx = i - c[0], dy = j - c[1], dz = k - c[2];
                    g.data[idx] = (dx * dx + dy * dy + dz * dz <= r * r) ? 1 : 0;
                }
        if (count_nonzero(g) == 0) continue;
        BinaryGrid surf = logical(g, erode(g, 1), MaskOp::Xor);
        double tol = 2.0 * static_cast<double>(count_nonzero(surf)) * 1.0;
        auto rs = resample(g, {2, 2, 2}, Interp::Nearest);
        double vol_before = static_cast<double>(count_nonzero(g));
        double vol_after = static_cast<double>(count_nonzero(rs)) * 8.0;
        CHECK(std::abs(vol_after - vol_before) <= tol);
    }
}

TEST_CASE("crop_pad placement and inversion") {
    BinaryGrid g = solid_cube({16, 16, 16}, {3, 3, 3}, {13, 13, 13});
    auto box = bounding_box(g);
    auto [canvas, prov] = crop_pad(g, box, 0, {20, 20, 20});
    CHECK(canvas.dims == Index3{20, 20, 20});
    CHECK(count_nonzero(canvas) == count_nonzero(g));
    CHECK_FALSE(prov.overflow);

    auto back = invert_provenance(canvas, prov);
    CHECK(back.data == g.data);
    CHECK(back.dims == g.dims);
}

TEST_CASE("crop_pad keeps protruding content when offset covers it") {
    // shell box plus a defect sticking 5 voxels beyond it
    BinaryGrid skull = solid_cube({32, 32, 32}, {8, 8, 8}, {24, 24, 24});
    BinaryGrid defect = solid_cube({32, 32, 32}, {22, 12, 12}, {29, 18, 18}); // extends to x=28
    auto box = bounding_box(skull);
    auto [canvas, prov] = crop_pad(logical(skull, defect, MaskOp::Or), box, 5, {32, 32, 32});
    CHECK(count_nonzero(canvas) ==
          count_nonzero(logical(skull, defect, MaskOp::Or)));
    (void)prov;
}

TEST_CASE("crop_pad random inversion property") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        BinaryGrid g = random_mask({12, 10, 14}, 0.2, rng);
        if (count_nonzero(g) == 0) continue;
        auto box = bounding_box(g);
        auto [canvas, prov] = crop_pad(g, box, 2, {18, 18, 18});
        if (prov.overflow) continue;
        auto back = invert_provenance(canvas, prov);
        CHECK(back.data == g.data);
    }
}

TEST_CASE("morphology forced examples") {
    BinaryGrid single({7, 7, 7});
    single(3, 3, 3) = 1;
    CHECK(count_nonzero(erode(single, 1)) == 0);

    BinaryGrid cube = solid_cube({12, 12, 12}, {3, 3, 3}, {9, 9, 9});
    auto closed = morphology(cube, MorphOp::Close, 1);
    CHECK(closed.data == cube.data);

    BinaryGrid holey = cube;
    holey(6, 6, 6) = 0;
    auto filled = morphology(holey, MorphOp::Close, 1);
    CHECK(filled(6, 6, 6) == 1);
    CHECK(filled.data == cube.data);
}

TEST_CASE("opening anti-extensive, closing extensive") {
    Rng rng(5);
    for (int trial = 0; trial < 8; ++trial) {
        BinaryGrid g = random_mask({10, 10, 10}, 0.35, rng);
        auto opened = morphology(g, MorphOp::Open, 1);
        auto closed = morphology(g, MorphOp::Close, 1);
        CHECK(subset_of(opened, g));
        // closing is extensive only away from the grid border, where erosion
        // cannot see outside; interior check:
        for (int k = 1; k < 9; ++k)
            for (int j = 1; j < 9; ++j)
                for (int i = 1; i < 9; ++i)
                    if (g(i, j, k)) CHECK(closed(i, j, k) == 1);
    }
}

TEST_CASE("connected components basics and oracle") {
    BinaryGrid g({16, 16, 16});
    // 27-voxel cube and 8-voxel cube, disjoint
    for (int k = 1; k <= 3; ++k)
        for (int j = 1; j <= 3; ++j)
            for (int i = 1; i <= 3; ++i) g(i, j, k) = 1;
    for (int k = 10; k <= 11; ++k)
        for (int j = 10; j <= 11; ++j)
            for (int i = 10; i <= 11; ++i) g(i, j, k) = 1;
    auto cc = connected_components(g, 26);
    REQUIRE(cc.sizes.size() == 2);
    CHECK(cc.sizes[0] == 27);
    CHECK(cc.sizes[1] == 8);
    auto kept = keep_largest(g, 1, 26);
    CHECK(count_nonzero(kept) == 27);

    // diagonal neighbors: one component under 26, two under 6
    BinaryGrid diag({4, 4, 4});
    diag(1, 1, 1) = 1;
    diag(2, 2, 2) = 1;
    CHECK(connected_components(diag, 26).sizes.size() == 1);
    CHECK(connected_components(diag, 6).sizes.size() == 2);

    // empty input: zero components
    BinaryGrid empty({4, 4, 4});
    CHECK(connected_components(empty, 26).sizes.empty());

    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        BinaryGrid m = random_mask({16, 16, 16}, 0.25, rng);
        for (int conn : {6, 26}) {
            auto got = connected_components(m, conn);
            auto want = component_sizes_oracle(m, conn);
            CHECK(got.sizes == want);
            std::size_t total = 0;
            for (auto s : got.sizes) total += s;
            CHECK(total == count_nonzero(m));
        }
    }
}

TEST_CASE("logical ops against truth-table oracle") {
    Rng rng(3);
    BinaryGrid a = random_mask({8, 8, 8}, 0.5, rng);
    BinaryGrid b = random_mask({8, 8, 8}, 0.5, rng);

    auto x = logical(a, a, MaskOp::Xor);
    CHECK(count_nonzero(x) == 0);

    // b subset of a: and_not == xor
    BinaryGrid bs = logical(a, b, MaskOp::And);
    CHECK(logical(a, bs, MaskOp::AndNot).data == logical(a, bs, MaskOp::Xor).data);

    auto o_and = logical(a, b, MaskOp::And);
    auto o_or = logical(a, b, MaskOp::Or);
    auto o_xor = logical(a, b, MaskOp::Xor);
    auto o_andnot = logical(a, b, MaskOp::AndNot);
    for (std::size_t i = 0; i < a.size(); ++i) {
        bool av = a.data[i], bv = b.data[i];
        CHECK(o_and.data[i] == static_cast<std::uint8_t>(av && bv));
        CHECK(o_or.data[i] == static_cast<std::uint8_t>(av || bv));
        CHECK(o_xor.data[i] == static_cast<std::uint8_t>(av != bv));
        CHECK(o_andnot.data[i] == static_cast<std::uint8_t>(av && !bv));
    }

    BinaryGrid wrong({9, 8, 8});
    CHECK_THROWS_AS(logical(a, wrong, MaskOp::And), GeometryMismatch);
}

TEST_CASE("median filter examples and counting oracle") {
    BinaryGrid ones({10, 10, 10});
    ones.fill(1);
    CHECK(median_filter(ones, 1).data == ones.data);

    BinaryGrid single({9, 9, 9});
    single(4, 4, 4) = 1;
    CHECK(count_nonzero(median_filter(single, 1)) == 0);

    Rng rng(17);
    BinaryGrid m = random_mask({12, 12, 12}, 0.5, rng);
    auto got = median_filter(m, 1);
    for (int k = 0; k < 12; ++k)
        for (int j = 0; j < 12; ++j)
            for (int i = 0; i < 12; ++i) {
                int ones_n = 0, total = 0;
                for (int dk = -1; dk <= 1; ++dk)
                    for (int dj = -1; dj <= 1; ++dj)
                        for (int di = -1; di <= 1; ++di) {
                            int ni = i + di, nj = j + dj, nk = k + dk;
                            if (!m.in_bounds(ni, nj, nk)) continue;
                            ++total;
                            ones_n += m(ni, nj, nk);
                        }
                CHECK(got(i, j, k) == static_cast<std::uint8_t>(2 * ones_n > total));
            }
}

TEST_CASE("distance transform examples") {
    BinaryGrid g({5, 5, 5}, {1, 1, 2});
    g(0, 0, 0) = 1;
    auto d = distance_transform(g);
    CHECK(d(0, 0, 0) == 0.0);
    CHECK(d(0, 0, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d(1, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    BinaryGrid empty({4, 4, 4});
    auto de = distance_transform(empty);
    CHECK(std::isinf(de(1, 2, 3)));
}

TEST_CASE("distance transform equals all-pairs brute force") {
    Rng rng(31);
    for (int trial = 0; trial < 6; ++trial) {
        Vec3 spacing{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
        BinaryGrid m = random_mask({10, 10, 10}, 0.08, rng, spacing);
        if (count_nonzero(m) == 0) m(5, 5, 5) = 1;
        auto d = distance_transform(m);

        std::vector<Index3> pts;
        for (int k = 0; k < 10; ++k)
            for (int j = 0; j < 10; ++j)
                for (int i = 0; i < 10; ++i)
                    if (m(i, j, k)) pts.push_back({i, j, k});

        for (int k = 0; k < 10; ++k)
            for (int j = 0; j < 10; ++j)
                for (int i = 0; i < 10; ++i) {
                    double best = std::numeric_limits<double>::infinity();
                    for (const auto& p : pts) {
                        double dx = (i - p[0]) * spacing[0];
                        double dy = (j - p[1]) * spacing[1];
                        double dz = (k - p[2]) * spacing[2];
                        best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
                    }
                    CHECK(std::abs(d(i, j, k) - best) <= 1e-9);
                }
    }
}

TEST_CASE("centroid examples") {
    BinaryGrid g({5, 5, 5});
    g(2, 2, 2) = 1;
    auto c = centroid(g);
    CHECK(c[0] == doctest::Approx(2.0));
    CHECK(c[1] == doctest::Approx(2.0));
    CHECK(c[2] == doctest::Approx(2.0));

    BinaryGrid cube = solid_cube({10, 10, 10}, {2, 2, 2}, {6, 6, 6});
    auto cc = centroid(cube);
    CHECK(cc[0] == doctest::Approx(3.5));
    CHECK(cc[1] == doctest::Approx(3.5));
    CHECK(cc[2] == doctest::Approx(3.5));

    // L-shape: voxels (0,0,0), (1,0,0), (0,1,0)
    BinaryGrid ell({4, 4, 4}, {2, 1, 1}, {10, 20, 30});
    ell(0, 0, 0) = 1;
    ell(1, 0, 0) = 1;
    ell(0, 1, 0) = 1;
    auto ce = centroid(ell);
    CHECK(ce[0] == doctest::Approx(10 + 2.0 / 3.0)); // mean i = 1/3, spacing 2
    CHECK(ce[1] == doctest::Approx(20 + 1.0 / 3.0));
    CHECK(ce[2] == doctest::Approx(30.0));

    BinaryGrid empty({3, 3, 3});
    CHECK_THROWS_AS(centroid(empty), EmptyVolume);
}

TEST_CASE("translate_nearest shifts content") {
    BinaryGrid g({10, 10, 10});
    g(4, 4, 4) = 1;
    auto t = translate_nearest(g, {2.0, 0.0, 0.0});
    CHECK(t(6, 4, 4) == 1);
    CHECK(count_nonzero(t) == 1);
}
