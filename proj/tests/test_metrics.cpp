#include "doctest.h"

#include <cmath>
#include <limits>

#include "cranio/metrics.hpp"
#include "cranio/morphology.hpp"
#include "cranio/rng.hpp"

using namespace cranio;

namespace {

BinaryGrid random_mask(Index3 dims, double density, Rng& rng, Vec3 spacing = {1, 1, 1}) {
    BinaryGrid g(dims, spacing);
    for (auto& v : g.data) v = rng.uniform() < density ? 1 : 0;
    return g;
}

BinaryGrid ball(Index3 dims, Vec3 spacing, Vec3 center_mm, double radius_mm) {
    BinaryGrid g(dims, spacing);
    std::size_t idx = 0;
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i, ++idx) {
                Vec3 p = g.position(i, j, k);
                if (norm(p - center_mm) <= radius_mm) g.data[idx] = 1;
            }
    return g;
}

// independent surface extraction: mask voxels with a 6-neighbor outside
BinaryGrid surface_oracle(const BinaryGrid& m) {
    BinaryGrid s(m.dims, m.spacing, m.origin);
    static const int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (int k = 0; k < m.dims[2]; ++k)
        for (int j = 0; j < m.dims[1]; ++j)
            for (int i = 0; i < m.dims[0]; ++i) {
                if (!m(i, j, k)) continue;
                for (auto& o : off) {
                    if (!m.at_or_zero(i + o[0], j + o[1], k + o[2])) {
                        s(i, j, k) = 1;
                        break;
                    }
                }
            }
    return s;
}

double hd95_oracle(const BinaryGrid& a, const BinaryGrid& b) {
    BinaryGrid sa = surface_oracle(a), sb = surface_oracle(b);
    std::vector<Vec3> pa, pb;
    for (int k = 0; k < a.dims[2]; ++k)
        for (int j = 0; j < a.dims[1]; ++j)
            for (int i = 0; i < a.dims[0]; ++i) {
                if (sa(i, j, k)) pa.push_back(a.position(i, j, k));
                if (sb(i, j, k)) pb.push_back(b.position(i, j, k));
            }
    auto directed = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
        std::vector<double> d;
        d.reserve(from.size());
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) best = std::min(best, norm(p - q));
            d.push_back(best);
        }
        std::sort(d.begin(), d.end());
        std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(d.size())));
        if (rank < 1) rank = 1;
        return d[rank - 1];
    };
    return std::max(directed(pa, pb), directed(pb, pa));
}

double max_hausdorff_oracle(const BinaryGrid& a, const BinaryGrid& b) {
    BinaryGrid sa = surface_oracle(a), sb = surface_oracle(b);
    std::vector<Vec3> pa, pb;
    for (int k = 0; k < a.dims[2]; ++k)
        for (int j = 0; j < a.dims[1]; ++j)
            for (int i = 0; i < a.dims[0]; ++i) {
                if (sa(i, j, k)) pa.push_back(a.position(i, j, k));
                if (sb(i, j, k)) pb.push_back(b.position(i, j, k));
            }
    double worst = 0;
    for (const auto& p : pa) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : pb) best = std::min(best, norm(p - q));
        worst = std::max(worst, best);
    }
    for (const auto& p : pb) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : pa) best = std::min(best, norm(p - q));
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

TEST_CASE("dsc forced examples") {
    Rng rng(1);
    BinaryGrid a = random_mask({8, 8, 8}, 0.4, rng);
    CHECK(dsc(a, a) == 1.0);

    BinaryGrid l({8, 8, 8}), r({8, 8, 8});
    l(1, 1, 1) = 1;
    r(6, 6, 6) = 1;
    CHECK(dsc(l, r) == 0.0);

    // |a|=|b|=8, intersection 4
    BinaryGrid p({8, 8, 8}), q({8, 8, 8});
    for (int i = 0; i < 8; ++i) p(i, 0, 0) = 1;
    for (int i = 4; i < 12 && i < 8; ++i) q(i, 0, 0) = 1;
    for (int i = 0; i < 4; ++i) q(i, 1, 1) = 1;
    CHECK(count_nonzero(p) == 8);
    CHECK(count_nonzero(q) == 8);
    CHECK(dsc(p, q) == 0.5);

    BinaryGrid e1({4, 4, 4}), e2({4, 4, 4});
    CHECK(dsc(e1, e2) == 1.0);
}

TEST_CASE("bdsc forced examples") {
    Rng rng(2);
    BinaryGrid a = random_mask({10, 10, 10}, 0.3, rng);
    CHECK(bdsc(a, a) == 1.0);

    BinaryGrid l({16, 16, 16}), r({16, 16, 16});
    l(2, 2, 2) = 1;
    r(13, 13, 13) = 1;
    CHECK(bdsc(l, r) == 0.0);
}

TEST_CASE("bdsc ignores deep-interior differences at coarse spacing") {
    // spacing 2.5mm > tau 2mm: the band is exactly the boundary layer
    Index3 dims{16, 16, 16};
    Vec3 sp{2.5, 2.5, 2.5};
    Vec3 c{0.5 * 15 * 2.5, 0.5 * 15 * 2.5, 0.5 * 15 * 2.5};
    BinaryGrid a = ball(dims, sp, c, 14.0);
    BinaryGrid core = ball(dims, sp, c, 5.0);
    REQUIRE(count_nonzero(core) > 0);
    BinaryGrid b = logical(a, core, MaskOp::AndNot);

    CHECK(dsc(a, b) < 1.0);
    CHECK(bdsc(a, b, 2.0) == 1.0);

    // per-voxel band oracle: restricted masks agree everywhere
    auto band_of = [&](const BinaryGrid& m) {
        BinaryGrid boundary = surface_voxels(m);
        BinaryGrid bandg(m.dims, m.spacing, m.origin);
        for (int k = 0; k < m.dims[2]; ++k)
            for (int j = 0; j < m.dims[1]; ++j)
                for (int i = 0; i < m.dims[0]; ++i) {
                    double best = std::numeric_limits<double>::infinity();
                    for (int kk = 0; kk < m.dims[2]; ++kk)
                        for (int jj = 0; jj < m.dims[1]; ++jj)
                            for (int ii = 0; ii < m.dims[0]; ++ii)
                                if (boundary(ii, jj, kk))
                                    best = std::min(best,
                                                    norm(m.position(i, j, k) - m.position(ii, jj, kk)));
                    if (best <= 2.0) bandg(i, j, k) = 1;
                }
        return bandg;
    };
    BinaryGrid bu = logical(band_of(a), band_of(b), MaskOp::Or);
    CHECK(logical(a, bu, MaskOp::And).data == logical(b, bu, MaskOp::And).data);
}

TEST_CASE("hd95 forced examples") {
    Rng rng(3);
    BinaryGrid a = random_mask({9, 9, 9}, 0.3, rng);
    if (count_nonzero(a) == 0) a(4, 4, 4) = 1;
    CHECK(hd95(a, a) == 0.0);

    BinaryGrid l({10, 10, 10}), r({10, 10, 10});
    l(2, 5, 5) = 1;
    r(5, 5, 5) = 1; // 3mm apart at 1mm spacing
    CHECK(hd95(l, r) == doctest::Approx(3.0).epsilon(1e-12));

    BinaryGrid empty({10, 10, 10});
    CHECK(std::isinf(hd95(l, empty)));
}

TEST_CASE("hd95 equals the all-pairs oracle on random pairs") {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        Vec3 sp{rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)};
        BinaryGrid a = random_mask({12, 12, 12}, 0.15, rng, sp);
        BinaryGrid b = random_mask({12, 12, 12}, 0.15, rng, sp);
        if (count_nonzero(a) == 0) a(3, 3, 3) = 1;
        if (count_nonzero(b) == 0) b(8, 8, 8) = 1;
        double got = hd95(a, b);
        double want = hd95_oracle(a, b);
        CHECK(std::abs(got - want) <= 1e-9);
        CHECK(got <= max_hausdorff_oracle(a, b) + 1e-12);
        // symmetry
        CHECK(hd95(b, a) == got);
        CHECK(dsc(b, a) == dsc(a, b));
        CHECK(bdsc(b, a) == bdsc(a, b));
    }
}

TEST_CASE("metrics invariant under joint translation") {
    Rng rng(5);
    BinaryGrid a({14, 14, 14}), b({14, 14, 14});
    // two small blobs
    for (int t = 0; t < 10; ++t) {
        a(3 + static_cast<int>(rng.uniform_index(4)), 3 + static_cast<int>(rng.uniform_index(4)),
          3 + static_cast<int>(rng.uniform_index(4))) = 1;
        b(4 + static_cast<int>(rng.uniform_index(4)), 4 + static_cast<int>(rng.uniform_index(4)),
          4 + static_cast<int>(rng.uniform_index(4))) = 1;
    }
    auto shift = [](const BinaryGrid& g, int d) {
        BinaryGrid out(g.dims, g.spacing, g.origin);
        for (int k = 0; k < g.dims[2]; ++k)
            for (int j = 0; j < g.dims[1]; ++j)
                for (int i = 0; i < g.dims[0]; ++i)
                    if (g(i, j, k)) out(i + d, j + d, k + d) = 1;
        return out;
    };
    BinaryGrid a2 = shift(a, 3), b2 = shift(b, 3);
    CHECK(dsc(a2, b2) == dsc(a, b));
    CHECK(bdsc(a2, b2) == bdsc(a, b));
    CHECK(std::abs(hd95(a2, b2) - hd95(a, b)) <= 1e-12);
}

TEST_CASE("dsc equals 1 iff masks are equal (nonempty)") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        BinaryGrid a = random_mask({8, 8, 8}, 0.3, rng);
        BinaryGrid b = random_mask({8, 8, 8}, 0.3, rng);
        if (count_nonzero(a) == 0) continue;
        if (dsc(a, b) == 1.0)
            CHECK(a.data == b.data);
        if (a.data == b.data)
            CHECK(dsc(a, b) == 1.0);
    }
}
