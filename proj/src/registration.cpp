#include "cranio/registration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cranio/rng.hpp"
#include "cranio/sampling.hpp"
#include "cranio/smoothing.hpp"

namespace cranio {

double AffineTransform::det() const {
    const auto& a = linear;
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

double AffineTransform::scale() const { return std::cbrt(std::abs(det())); }

RegistrationPreset RegistrationPreset::smooth_invertible() {
    RegistrationPreset p;
    p.theta = 5.0;
    p.diffeomorphic = true;
    p.squaring_steps = 7;
    p.iterations_per_level = 100;
    p.levels = 3;
    p.step_size = 0.25;
    p.run_to_convergence = true;
    return p;
}

RegistrationPreset RegistrationPreset::imperfect() {
    RegistrationPreset p;
    p.theta = 0.1;
    p.diffeomorphic = false;
    p.squaring_steps = 0;
    p.iterations_per_level = 60;
    p.levels = 3;
    p.step_size = 0.25;
    p.run_to_convergence = false;
    return p;
}

BinaryGrid warp(const BinaryGrid& moving, const VectorGrid& u, Interp interp) {
    require_same_geometry(moving, u, "warp: field vs moving geometry");
    BinaryGrid out(moving.dims, moving.spacing, moving.origin);
    std::size_t idx = 0;
    for (int k = 0; k < u.dims[2]; ++k)
        for (int j = 0; j < u.dims[1]; ++j)
            for (int i = 0; i < u.dims[0]; ++i, ++idx) {
                const Vec3& d = u.data[idx];
                double x = i + d[0], y = j + d[1], z = k + d[2];
                double v = (interp == Interp::Nearest)
                               ? sample_nearest_zero(moving, x, y, z)
                               : sample_trilinear_zero(moving, x, y, z);
                out.data[idx] = (interp == Interp::Nearest) ? (v != 0.0 ? 1 : 0)
                                                            : (v >= 0.5 ? 1 : 0);
            }
    return out;
}

ScalarGrid warp(const ScalarGrid& moving, const VectorGrid& u) {
    require_same_geometry(moving, u, "warp: field vs moving geometry");
    ScalarGrid out(moving.dims, moving.spacing, moving.origin);
    std::size_t idx = 0;
    for (int k = 0; k < u.dims[2]; ++k)
        for (int j = 0; j < u.dims[1]; ++j)
            for (int i = 0; i < u.dims[0]; ++i, ++idx) {
                const Vec3& d = u.data[idx];
                out.data[idx] = sample_trilinear_zero(moving, i + d[0], j + d[1], k + d[2]);
            }
    return out;
}

namespace {

Vec3 sample_field(const VectorGrid& f, double x, double y, double z) {
    // per-component trilinear, zero outside
    if (x <= -1.0 || y <= -1.0 || z <= -1.0 || x >= f.dims[0] || y >= f.dims[1] || z >= f.dims[2])
        return {0, 0, 0};
    int i0 = static_cast<int>(std::floor(x));
    int j0 = static_cast<int>(std::floor(y));
    int k0 = static_cast<int>(std::floor(z));
    double fx = x - i0, fy = y - j0, fz = z - k0;
    Vec3 acc{0, 0, 0};
    for (int dk = 0; dk <= 1; ++dk)
        for (int dj = 0; dj <= 1; ++dj)
            for (int di = 0; di <= 1; ++di) {
                double w = (di ? fx : 1.0 - fx) * (dj ? fy : 1.0 - fy) * (dk ? fz : 1.0 - fz);
                if (w == 0.0) continue;
                int i = i0 + di, j = j0 + dj, k = k0 + dk;
                if (!f.in_bounds(i, j, k)) continue;
                const Vec3& v = f(i, j, k);
                acc[0] += w * v[0];
                acc[1] += w * v[1];
                acc[2] += w * v[2];
            }
    return acc;
}

} // namespace

VectorGrid compose_fields(const VectorGrid& u, const VectorGrid& v) {
    require_same_geometry(u, v, "compose_fields geometry");
    VectorGrid out(u.dims, u.spacing, u.origin);
    std::size_t idx = 0;
    for (int k = 0; k < u.dims[2]; ++k)
        for (int j = 0; j < u.dims[1]; ++j)
            for (int i = 0; i < u.dims[0]; ++i, ++idx) {
                const Vec3& d = v.data[idx];
                Vec3 s = sample_field(u, i + d[0], j + d[1], k + d[2]);
                out.data[idx] = {d[0] + s[0], d[1] + s[1], d[2] + s[2]};
            }
    return out;
}

VectorGrid exponentiate_velocity(const VectorGrid& velocity, int squaring_steps) {
    VectorGrid u(velocity.dims, velocity.spacing, velocity.origin);
    double inv = 1.0 / static_cast<double>(1ull << squaring_steps);
    for (std::size_t i = 0; i < u.size(); ++i)
        u.data[i] = {velocity.data[i][0] * inv, velocity.data[i][1] * inv,
                     velocity.data[i][2] * inv};
    for (int s = 0; s < squaring_steps; ++s) u = compose_fields(u, u);
    return u;
}

ScalarGrid jacobian_determinant(const VectorGrid& u) {
    ScalarGrid out(u.dims, u.spacing, u.origin, 1.0);
    auto comp = [&](int i, int j, int k, int c) { return u(i, j, k)[c]; };
    for (int k = 0; k < u.dims[2]; ++k)
        for (int j = 0; j < u.dims[1]; ++j)
            for (int i = 0; i < u.dims[0]; ++i) {
                double J[3][3];
                for (int c = 0; c < 3; ++c) {
                    int ip = std::min(i + 1, u.dims[0] - 1), im = std::max(i - 1, 0);
                    int jp = std::min(j + 1, u.dims[1] - 1), jm = std::max(j - 1, 0);
                    int kp = std::min(k + 1, u.dims[2] - 1), km = std::max(k - 1, 0);
                    J[c][0] = (comp(ip, j, k, c) - comp(im, j, k, c)) / (ip - im);
                    J[c][1] = (comp(i, jp, k, c) - comp(i, jm, k, c)) / (jp - jm);
                    J[c][2] = (comp(i, j, kp, c) - comp(i, j, km, c)) / (kp - km);
                }
                J[0][0] += 1.0;
                J[1][1] += 1.0;
                J[2][2] += 1.0;
                out(i, j, k) = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                               J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                               J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
            }
    return out;
}

double diffusion_regularizer(const VectorGrid& u) {
    double acc = 0;
    std::size_t count = 0;
    for (int k = 0; k < u.dims[2]; ++k)
        for (int j = 0; j < u.dims[1]; ++j)
            for (int i = 0; i < u.dims[0]; ++i)
                for (int c = 0; c < 3; ++c) {
                    if (i + 1 < u.dims[0]) {
                        double d = u(i + 1, j, k)[c] - u(i, j, k)[c];
                        acc += d * d;
                        ++count;
                    }
                    if (j + 1 < u.dims[1]) {
                        double d = u(i, j + 1, k)[c] - u(i, j, k)[c];
                        acc += d * d;
                        ++count;
                    }
                    if (k + 1 < u.dims[2]) {
                        double d = u(i, j, k + 1)[c] - u(i, j, k)[c];
                        acc += d * d;
                        ++count;
                    }
                }
    return count ? acc / static_cast<double>(count) : 0.0;
}

double mask_mse(const BinaryGrid& a, const BinaryGrid& b) {
    require_same_geometry(a, b, "mask_mse geometry");
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += (a.data[i] != b.data[i]);
    return static_cast<double>(diff) / static_cast<double>(a.size());
}

namespace {

// smoothed scalar pyramid; level l is decimated by 2^l
std::vector<ScalarGrid> build_pyramid(const BinaryGrid& mask, int levels) {
    std::vector<ScalarGrid> pyr;
    pyr.push_back(gaussian_smooth(mask, 1.0));
    for (int l = 1; l < levels; ++l) {
        const ScalarGrid& prev = pyr.back();
        ScalarGrid sm = gaussian_smooth(prev, 1.0);
        Index3 nd{std::max(1, (prev.dims[0] + 1) / 2), std::max(1, (prev.dims[1] + 1) / 2),
                  std::max(1, (prev.dims[2] + 1) / 2)};
        ScalarGrid down(nd,
                        {prev.spacing[0] * 2, prev.spacing[1] * 2, prev.spacing[2] * 2},
                        prev.origin);
        for (int k = 0; k < nd[2]; ++k)
            for (int j = 0; j < nd[1]; ++j)
                for (int i = 0; i < nd[0]; ++i)
                    down(i, j, k) = sm(std::min(2 * i, prev.dims[0] - 1),
                                       std::min(2 * j, prev.dims[1] - 1),
                                       std::min(2 * k, prev.dims[2] - 1));
        pyr.push_back(std::move(down));
    }
    return pyr;
}

struct AdamScalarState {
    std::vector<double> m, v;
    int t = 0;
};

// voxel-space affine equivalent of a physical-space transform, for a lattice
// with the given spacing (shared origin assumed; registration operates on a
// common preprocessed lattice)
struct VoxelAffine {
    double A[3][3];
    double b[3];
};

VoxelAffine to_voxel(const AffineTransform& T, const Vec3& spacing) {
    VoxelAffine va{};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) va.A[r][c] = T.linear[r][c] * spacing[c] / spacing[r];
        va.b[r] = T.translation[r] / spacing[r];
    }
    return va;
}

} // namespace

AffineTransform register_affine(const BinaryGrid& source, const BinaryGrid& target, int levels,
                                int iterations_per_level, double step) {
    if (count_nonzero(source) == 0 || count_nonzero(target) == 0)
        throw EmptyVolume("register_affine: empty operand");
    require_same_geometry(source, target, "register_affine geometry");

    Vec3 c_src = centroid(source);
    Vec3 c_tgt = centroid(target);

    // parameters: row-major linear part about the target centroid + translation
    double p[12] = {1, 0, 0, 0, 1, 0, 0, 0, 1,
                    c_src[0] - c_tgt[0], c_src[1] - c_tgt[1], c_src[2] - c_tgt[2]};

    auto pyr_src = build_pyramid(source, levels);
    auto pyr_tgt = build_pyramid(target, levels);

    for (int level = levels - 1; level >= 0; --level) {
        const ScalarGrid& S = pyr_src[static_cast<std::size_t>(level)];
        const ScalarGrid& T = pyr_tgt[static_cast<std::size_t>(level)];
        const std::size_t n = T.size();

        auto eval = [&](const double* q, double* grad) {
            double cost = 0;
            if (grad) std::fill(grad, grad + 12, 0.0);
            std::size_t idx = 0;
            for (int k = 0; k < T.dims[2]; ++k)
                for (int j = 0; j < T.dims[1]; ++j)
                    for (int i = 0; i < T.dims[0]; ++i, ++idx) {
                        // physical position of the fixed voxel, centered
                        double px = i * T.spacing[0] - c_tgt[0];
                        double py = j * T.spacing[1] - c_tgt[1];
                        double pz = k * T.spacing[2] - c_tgt[2];
                        double yx = q[0] * px + q[1] * py + q[2] * pz + c_tgt[0] + q[9];
                        double yy = q[3] * px + q[4] * py + q[5] * pz + c_tgt[1] + q[10];
                        double yz = q[6] * px + q[7] * py + q[8] * pz + c_tgt[2] + q[11];
                        double vx = yx / S.spacing[0], vy = yy / S.spacing[1], vz = yz / S.spacing[2];
                        double value;
                        Vec3 g;
                        sample_trilinear_grad(S, vx, vy, vz, value, g);
                        double r = value - T.data[idx];
                        cost += r * r;
                        if (grad) {
                            double gx = g[0] / S.spacing[0];
                            double gy = g[1] / S.spacing[1];
                            double gz = g[2] / S.spacing[2];
                            double w = 2.0 * r;
                            grad[0] += w * gx * px;
                            grad[1] += w * gx * py;
                            grad[2] += w * gx * pz;
                            grad[3] += w * gy * px;
                            grad[4] += w * gy * py;
                            grad[5] += w * gy * pz;
                            grad[6] += w * gz * px;
                            grad[7] += w * gz * py;
                            grad[8] += w * gz * pz;
                            grad[9] += w * gx;
                            grad[10] += w * gy;
                            grad[11] += w * gz;
                        }
                    }
            if (grad)
                for (int q12 = 0; q12 < 12; ++q12) grad[q12] /= static_cast<double>(n);
            return cost / static_cast<double>(n);
        };

        AdamScalarState adam;
        adam.m.assign(12, 0.0);
        adam.v.assign(12, 0.0);
        double lr = step;
        double grad[12];
        double cost = eval(p, grad);
        double saved[12];
        for (int it = 0; it < iterations_per_level && lr > 1e-10; ++it) {
            std::copy(p, p + 12, saved);
            ++adam.t;
            for (int q12 = 0; q12 < 12; ++q12) {
                adam.m[static_cast<std::size_t>(q12)] =
                    0.9 * adam.m[static_cast<std::size_t>(q12)] + 0.1 * grad[q12];
                adam.v[static_cast<std::size_t>(q12)] =
                    0.999 * adam.v[static_cast<std::size_t>(q12)] + 0.001 * grad[q12] * grad[q12];
                double mh = adam.m[static_cast<std::size_t>(q12)] / (1 - std::pow(0.9, adam.t));
                double vh = adam.v[static_cast<std::size_t>(q12)] / (1 - std::pow(0.999, adam.t));
                // translation parameters live on a mm scale, linear ones near 1
                double scale = (q12 >= 9) ? 1.0 : 0.02;
                p[q12] -= lr * scale * mh / (std::sqrt(vh) + 1e-8);
            }
            double new_grad[12];
            double new_cost = eval(p, new_grad);
            if (!std::isfinite(new_cost)) throw NonFiniteCost("register_affine");
            if (new_cost > cost) {
                std::copy(saved, saved + 12, p);
                lr *= 0.5;
                continue;
            }
            cost = new_cost;
            std::copy(new_grad, new_grad + 12, grad);
        }
    }

    AffineTransform out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out.linear[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = p[3 * r + c];
    // fold the centering into the translation: y = A(x - c) + c + t
    Vec3 ac = out.apply(c_tgt);
    out.translation = {c_tgt[0] + p[9] - (ac[0] - out.translation[0]),
                       c_tgt[1] + p[10] - (ac[1] - out.translation[1]),
                       c_tgt[2] + p[11] - (ac[2] - out.translation[2])};
    if (std::abs(out.det()) < 1e-9)
        throw NonFiniteCost("register_affine produced a singular transform");
    return out;
}

namespace {

struct DeformableCost {
    double total;
    double data;
    double reg;
};

// evaluates cost and the gradient wrt the displacement field u (level units)
DeformableCost eval_deformable(const ScalarGrid& S, const ScalarGrid& T, const VectorGrid& u,
                               const VoxelAffine& A, double theta, VectorGrid* grad) {
    const std::size_t n = T.size();
    double data_cost = 0;
    if (grad)
        for (auto& g : grad->data) g = {0, 0, 0};

    std::size_t idx = 0;
    for (int k = 0; k < T.dims[2]; ++k)
        for (int j = 0; j < T.dims[1]; ++j)
            for (int i = 0; i < T.dims[0]; ++i, ++idx) {
                const Vec3& d = u.data[idx];
                double wx = i + d[0], wy = j + d[1], wz = k + d[2];
                double vx = A.A[0][0] * wx + A.A[0][1] * wy + A.A[0][2] * wz + A.b[0];
                double vy = A.A[1][0] * wx + A.A[1][1] * wy + A.A[1][2] * wz + A.b[1];
                double vz = A.A[2][0] * wx + A.A[2][1] * wy + A.A[2][2] * wz + A.b[2];
                double value;
                Vec3 g;
                sample_trilinear_grad(S, vx, vy, vz, value, g);
                double r = value - T.data[idx];
                data_cost += r * r;
                if (grad) {
                    double w = 2.0 * r / static_cast<double>(n);
                    // chain through the affine: dv/du = A columns
                    (*grad).data[idx] = {
                        w * (g[0] * A.A[0][0] + g[1] * A.A[1][0] + g[2] * A.A[2][0]),
                        w * (g[0] * A.A[0][1] + g[1] * A.A[1][1] + g[2] * A.A[2][1]),
                        w * (g[0] * A.A[0][2] + g[1] * A.A[1][2] + g[2] * A.A[2][2])};
                }
            }
    data_cost /= static_cast<double>(n);

    // diffusion term and its gradient
    double reg = 0;
    std::size_t count = 0;
    const Index3 dims = u.dims;
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i)
                for (int c = 0; c < 3; ++c) {
                    double uc = u(i, j, k)[c];
                    if (i + 1 < dims[0]) {
                        double d = u(i + 1, j, k)[c] - uc;
                        reg += d * d;
                        ++count;
                    }
                    if (j + 1 < dims[1]) {
                        double d = u(i, j + 1, k)[c] - uc;
                        reg += d * d;
                        ++count;
                    }
                    if (k + 1 < dims[2]) {
                        double d = u(i, j, k + 1)[c] - uc;
                        reg += d * d;
                        ++count;
                    }
                }
    double reg_norm = count ? 1.0 / static_cast<double>(count) : 0.0;
    reg *= reg_norm;

    if (grad && theta > 0) {
        double w = 2.0 * theta * reg_norm;
        for (int k = 0; k < dims[2]; ++k)
            for (int j = 0; j < dims[1]; ++j)
                for (int i = 0; i < dims[0]; ++i)
                    for (int c = 0; c < 3; ++c) {
                        double uc = u(i, j, k)[c];
                        double g = 0;
                        if (i + 1 < dims[0]) g -= u(i + 1, j, k)[c] - uc;
                        if (i > 0) g += uc - u(i - 1, j, k)[c];
                        if (j + 1 < dims[1]) g -= u(i, j + 1, k)[c] - uc;
                        if (j > 0) g += uc - u(i, j - 1, k)[c];
                        if (k + 1 < dims[2]) g -= u(i, j, k + 1)[c] - uc;
                        if (k > 0) g += uc - u(i, j, k - 1)[c];
                        (*grad)(i, j, k)[c] += w * g;
                    }
    }

    return {data_cost + theta * reg, data_cost, reg};
}

// pyramid levels decimate at even indices, so fine index f maps to coarse f/2
VectorGrid upsample_field(const VectorGrid& u, Index3 new_dims, Vec3 new_spacing) {
    VectorGrid out(new_dims, new_spacing, u.origin);
    std::size_t idx = 0;
    for (int k = 0; k < new_dims[2]; ++k)
        for (int j = 0; j < new_dims[1]; ++j)
            for (int i = 0; i < new_dims[0]; ++i, ++idx) {
                Vec3 v = sample_field(u, 0.5 * i, 0.5 * j, 0.5 * k);
                // field units are voxels of its own level; finer voxels double
                out.data[idx] = {v[0] * 2.0, v[1] * 2.0, v[2] * 2.0};
            }
    return out;
}

} // namespace

VectorGrid register_deformable(const BinaryGrid& source, const BinaryGrid& target,
                               const AffineTransform& init, const RegistrationPreset& preset) {
    if (count_nonzero(source) == 0 || count_nonzero(target) == 0)
        throw EmptyVolume("register_deformable: empty operand");
    require_same_geometry(source, target, "register_deformable geometry");

    auto pyr_src = build_pyramid(source, preset.levels);
    auto pyr_tgt = build_pyramid(target, preset.levels);

    // field being optimized: velocity (diffeomorphic) or displacement
    VectorGrid field(pyr_tgt.back().dims, pyr_tgt.back().spacing, pyr_tgt.back().origin,
                     Vec3{0, 0, 0});

    for (int level = preset.levels - 1; level >= 0; --level) {
        const ScalarGrid& S = pyr_src[static_cast<std::size_t>(level)];
        const ScalarGrid& T = pyr_tgt[static_cast<std::size_t>(level)];
        if (!same_geometry(field, T))
            field = upsample_field(field, T.dims, T.spacing);

        VoxelAffine A = to_voxel(init, T.spacing);

        VectorGrid grad(field.dims, field.spacing, field.origin, Vec3{0, 0, 0});
        VectorGrid m(field.dims, field.spacing, field.origin, Vec3{0, 0, 0});
        VectorGrid v(field.dims, field.spacing, field.origin, Vec3{0, 0, 0});
        int adam_t = 0;
        double lr = preset.step_size;

        auto displacement = [&](const VectorGrid& f) {
            return preset.diffeomorphic ? exponentiate_velocity(f, preset.squaring_steps) : f;
        };

        VectorGrid u = displacement(field);
        DeformableCost cost = eval_deformable(S, T, u, A, preset.theta, &grad);
        if (!std::isfinite(cost.total)) throw NonFiniteCost("register_deformable");

        VectorGrid saved = field;
        std::vector<double> history{cost.total};

        for (int it = 0; it < preset.iterations_per_level && lr > 1e-8; ++it) {
            saved = field;
            ++adam_t;
            double b1 = 1 - std::pow(0.9, adam_t), b2 = 1 - std::pow(0.999, adam_t);
            for (std::size_t q = 0; q < field.size(); ++q)
                for (int c = 0; c < 3; ++c) {
                    double g = grad.data[q][c];
                    m.data[q][c] = 0.9 * m.data[q][c] + 0.1 * g;
                    v.data[q][c] = 0.999 * v.data[q][c] + 0.001 * g * g;
                    field.data[q][c] -= lr * (m.data[q][c] / b1) /
                                        (std::sqrt(v.data[q][c] / b2) + 1e-8);
                }
            u = displacement(field);
            VectorGrid new_grad(field.dims, field.spacing, field.origin, Vec3{0, 0, 0});
            DeformableCost new_cost = eval_deformable(S, T, u, A, preset.theta, &new_grad);
            if (!std::isfinite(new_cost.total)) throw NonFiniteCost("register_deformable");
            if (new_cost.total > cost.total) {
                field = saved;
                lr *= 0.5;
                continue;
            }
            cost = new_cost;
            grad = std::move(new_grad);
            history.push_back(cost.total);
            if (preset.run_to_convergence && history.size() > 10) {
                double prev = history[history.size() - 11];
                if (std::abs(prev - cost.total) < 1e-5 * std::max(prev, 1e-12)) break;
            }
        }
    }

    // compose the affine into the final full-resolution field:
    // u_total(x) = A_vox(x + u_d(x)) - x
    VectorGrid u_d = preset.diffeomorphic ? exponentiate_velocity(field, preset.squaring_steps)
                                           : field;
    VoxelAffine A = to_voxel(init, target.spacing);
    VectorGrid total(target.dims, target.spacing, target.origin);
    std::size_t idx = 0;
    for (int k = 0; k < target.dims[2]; ++k)
        for (int j = 0; j < target.dims[1]; ++j)
            for (int i = 0; i < target.dims[0]; ++i, ++idx) {
                const Vec3& d = u_d.data[idx];
                double wx = i + d[0], wy = j + d[1], wz = k + d[2];
                total.data[idx] = {
                    A.A[0][0] * wx + A.A[0][1] * wy + A.A[0][2] * wz + A.b[0] - i,
                    A.A[1][0] * wx + A.A[1][1] * wy + A.A[1][2] * wz + A.b[1] - j,
                    A.A[2][0] * wx + A.A[2][1] * wy + A.A[2][2] * wz + A.b[2] - k};
            }
    return total;
}

std::vector<CaseRecord> augment_by_registration(const std::vector<CaseRecord>& train,
                                                const RegistrationPreset& preset,
                                                std::size_t pair_budget, std::uint64_t seed,
                                                AugmentStats* stats) {
    if (train.size() < 2)
        throw EmptyDataset("augmentation by registration needs at least 2 cases");

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < train.size(); ++i)
        for (std::size_t j = 0; j < train.size(); ++j)
            if (i != j) pairs.emplace_back(i, j);
    if (pair_budget < pairs.size()) {
        Rng rng(seed);
        rng.shuffle(pairs);
        pairs.resize(pair_budget);
    }

    std::vector<CaseRecord> out;
    for (const auto& [i, j] : pairs) {
        if (stats) ++stats->pairs_attempted;
        const CaseRecord& src = train[i];
        const CaseRecord& tgt = train[j];
        try {
            AffineTransform aff = register_affine(src.complete, tgt.complete);
            VectorGrid u = register_deformable(src.complete, tgt.complete, aff, preset);

            CaseRecord rec;
            rec.case_id = src.case_id + "_to_" + tgt.case_id;
            rec.defect = warp(src.defect, u, Interp::Trilinear);
            BinaryGrid warped_complete = warp(src.complete, u, Interp::Trilinear);
            rec.defective = logical(warped_complete, rec.defect, MaskOp::AndNot);
            rec.complete = logical(rec.defective, rec.defect, MaskOp::Or);
            if (count_nonzero(rec.defect) == 0 || count_nonzero(rec.defective) == 0)
                throw InvalidCase(rec.case_id + ": warped case degenerated");
            validate_case(rec, 0.0);
            out.push_back(std::move(rec));
        } catch (const Error& e) {
            if (stats) ++stats->pairs_failed;
            std::fprintf(stderr, "event=augment_pair_failed src=%s tgt=%s error=\"%s\"\n",
                         src.case_id.c_str(), tgt.case_id.c_str(), e.what());
        }
    }
    return out;
}

} // namespace cranio
