#ifndef CRANIO_REGISTRATION_HPP
#define CRANIO_REGISTRATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cranio/dataio.hpp"
#include "cranio/grid.hpp"
#include "cranio/resample.hpp"

namespace cranio {

// Affine map y = A x + t on physical (mm) coordinates.
struct AffineTransform {
    std::array<std::array<double, 3>, 3> linear{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    Vec3 translation{0, 0, 0};

    Vec3 apply(const Vec3& p) const {
        return {linear[0][0] * p[0] + linear[0][1] * p[1] + linear[0][2] * p[2] + translation[0],
                linear[1][0] * p[0] + linear[1][1] * p[1] + linear[1][2] * p[2] + translation[1],
                linear[2][0] * p[0] + linear[2][1] * p[1] + linear[2][2] * p[2] + translation[2]};
    }
    double det() const;
    // isotropic scale estimate, cbrt(det)
    double scale() const;
};

struct RegistrationPreset {
    double theta = 5.0;          // regularization weight
    int iterations_per_level = 100;
    int levels = 3;
    bool diffeomorphic = true;   // optimize a velocity field, exp by squaring
    int squaring_steps = 7;
    double step_size = 0.25;     // Adam step, fixed-grid voxels
    bool run_to_convergence = true; // relative cost change < 1e-5 over 10 iters

    static RegistrationPreset smooth_invertible();
    static RegistrationPreset imperfect();
};

// Backward warping: out(x) = moving(x + u(x)), u in voxels of the fixed grid,
// out-of-bounds samples read 0. Binary default is trilinear + 0.5 threshold.
BinaryGrid warp(const BinaryGrid& moving, const VectorGrid& u, Interp interp = Interp::Trilinear);
ScalarGrid warp(const ScalarGrid& moving, const VectorGrid& u);

// Displacement composition phi_u after phi_v: w(x) = v(x) + u(x + v(x)).
VectorGrid compose_fields(const VectorGrid& u, const VectorGrid& v);

// Stationary velocity integration by scaling and squaring.
VectorGrid exponentiate_velocity(const VectorGrid& velocity, int squaring_steps);

// Jacobian determinant of (id + u) via central differences.
ScalarGrid jacobian_determinant(const VectorGrid& u);

// Diffusion regularizer: mean squared forward difference over voxels,
// components and axes. Zero iff the field is constant.
double diffusion_regularizer(const VectorGrid& u);

// Gradient-based MSE minimization over 12 parameters, coarse-to-fine on a
// Gaussian-smoothed pyramid, initialized at the centroid-aligning translation.
AffineTransform register_affine(const BinaryGrid& source, const BinaryGrid& target,
                                int levels = 3, int iterations_per_level = 80,
                                double step = 0.05);

// Deformable stage minimizing MSE(S∘u, T) + theta * Reg(u) on top of an
// affine initialization; the returned field composes both.
VectorGrid register_deformable(const BinaryGrid& source, const BinaryGrid& target,
                               const AffineTransform& init, const RegistrationPreset& preset);

// Fraction of binary voxels that disagree; the MSE of Eq-style cost on masks.
double mask_mse(const BinaryGrid& a, const BinaryGrid& b);

struct AugmentStats {
    std::size_t pairs_attempted = 0;
    std::size_t pairs_failed = 0;
};

// Cross-case augmentation: registers sampled ordered pairs of complete
// skulls, warps the source complete+defect, and derives the defective skull
// so the CaseRecord invariants hold exactly. Failed pairs are skipped and
// logged.
std::vector<CaseRecord> augment_by_registration(const std::vector<CaseRecord>& train,
                                                const RegistrationPreset& preset,
                                                std::size_t pair_budget, std::uint64_t seed,
                                                AugmentStats* stats = nullptr);

} // namespace cranio

#endif
