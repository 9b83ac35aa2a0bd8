#pragma once

#include "imrom/model.hpp"

namespace imrom {

// x'' + 2 xi omega0 x' + omega0^2 x + gamma x^3 = 0
SecondOrderModel duffing(double omega0, double gamma, double xi = 0.0);

// Two unit masses derived from the potential
//   V = omega1^2 x1^2 / 2 + omega2^2 x2^2 / 2 + beta x1^2 x2 + gamma1 x1^4 / 4 + gamma2 x2^4 / 4
// so the slave x2 is driven by beta x1^2 and the master sees 2 beta x1 x2.
struct Coupled2DofParams {
    double omega1 = 1.0;
    double omega2 = 2.5;
    double beta = 1.0;
    double gamma1 = 1.0;
    double gamma2 = 0.0;
    double xi1 = 0.0;
    double xi2 = 0.0;
};

SecondOrderModel coupled2dof(const Coupled2DofParams& params);

// Two unit masses in a circular energy valley of radius R:
//   V = omega1^2 (x1^2 + x2^2) / 2 + k (x1^2 + x2^2 - 2 R x2)^2 / (8 R^2)
// For stiff k the first nonlinear normal mode follows the circle, so x1 cannot exceed R
// and the invariant manifold folds over the (u1, v1) plane.
SecondOrderModel valley2dof(double omega1, double k, double radius);

// Planar von Karman beam: linear axial displacement, cubic Hermite deflection,
// membrane strain u' + w0' w' + w'^2 / 2 about an initial shape w0. Unknowns are the
// free nodes from x = 0 onwards, three per node: (u, w, w').
enum class Support { ClampedClamped, ClampedFree };

struct BeamParams {
    double length = 640.0;
    double width = 32.0;
    double thickness = 6.4;
    double young = 1.6e5;
    double density = 2.32e-3;
    int elements = 34;
    double rise = 0.0;  // in thicknesses: w0(x) = rise h (1 - cos(2 pi x / L)) / 2, clamped-clamped
    double rayleigh_alpha = 0.0;  // C = alpha M + beta K
    double rayleigh_beta = 0.0;
};

SecondOrderModel vk_beam(const BeamParams& params, Support support = Support::ClampedClamped);
SecondOrderModel vk_arch(const BeamParams& params);
// Surrogate of a cantilever: the geometric (inextensibility) inertia terms are not modelled.
SecondOrderModel vk_cantilever(const BeamParams& params);

// C = alpha M with alpha chosen so that a mode of frequency omega gets damping ratio xi.
void set_mass_proportional_damping(SecondOrderModel& model, double xi, double omega);

}  // namespace imrom
