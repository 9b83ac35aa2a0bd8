#pragma once

#include "imrom/realifier.hpp"

#include <vector>

namespace imrom {

// Zero-order modal forcing kappa cos(Omega t) of one master. It enters the Cartesian
// reduced dynamics through the velocity-like equation a_{m+n}' with amplitude
// -kappa / Im(lambda_m), so that the oscillator form reads a'' + ... = kappa cos(Omega t).
struct Forcing {
    int master = 0;
    double kappa = 0.0;
    double omega = 0.0;
};

// Reduced vector field, optionally forced. Forcing a complex normal form is refused.
Eigen::VectorXd evaluate_rhs(const RealRom& rom, const Eigen::VectorXd& a, double t = 0.0,
                             const Forcing* forcing = nullptr);

// Amplitude of the forcing term in equation a_{m+n}'.
double forcing_amplitude(const RealRom& rom, const Forcing& forcing);

struct IntegrationOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double dt_initial = 1e-3;
    double dt_min = 1e-12;        // step-size underflow threshold
    double blowup_factor = 1e3;   // ||a||_inf beyond this times max(1, ||a0||_inf) diverges
    long max_steps = 1'000'000;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> a;
};

// Adaptive Dormand-Prince integration sampled at n_out + 1 equally spaced times.
// Throws DivergenceError on blow-up or step-size underflow.
Trajectory integrate(const RealRom& rom, const Eigen::VectorXd& a0, double t0, double t1,
                     int n_out, const IntegrationOptions& options = {},
                     const Forcing* forcing = nullptr);

// Displacements U(t) = Psi(a(t)) as columns.
Eigen::MatrixXd reconstruct(const RealRom& rom, const Trajectory& traj);
// Modal coordinates phi_j^T M U for the given mode shapes (N x k), one row per mode.
Eigen::MatrixXd modal_projection(const Eigen::MatrixXd& phi, const SparseMatrix& M,
                                 const Eigen::MatrixXd& u);

// Second-order multiple-scales backbone omega = omega_1 (1 + gamma2 rho^2 + gamma4 rho^4)
// for a'' + omega^2 a + omega^2 a (c30 a^2 + c12 (a'/omega)^2) = 0, rho being the first
// harmonic amplitude of a.
struct MultipleScales {
    double omega = 0.0;
    double c30 = 0.0;
    double c12 = 0.0;
    double gamma2 = 0.0;
    double gamma4 = 0.0;

    double frequency(double rho) const;
};

MultipleScales multiple_scales(double omega, double c30, double c12);
// From a single-master oscillator form without quadratic terms.
MultipleScales multiple_scales(const OscillatorForm& osc, double tol = 1e-10);
// Graph style in terms of f = f_{1,{1,1,2}} and fhat = f_{1,{1,1,1}}.
double graph_gamma4(std::complex<double> f, std::complex<double> fhat, double omega);
// Any style: gamma2 = -i f / (4 omega).
double gamma2_from_f(std::complex<double> f, double omega);

}  // namespace imrom
