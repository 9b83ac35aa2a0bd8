#pragma once

#include "imrom/rom.hpp"

#include <string>
#include <vector>

namespace imrom {

struct HbmOptions {
    int harmonics = 7;
    double newton_tol = 1e-10;   // on the residual, relative to omega * max |coefficient|
    int newton_max_iter = 25;
    double step = 0.02;          // initial arclength step in scaled variables
    double step_min = 1e-7;
    double step_max = 0.2;
    int max_points = 2000;
    double amplitude_start = 1e-3;  // backbone: first-harmonic amplitude of the first point
    double amplitude_max = 1.0;     // backbone stops beyond this amplitude
    double omega_min = 0.0;         // stop when omega leaves [omega_min, omega_max]
    double omega_max = 1e300;
    bool stability = false;      // Hill-method stability flags (experimental)
};

struct HbmPoint {
    double omega = 0.0;
    Eigen::VectorXd coeffs;      // per state: c0, c1, s1, ..., cH, sH
    double arclength = 0.0;
    double amplitude = 0.0;      // first-harmonic amplitude of the tracked state
    double peak = 0.0;           // max |a_m(t)| over one period
    int iterations = 0;
    int stable = -1;             // 1 stable, 0 unstable, -1 not computed
};

struct ContinuationCurve {
    int harmonics = 0;
    int dim = 0;
    int master = 0;
    std::vector<HbmPoint> points;
    std::string stop_reason;
};

// Periodic free oscillations of the (conservative) reduced dynamics, one harmonic of
// master m anchored in phase (sin coefficient of a_m set to zero).
ContinuationCurve hbm_backbone(const RealRom& rom, int master, const HbmOptions& options);

// Forced response for kappa cos(Omega t) on one master, continued in Omega from
// omega_start towards omega_end.
ContinuationCurve hbm_frf(const RealRom& rom, int master, double kappa, double omega_start,
                          double omega_end, const HbmOptions& options);

// State samples a(theta_k), theta_k = 2 pi k / samples, columns = samples.
Eigen::MatrixXd hbm_samples(const ContinuationCurve& curve, const HbmPoint& point, int samples);

// Galerkin residual of the reduced dynamics for given coefficients and omega.
Eigen::VectorXd hbm_residual(const RealRom& rom, const Eigen::VectorXd& coeffs, double omega,
                             int harmonics, const Forcing* forcing = nullptr);

}  // namespace imrom
