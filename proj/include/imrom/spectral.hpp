#pragma once

#include "imrom/model.hpp"

#include <complex>

namespace imrom {

struct SpectralOptions {
    // Dense generalized eigensolver up to this size, sparse shift-invert above.
    int dense_threshold = 2000;
    // Off-diagonal modal damping must stay below this fraction of the largest diagonal.
    double classical_damping_tol = 1e-8;
    // When false a non-classical C only sets ModalBasis::classical = false.
    bool classical_damping_strict = true;
    // Sparse path: relative Ritz residual (eigenvalue error is its square), iteration cap.
    double sparse_tol = 1e-10;
    int sparse_max_iter = 500;
};

// First n_compute undamped modes, mass normalised (phi^T M phi = 1).
struct ModalBasis {
    Eigen::VectorXd omega;   // natural frequencies, ascending
    Eigen::VectorXd xi;      // modal damping ratios phi^T C phi / (2 omega)
    Eigen::MatrixXd phi;     // N x n_compute
    double damping_coupling = 0.0;  // max off-diagonal / max diagonal of Phi^T C Phi
    bool classical = true;

    int size() const { return int(omega.size()); }
    // lambda_j = -xi omega + i omega sqrt(1 - xi^2); conj = true gives its conjugate.
    std::complex<double> lambda(int j, bool conj = false) const;
};

ModalBasis solve_eigen(const SecondOrderModel& model, int n_compute,
                       const SpectralOptions& options = {});

// Returns max |phi_j^T C phi_k| (j != k) divided by max |phi_j^T C phi_j|, 0 for C = 0.
double damping_coupling_ratio(const SecondOrderModel& model, const ModalBasis& basis);

struct OrthogonalityResiduals {
    double mass = 0.0;       // max |X_r^T B Y_s - delta_rs|
    double stiffness = 0.0;  // max |X_r^T A Y_s + lambda_r delta_rs| / max |lambda|
    double identity = 0.0;   // ((sigma + lambda_r) M + C) phi_r vs (sigma - conj lambda_r) M phi_r
};

// Checks the biorthogonality of the first-order eigenvectors built from the basis,
// with B = blockdiag(M, M) and A = [[C, K], [-M, 0]]. sigma is an arbitrary test value
// for the shifted identity.
OrthogonalityResiduals first_order_orthogonality_residuals(const SecondOrderModel& model,
                                                           const ModalBasis& basis,
                                                           std::complex<double> sigma);

}  // namespace imrom
