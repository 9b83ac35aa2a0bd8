#pragma once

#include "imrom/model.hpp"
#include "imrom/multi_index.hpp"
#include "imrom/resonance.hpp"
#include "imrom/spectral.hpp"

#include <map>
#include <utility>
#include <vector>

namespace imrom {

// One monomial pi_I = prod z_s^{e_s(I)} of the mappings and reduced dynamics.
struct Coefficient {
    MultiIndex index;
    std::complex<double> sigma;
    Eigen::VectorXcd psi;  // displacement mapping, size N
    Eigen::VectorXcd ups;  // velocity mapping, size N
    Eigen::VectorXcd f;    // reduced dynamics, size 2n, nonzero only on resonances
    ResonanceSet resonances;
    bool solved = false;   // false when obtained from the conjugate monomial
};

struct OrderBlock {
    int order = 0;
    std::vector<Coefficient> terms;  // lexicographic in index
    std::map<MultiIndex, std::size_t> position;
    int solves = 0;

    const Coefficient& at(const MultiIndex& index) const;
    bool has(const MultiIndex& index) const { return position.count(index) > 0; }
};

struct ParametrisationOptions {
    Style style = Style::CNF;
    int order = 3;
    std::vector<int> masters{0};      // 0-based mode indices
    double resonance_tol = 1e-3;      // relative to the resonating omega
    double condition_limit = 1e12;    // 1-norm condition estimate for non-resonant solves
    bool fold_conjugates = true;      // derive conj(I) from I instead of solving it
    int threads = 1;
};

struct Parametrisation {
    Style style = Style::CNF;
    int order = 0;
    int n_dofs = 0;
    MasterSet masters;
    Eigen::MatrixXd phi;                // master mode shapes, N x n
    double resonance_tol = 1e-3;
    std::vector<OrderBlock> blocks;     // blocks[p] for p = 1..order; blocks[0] unused

    int n() const { return masters.n(); }
    const Coefficient& term(const MultiIndex& index) const;
    int solves(int p) const { return blocks.at(std::size_t(p)).solves; }
    int total_solves() const;

    // Evaluations at complex normal coordinates z (size 2n).
    Eigen::VectorXcd psi(const Eigen::VectorXcd& z) const;
    Eigen::VectorXcd ups(const Eigen::VectorXcd& z) const;
    Eigen::VectorXcd f(const Eigen::VectorXcd& z) const;
};

// G-check + H-check: sums of G and H over all ordered splittings of I into lower-order
// sub-monomials.
Eigen::VectorXcd assemble_rhs_GH(const MultiIndex& index, const std::vector<OrderBlock>& lower,
                                 const SecondOrderModel& model);

// mu and nu: the parts of grad(Psi) f and grad(Upsilon) f of order |I| built from
// mapping and dynamics coefficients of orders 2..|I|-1.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> assemble_rhs_munu(const MultiIndex& index,
                                                                const std::vector<OrderBlock>& lower,
                                                                int n, int n_dofs);

struct HomologicalSolution {
    Eigen::VectorXcd psi;
    Eigen::VectorXcd f;  // size 2n
    double condition_estimate = 0.0;  // only filled when R is empty
};

// Solves the bordered system for (Psi_I, f_{r,I}, r in R). When R is empty and the
// condition estimate exceeds condition_limit, throws SolveError naming the eigenvalue
// closest to sigma_I (searched in basis when given, else among the masters).
HomologicalSolution solve_homological(std::complex<double> sigma_i, const Eigen::VectorXcd& rhs,
                                      const Eigen::VectorXcd& mu, const ResonanceSet& resonances,
                                      const SecondOrderModel& model, const MasterSet& masters,
                                      const Eigen::MatrixXd& phi, double condition_limit,
                                      const MultiIndex& index, const ModalBasis* basis = nullptr);

// Upsilon_I = sigma Psi_I + sum_r phi_r f_r + mu_I
Eigen::VectorXcd velocity_mapping(std::complex<double> sigma_i, const Eigen::VectorXcd& psi,
                                  const Eigen::VectorXcd& f, const Eigen::VectorXcd& mu,
                                  const MasterSet& masters, const Eigen::MatrixXd& phi);

Parametrisation parametrise(const SecondOrderModel& model, const ModalBasis& basis,
                            const ParametrisationOptions& options);

struct InvarianceResidual {
    double dynamic = 0.0;    // momentum balance
    double kinematic = 0.0;  // M (grad(Psi) f - Upsilon)
};

// Residuals of the invariance equation at z, divided by max_j ||K phi_j|| over the
// masters so that the value is dimensionless and independent of z.
InvarianceResidual invariance_residual(const Parametrisation& param, const SecondOrderModel& model,
                                       const Eigen::VectorXcd& z);

// z_s = rho / 2 exp(i alpha) for master 1, conjugate in slot n, zeros elsewhere.
Eigen::VectorXcd polar_point(int n, double rho, double alpha, int master = 0);

}  // namespace imrom
