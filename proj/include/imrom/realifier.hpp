#pragma once

#include "imrom/parametriser.hpp"

#include <map>

namespace imrom {

// A real monomial in the Cartesian coordinates a (size 2n) with an attached vector.
// a_j = 2 Re z_j and a_{j+n} = 2 Im z_j for master j.
struct RealTerm {
    MultiIndex index;  // sorted variable indices in [0, 2n)
    Eigen::VectorXd value;
};

// A real scalar monomial.
struct ScalarTerm {
    MultiIndex index;
    double coeff = 0.0;
};

struct RealRom {
    Style style = Style::CNF;
    int order = 0;
    int n = 0;
    int n_dofs = 0;
    std::vector<std::complex<double>> lambda;  // size 2n
    std::vector<double> omega;                 // size n
    std::vector<RealTerm> dynamics;            // a' = sum value * pi(a), value size 2n
    std::vector<RealTerm> psi;                 // U = sum value * pi(a)
    std::vector<RealTerm> ups;                 // V = sum value * pi(a)
    double imag_residue = 0.0;                 // max |Im| / max |coefficient|, over all parts

    int dim() const { return 2 * n; }
    Eigen::VectorXd rhs(const Eigen::VectorXd& a) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& a) const;
    Eigen::VectorXd displacement(const Eigen::VectorXd& a) const;
    Eigen::VectorXd velocity(const Eigen::VectorXd& a) const;
    int degree() const;
};

// Real polynomial expansion of the complex monomial pi_I(z(a)).
std::map<MultiIndex, std::complex<double>> expand_monomial(const MultiIndex& index, int n);

RealRom realify(const Parametrisation& param);

// Polar law of a single-master complex normal form:
// rho' = sum_m radial[m] rho^(2m+1),  alpha' = sum_m angular[m] rho^(2m).
struct PolarLaw {
    std::vector<double> radial;
    std::vector<double> angular;

    double frequency(double rho) const;
    double growth(double rho) const;
};

PolarLaw polar_single_mode(const Parametrisation& param);

// a_j'' + 2 xi_j omega_j a_j' + omega_j^2 a_j + restoring_j(a, a') = 0. Variables 0..n-1
// are the displacements a_j, variables n..2n-1 the velocities a_j'.
struct OscillatorForm {
    int n = 0;
    std::vector<double> omega, xi;
    std::vector<std::vector<ScalarTerm>> restoring;  // per master

    double coefficient(int master, const MultiIndex& index) const;
};

// Requires the first Cartesian equation of every master to be linear (graph and the
// real styles); throws UnsupportedError otherwise.
OscillatorForm oscillator_form(const RealRom& rom, double linear_tol = 1e-9);

}  // namespace imrom
