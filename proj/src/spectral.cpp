#include "imrom/spectral.hpp"

#include "imrom/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace imrom {

using cd = std::complex<double>;

std::complex<double> ModalBasis::lambda(int j, bool conj) const {
    const double w = omega[j], z = xi[j];
    const double im = w * std::sqrt(1.0 - z * z);
    return {-z * w, conj ? -im : im};
}

namespace {

void dense_modes(const SecondOrderModel& model, int n, Eigen::VectorXd& w2, Eigen::MatrixXd& v) {
    Eigen::MatrixXd K(model.K), M(model.M);
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw ModelError("mass matrix is not positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
    if (es.info() != Eigen::Success) throw SolveError("generalized eigensolver failed");
    w2 = es.eigenvalues().head(n);
    v = es.eigenvectors().leftCols(n);
}

// Subspace iteration on K^{-1} M with Rayleigh-Ritz, for the lowest n modes.
void sparse_modes(const SecondOrderModel& model, int n, const SpectralOptions& opt,
                  Eigen::VectorXd& w2, Eigen::MatrixXd& v) {
    const int N = model.size();
    const int q = std::min(N, std::max(2 * n, n + 8));
    Eigen::SimplicialLDLT<SparseMatrix> mchk(model.M);
    if (mchk.info() != Eigen::Success || (mchk.vectorD().array() <= 0).any())
        throw ModelError("mass matrix is not positive definite");
    Eigen::SimplicialLDLT<SparseMatrix> kfac(model.K);
    if (kfac.info() != Eigen::Success)
        throw SolveError("stiffness factorization failed in sparse eigensolver");

    Eigen::MatrixXd x(N, q);
    // Deterministic start: smooth-ish columns, independent of any RNG.
    for (int j = 0; j < q; ++j)
        for (int i = 0; i < N; ++i) x(i, j) = std::sin(double((i + 1) * (j + 1)) * 0.7 + 0.3 * j);

    for (int it = 0; it < opt.sparse_max_iter; ++it) {
        Eigen::MatrixXd y = kfac.solve(model.M * x);
        Eigen::MatrixXd kr = y.transpose() * (model.K * y);
        Eigen::MatrixXd mr = y.transpose() * (model.M * y);
        kr = 0.5 * (kr + kr.transpose());
        mr = 0.5 * (mr + mr.transpose());
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(kr, mr);
        if (es.info() != Eigen::Success) throw SolveError("Rayleigh-Ritz step failed");
        x = y * es.eigenvectors();
        w2 = es.eigenvalues().head(n);
        double worst = 0.0;
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd kx = model.K * x.col(j);
            Eigen::VectorXd r = kx - w2[j] * (model.M * x.col(j));
            worst = std::max(worst, r.norm() / std::max(kx.norm(), 1e-300));
        }
        if (worst < opt.sparse_tol) {
            v = x.leftCols(n);
            return;
        }
    }
    throw SolveError("sparse eigensolver did not converge");
}

}  // namespace

ModalBasis solve_eigen(const SecondOrderModel& model, int n_compute, const SpectralOptions& opt) {
    const int N = model.size();
    if (n_compute <= 0 || n_compute > N)
        throw std::invalid_argument("n_compute must be in [1, N]");
    Eigen::VectorXd w2;
    Eigen::MatrixXd v;
    if (N <= opt.dense_threshold)
        dense_modes(model, n_compute, w2, v);
    else
        sparse_modes(model, n_compute, opt, w2, v);

    const double scale = std::max(std::abs(w2.maxCoeff()), 1e-300);
    ModalBasis b;
    b.omega.resize(n_compute);
    b.phi.resize(N, n_compute);
    for (int j = 0; j < n_compute; ++j) {
        if (w2[j] <= 1e-12 * scale)
            throw ModelError("mode " + std::to_string(j + 1) +
                             " has a non-positive eigenvalue (rigid body or unstable)");
        b.omega[j] = std::sqrt(w2[j]);
        Eigen::VectorXd p = v.col(j);
        p /= std::sqrt(p.dot(model.M * p));
        Eigen::Index imax;
        p.cwiseAbs().maxCoeff(&imax);
        if (p[imax] < 0) p = -p;
        b.phi.col(j) = p;
    }

    b.xi = Eigen::VectorXd::Zero(n_compute);
    if (model.damped()) {
        for (int j = 0; j < n_compute; ++j) {
            b.xi[j] = b.phi.col(j).dot(model.C * b.phi.col(j)) / (2.0 * b.omega[j]);
            if (b.xi[j] >= 1.0 || b.xi[j] < 0.0)
                throw ModelError("mode " + std::to_string(j + 1) +
                                 " has a damping ratio outside [0, 1)");
        }
        b.damping_coupling = damping_coupling_ratio(model, b);
        b.classical = b.damping_coupling <= opt.classical_damping_tol;
        if (!b.classical && opt.classical_damping_strict)
            throw ModelError("damping is not classical: off-diagonal modal damping ratio " +
                             std::to_string(b.damping_coupling) + " exceeds tolerance");
    }
    return b;
}

double damping_coupling_ratio(const SecondOrderModel& model, const ModalBasis& basis) {
    if (!model.damped()) return 0.0;
    Eigen::MatrixXd c = basis.phi.transpose() * (model.C * basis.phi);
    double diag = 0.0, off = 0.0;
    for (int j = 0; j < c.rows(); ++j)
        for (int k = 0; k < c.cols(); ++k) {
            if (j == k)
                diag = std::max(diag, std::abs(c(j, k)));
            else
                off = std::max(off, std::abs(c(j, k)));
        }
    if (diag == 0.0) return off == 0.0 ? 0.0 : INFINITY;
    return off / diag;
}

OrthogonalityResiduals first_order_orthogonality_residuals(const SecondOrderModel& model,
                                                           const ModalBasis& basis, cd sigma) {
    const int N = model.size(), n = basis.size();
    const int m = 2 * n;
    std::vector<cd> lam(m);
    Eigen::MatrixXcd X(2 * N, m), Y(2 * N, m);
    for (int r = 0; r < m; ++r) {
        const int j = r % n;
        lam[r] = basis.lambda(j, r >= n);
        Eigen::VectorXcd p = basis.phi.col(j).cast<cd>();
        Y.col(r) << p * lam[r], p;
        X.col(r) << p, -p * std::conj(lam[r]);
        X.col(r) /= (lam[r] - std::conj(lam[r]));
    }
    SparseMatrix C = model.C.rows() ? model.C : SparseMatrix(N, N);
    // B Y and A Y, block by block
    Eigen::MatrixXcd BY(2 * N, m), AY(2 * N, m);
    Eigen::MatrixXcd Ytop = Y.topRows(N), Ybot = Y.bottomRows(N);
    BY.topRows(N) = model.M.cast<cd>() * Ytop;
    BY.bottomRows(N) = model.M.cast<cd>() * Ybot;
    AY.topRows(N) = C.cast<cd>() * Ytop + model.K.cast<cd>() * Ybot;
    AY.bottomRows(N) = -(model.M.cast<cd>() * Ytop);
    Eigen::MatrixXcd xb = X.transpose() * BY;
    Eigen::MatrixXcd xa = X.transpose() * AY;

    OrthogonalityResiduals res;
    double lmax = 0.0;
    for (auto l : lam) lmax = std::max(lmax, std::abs(l));
    for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s) {
            const double d = r == s ? 1.0 : 0.0;
            res.mass = std::max(res.mass, std::abs(xb(r, s) - d));
            res.stiffness = std::max(res.stiffness, std::abs(xa(r, s) + lam[r] * d) / lmax);
        }
    for (int r = 0; r < m; ++r) {
        const int j = r % n;
        Eigen::VectorXcd p = basis.phi.col(j).cast<cd>();
        Eigen::VectorXcd mp = model.M.cast<cd>() * p;
        Eigen::VectorXcd lhs = (sigma + lam[r]) * mp + C.cast<cd>() * p;
        Eigen::VectorXcd rhs = (sigma - std::conj(lam[r])) * mp;
        const double scale = (std::abs(sigma) + std::abs(lam[r])) * mp.norm();
        res.identity = std::max(res.identity, (lhs - rhs).norm() / scale);
    }
    return res;
}

}  // namespace imrom
