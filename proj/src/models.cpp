#include "imrom/models.hpp"

#include "imrom/errors.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace imrom {

namespace {

SparseMatrix scalar_matrix(int n, const std::vector<double>& diag) {
    SparseMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        if (diag[std::size_t(i)] != 0.0) a.insert(i, i) = diag[std::size_t(i)];
    a.makeCompressed();
    return a;
}

constexpr double kPi = 3.14159265358979323846;

// 6-point Gauss-Legendre on [0, 1]
const std::array<double, 6> kGaussX = {0.033765242898423975, 0.16939530676686776, 0.38069040695840156,
                                       0.61930959304159844,  0.83060469323313224, 0.96623475710157603};
const std::array<double, 6> kGaussW = {0.085662246189585178, 0.18038078652406930, 0.23395696728634552,
                                       0.23395696728634552,  0.18038078652406930, 0.085662246189585178};

}  // namespace

SecondOrderModel duffing(double omega0, double gamma, double xi) {
    SecondOrderModel m;
    m.name = "duffing";
    m.M = scalar_matrix(1, {1.0});
    m.K = scalar_matrix(1, {omega0 * omega0});
    m.C = scalar_matrix(1, {2.0 * xi * omega0});
    m.G = QuadTensor(1);
    m.G.finalize();
    m.H = CubTensor(1);
    m.H.add(0, 0, 0, 0, gamma);
    m.H.finalize();
    return m;
}

SecondOrderModel coupled2dof(const Coupled2DofParams& p) {
    SecondOrderModel m;
    m.name = "coupled2dof";
    m.M = scalar_matrix(2, {1.0, 1.0});
    m.K = scalar_matrix(2, {p.omega1 * p.omega1, p.omega2 * p.omega2});
    m.C = scalar_matrix(2, {2.0 * p.xi1 * p.omega1, 2.0 * p.xi2 * p.omega2});
    m.G = QuadTensor(2);
    m.G.add(0, 0, 1, p.beta);
    m.G.add(1, 0, 0, p.beta);
    m.G.finalize();
    m.H = CubTensor(2);
    m.H.add(0, 0, 0, 0, p.gamma1);
    m.H.add(1, 1, 1, 1, p.gamma2);
    m.H.finalize();
    return m;
}

SecondOrderModel valley2dof(double omega1, double k, double radius) {
    const double r = radius;
    SecondOrderModel m;
    m.name = "valley2dof";
    m.M = scalar_matrix(2, {1.0, 1.0});
    m.K = scalar_matrix(2, {omega1 * omega1, omega1 * omega1 + k});
    m.C = SparseMatrix(2, 2);
    // cubic potential -k/(2R) (x1^2 x2 + x2^3)
    m.G = QuadTensor(2);
    m.G.add(0, 0, 1, -k / (2 * r));
    m.G.add(1, 0, 0, -k / (2 * r));
    m.G.add(1, 1, 1, -3 * k / (2 * r));
    m.G.finalize();
    // quartic potential k/(8R^2) (x1^2 + x2^2)^2
    m.H = CubTensor(2);
    m.H.add(0, 0, 0, 0, k / (2 * r * r));
    m.H.add(0, 0, 1, 1, k / (6 * r * r));
    m.H.add(1, 0, 0, 1, k / (6 * r * r));
    m.H.add(1, 1, 1, 1, k / (2 * r * r));
    m.H.finalize();
    return m;
}

SecondOrderModel vk_beam(const BeamParams& p, Support support) {
    const int ne = p.elements;
    if (ne < 4) throw ModelError("beam needs at least four elements");
    const double h = p.length / ne;
    const double area = p.width * p.thickness;
    const double inertia = p.width * std::pow(p.thickness, 3) / 12.0;
    const double ea = p.young * area, ei = p.young * inertia, rho_a = p.density * area;
    if (p.rise != 0.0 && support != Support::ClampedClamped)
        throw ModelError("initial rise is only defined for clamped-clamped beams");

    // Global numbering without the clamped nodes.
    const int nodes = ne + 1;
    std::vector<int> gdof(std::size_t(3 * nodes), -1);
    int n = 0;
    for (int k = 0; k < nodes; ++k) {
        const bool fixed = k == 0 || (support == Support::ClampedClamped && k == ne);
        for (int c = 0; c < 3; ++c)
            if (!fixed) gdof[std::size_t(3 * k + c)] = n++;
    }

    std::vector<Triplet> mt, kt;
    QuadTensor g(n);
    CubTensor hh(n);
    const double rise = p.rise * p.thickness;
    auto w0_slope = [&](double x) { return rise * kPi / p.length * std::sin(2.0 * kPi * x / p.length); };

    for (int e = 0; e < ne; ++e) {
        const double xa = e * h;
        // local dofs: u1 w1 th1 u2 w2 th2
        int map[6];
        for (int c = 0; c < 6; ++c) map[c] = gdof[std::size_t(3 * e + c)];
        double me[6][6] = {}, ke[6][6] = {};
        double ge[6][6][6] = {}, he[6][6][6][6] = {};
        for (std::size_t q = 0; q < kGaussX.size(); ++q) {
            const double s = kGaussX[q], wq = kGaussW[q] * h;
            const double nu[6] = {1 - s, 0, 0, s, 0, 0};
            const double nw[6] = {0, 1 - 3 * s * s + 2 * s * s * s, h * (s - 2 * s * s + s * s * s), 0,
                                  3 * s * s - 2 * s * s * s, h * (-s * s + s * s * s)};
            const double bu[6] = {-1 / h, 0, 0, 1 / h, 0, 0};
            const double bw[6] = {0, (-6 * s + 6 * s * s) / h, 1 - 4 * s + 3 * s * s, 0,
                                  (6 * s - 6 * s * s) / h, -2 * s + 3 * s * s};
            const double cw[6] = {0, (-6 + 12 * s) / (h * h), (-4 + 6 * s) / h, 0,
                                  (6 - 12 * s) / (h * h), (-2 + 6 * s) / h};
            const double slope0 = w0_slope(xa + s * h);
            double lv[6];
            for (int i = 0; i < 6; ++i) lv[i] = bu[i] + slope0 * bw[i];
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) {
                    me[i][j] += wq * rho_a * (nu[i] * nu[j] + nw[i] * nw[j]);
                    ke[i][j] += wq * (ea * lv[i] * lv[j] + ei * cw[i] * cw[j]);
                    for (int k = 0; k < 6; ++k) {
                        ge[i][j][k] += wq * 0.5 * ea *
                                       (lv[i] * bw[j] * bw[k] + bw[i] * lv[j] * bw[k] + bw[i] * bw[j] * lv[k]);
                        for (int l = 0; l < 6; ++l)
                            he[i][j][k][l] += wq * 0.5 * ea * bw[i] * bw[j] * bw[k] * bw[l];
                    }
                }
        }
        for (int i = 0; i < 6; ++i) {
            if (map[i] < 0) continue;
            for (int j = 0; j < 6; ++j) {
                if (map[j] < 0) continue;
                if (me[i][j] != 0.0) mt.emplace_back(map[i], map[j], me[i][j]);
                if (ke[i][j] != 0.0) kt.emplace_back(map[i], map[j], ke[i][j]);
                for (int k = j; k < 6; ++k) {
                    if (map[k] < 0) continue;
                    if (ge[i][j][k] != 0.0) g.add(map[i], map[j], map[k], ge[i][j][k]);
                    for (int l = k; l < 6; ++l) {
                        if (map[l] < 0) continue;
                        if (he[i][j][k][l] != 0.0) hh.add(map[i], map[j], map[k], map[l], he[i][j][k][l]);
                    }
                }
            }
        }
    }
    SecondOrderModel m;
    m.name = support == Support::ClampedFree ? "vk_cantilever" : (p.rise != 0.0 ? "vk_arch" : "vk_beam");
    m.M = SparseMatrix(n, n);
    m.M.setFromTriplets(mt.begin(), mt.end());
    m.K = SparseMatrix(n, n);
    m.K.setFromTriplets(kt.begin(), kt.end());
    // exact symmetry despite summation order
    m.M = SparseMatrix(0.5 * (m.M + SparseMatrix(m.M.transpose())));
    m.K = SparseMatrix(0.5 * (m.K + SparseMatrix(m.K.transpose())));
    m.M.makeCompressed();
    m.K.makeCompressed();
    m.C = SparseMatrix(p.rayleigh_alpha * m.M + p.rayleigh_beta * m.K);
    m.C.prune(0.0);
    m.C.makeCompressed();
    g.finalize();
    hh.finalize();
    m.G = std::move(g);
    m.H = std::move(hh);
    return m;
}

SecondOrderModel vk_arch(const BeamParams& params) { return vk_beam(params, Support::ClampedClamped); }

SecondOrderModel vk_cantilever(const BeamParams& params) {
    BeamParams p = params;
    p.rise = 0.0;
    return vk_beam(p, Support::ClampedFree);
}

void set_mass_proportional_damping(SecondOrderModel& model, double xi, double omega) {
    model.C = (2.0 * xi * omega) * model.M;
    model.C.makeCompressed();
}

}  // namespace imrom
