#include "helpers.hpp"
#include "oracle.hpp"

#include "imrom/errors.hpp"
#include "imrom/models.hpp"
#include "imrom/parametriser.hpp"

#include <doctest.h>

using namespace imrom;
using cd = std::complex<double>;

namespace {

Parametrisation run(const SecondOrderModel& m, Style style, int order, std::vector<int> masters = {0},
                    int n_compute = 0, double tol = 1e-3) {
    const int nc = n_compute > 0 ? n_compute : m.size();
    const ModalBasis b = solve_eigen(m, nc);
    ParametrisationOptions o;
    o.style = style;
    o.order = order;
    o.masters = std::move(masters);
    o.resonance_tol = tol;
    return parametrise(m, b, o);
}

void check_close(cd got, cd want, double rel = 1e-10) {
    if (want == cd(0.0))
        CHECK(std::abs(got) < 1e-14);
    else
        CHECK(std::abs(got - want) <= rel * std::abs(want));
}

SecondOrderModel coupled(double w2 = 2.5, double beta = 1.0, double gamma1 = 1.0) {
    Coupled2DofParams p;
    p.omega2 = w2;
    p.beta = beta;
    p.gamma1 = gamma1;
    return coupled2dof(p);
}

}  // namespace

TEST_CASE("duffing complex coefficients for every normal style") {
    for (auto [w, g] : {std::pair{1.0, 1.0}, std::pair{2.0, 3.0}, std::pair{0.7, -0.4}}) {
        CAPTURE(w);
        const SecondOrderModel m = duffing(w, g);
        const cd i(0.0, 1.0);
        const double psi0 = g / (8 * w * w), psi2 = -3 * g / (4 * w * w);
        const cd f13 = i * 3.0 * g / (2 * w), f1 = i * g / (2 * w);

        const Parametrisation cnf = run(m, Style::CNF, 3);
        check_close(cnf.term({0, 0, 0}).psi[0], psi0);
        check_close(cnf.term({0, 0, 1}).psi[0], psi2);
        check_close(cnf.term({0, 0, 0}).f[0], 0.0);
        check_close(cnf.term({0, 0, 1}).f[0], f13);
        check_close(cnf.term({0, 1, 1}).f[0], 0.0);
        check_close(cnf.term({1, 1, 1}).f[0], 0.0);
        // velocity mapping: sigma = 3 i w, no mu at third order, no f for {111}
        check_close(cnf.term({0, 0, 0}).ups[0], 3.0 * i * w * psi0);

        const Parametrisation rnf = run(m, Style::RNF, 3);
        check_close(rnf.term({0, 0, 0}).psi[0], psi0);
        check_close(rnf.term({0, 0, 1}).psi[0], 0.0);
        check_close(rnf.term({0, 0, 0}).f[0], 0.0);
        check_close(rnf.term({0, 0, 1}).f[0], f13);
        check_close(rnf.term({0, 1, 1}).f[0], f13);
        check_close(rnf.term({1, 1, 1}).f[0], 0.0);

        for (Style s : {Style::FRNF, Style::Graph}) {
            const Parametrisation p = run(m, s, 3);
            for (const auto& idx : enumerate_multi_indices(1, 3)) check_close(p.term(idx).psi[0], 0.0);
            check_close(p.term({0, 0, 0}).f[0], f1);
            check_close(p.term({0, 0, 1}).f[0], f13);
            check_close(p.term({0, 1, 1}).f[0], f13);
            check_close(p.term({1, 1, 1}).f[0], f1);
        }
    }
}

TEST_CASE("order one is the linear modal basis") {
    const SecondOrderModel m = coupled();
    const ModalBasis b = solve_eigen(m, 2);
    const Parametrisation p = run(m, Style::CNF, 3);
    for (int s = 0; s < 2; ++s) {
        const Coefficient& c = p.term({s});
        const cd lam = s == 0 ? b.lambda(0) : b.lambda(0, true);
        CHECK((c.psi - b.phi.col(0).cast<cd>()).norm() < 1e-14);
        CHECK((c.ups - lam * b.phi.col(0).cast<cd>()).norm() < 1e-14);
        CHECK(std::abs(c.f[s] - lam) < 1e-14);
        CHECK(std::abs(c.f[1 - s]) == 0.0);
    }
}

TEST_CASE("cubic right-hand side of the duffing oscillator") {
    const double g = 1.7;
    const SecondOrderModel m = duffing(1.3, g);
    Parametrisation p = run(m, Style::CNF, 3);
    check_close(assemble_rhs_GH({0, 0, 1}, p.blocks, m)[0], 3 * g, 1e-14);
    check_close(assemble_rhs_GH({0, 0, 0}, p.blocks, m)[0], g, 1e-14);
    CHECK(assemble_rhs_GH({0, 0}, p.blocks, m).norm() == 0.0);
    auto [mu, nu] = assemble_rhs_munu({0, 0, 1}, p.blocks, 1, 1);
    CHECK(mu.norm() == 0.0);
    CHECK(nu.norm() == 0.0);
}

TEST_CASE("collected assembly equals the ordered expansion oracle") {
    for (unsigned seed : {1u, 2u}) {
        const SecondOrderModel m = testing::random_model(3, 40 + seed, 0.3);
        for (int n = 1; n <= 2; ++n) {
            std::vector<int> masters;
            for (int j = 0; j < n; ++j) masters.push_back(j);
            Parametrisation p = run(m, Style::Graph, 5, masters);
            oracle::randomise(p, seed);
            for (int order = 2; order <= 5; ++order)
                for (const auto& idx : enumerate_multi_indices(n, order)) {
                    CAPTURE(to_string(idx));
                    const auto ref = oracle::expand_ordered(m, p.blocks, idx, n);
                    const Eigen::VectorXcd gh = assemble_rhs_GH(idx, p.blocks, m);
                    auto [mu, nu] = assemble_rhs_munu(idx, p.blocks, n, 3);
                    const double scale = 1.0 + ref.g.norm() + ref.h.norm();
                    CHECK((gh - ref.g - ref.h).norm() <= 1e-12 * scale);
                    CHECK((mu - ref.mu).norm() <= 1e-12 * (1.0 + ref.mu.norm()));
                    CHECK((nu - ref.nu).norm() <= 1e-12 * (1.0 + ref.nu.norm()));
                }
        }
    }
}

TEST_CASE("zero lower blocks give a zero expansion") {
    const SecondOrderModel m = testing::random_model(3, 9);
    Parametrisation p = run(m, Style::CNF, 4);
    for (auto& block : p.blocks)
        for (auto& c : block.terms) {
            c.psi.setZero();
            c.ups.setZero();
            c.f.setZero();
        }
    const auto ref = oracle::expand_ordered(m, p.blocks, {0, 0, 1, 1}, 1);
    CHECK(ref.g.norm() + ref.h.norm() + ref.mu.norm() + ref.nu.norm() == 0.0);
}

TEST_CASE("conjugate symmetry and velocity link of every stored coefficient") {
    const SecondOrderModel m = coupled();
    for (Style s : {Style::Graph, Style::CNF, Style::RNF, Style::FRNF}) {
        const Parametrisation p = run(m, s, 6);
        for (int order = 2; order <= 6; ++order)
            for (const auto& c : p.blocks[std::size_t(order)].terms) {
                const Coefficient& cc = p.term(conjugate(c.index, 1));
                CHECK((cc.psi.conjugate() - c.psi).norm() <= 1e-12 * (1.0 + c.psi.norm()));
                CHECK((cc.ups.conjugate() - c.ups).norm() <= 1e-12 * (1.0 + c.ups.norm()));
                CHECK(std::abs(std::conj(cc.f[1]) - c.f[0]) <= 1e-12 * (1.0 + std::abs(c.f[0])));
                auto [mu, nu] = assemble_rhs_munu(c.index, p.blocks, 1, 2);
                (void)nu;
                const Eigen::VectorXcd ups = velocity_mapping(c.sigma, c.psi, c.f, mu, p.masters, p.phi);
                CHECK((ups - c.ups).norm() <= 1e-12 * (1.0 + c.ups.norm()));
            }
    }
}

TEST_CASE("conservative models give real mappings and imaginary dynamics") {
    const SecondOrderModel m = coupled();
    for (Style s : {Style::Graph, Style::CNF, Style::RNF, Style::FRNF}) {
        const Parametrisation p = run(m, s, 5);
        for (int order = 2; order <= 5; ++order)
            for (const auto& c : p.blocks[std::size_t(order)].terms) {
                CHECK(c.psi.imag().norm() <= 1e-12 * (1.0 + c.psi.norm()));
                CHECK(c.f.real().norm() <= 1e-12 * (1.0 + c.f.norm()));
            }
    }
}

TEST_CASE("graph style orthogonality and antisymmetry") {
    const SecondOrderModel m = testing::random_model(4, 17, 0.5);
    const Parametrisation p = run(m, Style::Graph, 5, {0, 1});
    const Eigen::MatrixXd mphi = m.M * p.phi;
    for (int order = 2; order <= 5; ++order)
        for (const auto& c : p.blocks[std::size_t(order)].terms) {
            CHECK((mphi.transpose() * c.psi).norm() < 1e-10 * (1.0 + c.psi.norm()));
            CHECK((mphi.transpose() * c.ups).norm() < 1e-10 * (1.0 + c.ups.norm()));
            for (int r = 0; r < 2; ++r) CHECK(std::abs(c.f[r] + c.f[r + 2]) < 1e-10 * (1.0 + c.f.norm()));
        }
}

TEST_CASE("real normal form: orthogonal resonant mappings and the sum rule") {
    const SecondOrderModel m = coupled(2.5, 1.0, 1.0);
    const Parametrisation p = run(m, Style::RNF, 7);
    const Eigen::VectorXd mphi = m.M * p.phi.col(0);
    int resonant = 0;
    for (int order = 2; order <= 7; ++order)
        for (const auto& c : p.blocks[std::size_t(order)].terms) {
            if (c.resonances.empty()) continue;
            ++resonant;
            CHECK(std::abs(mphi.dot(c.psi.real())) + std::abs(mphi.dot(c.psi.imag())) < 1e-12 * (1 + c.psi.norm()));
            CHECK(std::abs(mphi.cast<cd>().dot(c.ups)) < 1e-12 * (1 + c.ups.norm()));
            auto [mu, nu] = assemble_rhs_munu(c.index, p.blocks, 1, 2);
            (void)nu;
            const cd rule = -(mphi.cast<cd>().transpose() * mu)(0);
            CHECK(std::abs(c.f[0] + c.f[1] - rule) < 1e-12 * (1 + c.f.norm()));
        }
    CHECK(resonant == 6);  // {112},{122},{11122},{11222},{1111222},{1112222}
}

TEST_CASE("single mode complex normal form keeps only z (z zbar)^m") {
    const SecondOrderModel m = coupled();
    const Parametrisation p = run(m, Style::CNF, 7);
    for (int order = 2; order <= 7; ++order)
        for (const auto& c : p.blocks[std::size_t(order)].terms) {
            const auto e = exponents(c.index, 1);
            const bool z_form = e[0] == e[1] + 1;
            const bool zbar_form = e[1] == e[0] + 1;
            if (!z_form) CHECK(c.f[0] == cd(0.0));
            if (!zbar_form) CHECK(c.f[1] == cd(0.0));
        }
}

TEST_CASE("linear model has vanishing nonlinear mappings") {
    const SecondOrderModel m = duffing(1.4, 0.0);
    for (Style s : {Style::Graph, Style::CNF, Style::RNF, Style::FRNF}) {
        const Parametrisation p = run(m, s, 5);
        for (int order = 2; order <= 5; ++order)
            for (const auto& c : p.blocks[std::size_t(order)].terms) {
                CHECK(c.psi.norm() == 0.0);
                CHECK(c.f.norm() == 0.0);
            }
    }
}

TEST_CASE("without quadratic terms the even orders vanish") {
    const SecondOrderModel m = coupled(2.5, 0.0, 1.0);
    const Parametrisation p = run(m, Style::CNF, 6);
    for (int order : {2, 4, 6})
        for (const auto& c : p.blocks[std::size_t(order)].terms) CHECK(c.psi.norm() == 0.0);
}

TEST_CASE("non-resonant coupled model reaches order seven, 1:2 ratio is an outer resonance") {
    const Parametrisation p = run(coupled(2.5), Style::CNF, 7);
    for (int order = 2; order <= 7; ++order)
        for (const auto& c : p.blocks[std::size_t(order)].terms)
            for (auto k : c.resonances.kind) CHECK(k == ResonanceKind::Trivial);
    try {
        run(coupled(2.0), Style::CNF, 3);
        FAIL("expected an outer resonance");
    } catch (const OuterResonanceError& e) {
        CHECK(e.mode() == 2);
    }
    // both modes as masters: the 1:2 resonance becomes internal and is bordered
    const Parametrisation both = run(coupled(2.0), Style::CNF, 3, {0, 1});
    CHECK(both.term({0, 0}).resonances.r == std::vector<int>{1});
    CHECK(std::abs(both.term({0, 0}).f[1]) > 0.1);
}

TEST_CASE("near resonance missed by the tolerance trips the condition guard") {
    const SecondOrderModel m = coupled(2.0 * (1.0 + 1e-13));
    const ModalBasis b = solve_eigen(m, 2);
    ParametrisationOptions o;
    o.order = 2;
    o.resonance_tol = 1e-16;
    try {
        parametrise(m, b, o);
        FAIL("expected a singular system");
    } catch (const SolveError& e) {
        CHECK(std::string(e.what()).find("mode 2") != std::string::npos);
    }
}

TEST_CASE("linear solve counts") {
    const SecondOrderModel m = coupled();
    for (Style s : {Style::Graph, Style::CNF, Style::RNF, Style::FRNF}) {
        const Parametrisation p = run(m, s, 9);
        CHECK(p.solves(1) == 0);
        int total = 0;
        for (int order = 2; order <= 9; ++order) {
            CHECK(p.solves(order) == (order + 2) / 2);
            total += (order + 2) / 2;
        }
        CHECK(p.total_solves() == total);
    }
    const ModalBasis b = solve_eigen(m, 2);
    ParametrisationOptions o;
    o.order = 5;
    o.fold_conjugates = false;
    const Parametrisation unfolded = parametrise(m, b, o);
    o.fold_conjugates = true;
    const Parametrisation folded = parametrise(m, b, o);
    for (int order = 2; order <= 5; ++order) {
        CHECK(unfolded.solves(order) == order + 1);
        for (const auto& c : folded.blocks[std::size_t(order)].terms)
            CHECK((unfolded.term(c.index).psi - c.psi).norm() < 1e-12 * (1 + c.psi.norm()));
    }
}

TEST_CASE("threads do not change the result") {
    const SecondOrderModel m = testing::random_model(6, 23, 0.3);
    const ModalBasis b = solve_eigen(m, 6);
    ParametrisationOptions o;
    o.style = Style::Graph;
    o.order = 5;
    o.masters = {0, 1};
    const Parametrisation serial = parametrise(m, b, o);
    o.threads = 4;
    const Parametrisation parallel = parametrise(m, b, o);
    for (int order = 2; order <= 5; ++order)
        for (const auto& c : serial.blocks[std::size_t(order)].terms) {
            const auto& d = parallel.term(c.index);
            CHECK(c.psi == d.psi);
            CHECK(c.ups == d.ups);
            CHECK(c.f == d.f);
        }
}

TEST_CASE("full real normal form with several masters is refused") {
    const SecondOrderModel m = coupled();
    CHECK_THROWS_AS(run(m, Style::FRNF, 3, {0, 1}), UnsupportedError);
}

TEST_CASE("invariance residual vanishes at the origin and decays with the order") {
    const SecondOrderModel m = duffing(1.0, 1.0);
    const Parametrisation p = run(m, Style::CNF, 3);
    const auto r0 = invariance_residual(p, m, polar_point(1, 0.0, 0.0));
    CHECK(r0.dynamic == 0.0);
    CHECK(r0.kinematic == 0.0);
    const auto r1 = invariance_residual(p, m, polar_point(1, 1e-2, 0.3));
    const auto r2 = invariance_residual(p, m, polar_point(1, 2e-2, 0.3));
    CHECK(std::log2(r2.dynamic / r1.dynamic) > 4.5);
}
