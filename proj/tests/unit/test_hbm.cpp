#include "helpers.hpp"

#include "imrom/errors.hpp"
#include "imrom/hbm.hpp"
#include "imrom/models.hpp"

#include <doctest.h>

using namespace imrom;

namespace {

RealRom rom_of(const SecondOrderModel& m, Style style, int order) {
    const ModalBasis b = solve_eigen(m, m.size());
    ParametrisationOptions o;
    o.style = style;
    o.order = order;
    return realify(parametrise(m, b, o));
}

// Least-squares coefficients of (omega / omega0 - 1) in powers rho^2, rho^4, ...
Eigen::VectorXd fit_even(const ContinuationCurve& c, double omega0, double rho_max, int terms) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : c.points)
        if (p.amplitude <= rho_max) pts.emplace_back(p.amplitude, p.omega / omega0 - 1.0);
    Eigen::MatrixXd a(Eigen::Index(pts.size()), terms);
    Eigen::VectorXd y(Eigen::Index(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double r2 = pts[k].first * pts[k].first;
        double v = r2;
        for (int j = 0; j < terms; ++j, v *= r2) a(Eigen::Index(k), j) = v;
        y[Eigen::Index(k)] = pts[k].second;
    }
    return a.colPivHouseholderQr().solve(y);
}

}  // namespace

TEST_CASE("duffing backbones follow the multiple scales law in every style") {
    const double w = 1.0, g = 1.0;
    const double gamma2 = 3 * g / (8 * w * w);
    HbmOptions opt;
    opt.amplitude_max = std::sqrt(0.05 / gamma2);
    opt.step_max = 0.05;
    for (Style s : {Style::Graph, Style::CNF, Style::RNF, Style::FRNF}) {
        CAPTURE(style_name(s));
        const RealRom rom = rom_of(duffing(w, g), s, 3);
        const ContinuationCurve c = hbm_backbone(rom, 0, opt);
        REQUIRE(c.points.size() > 10);
        const Eigen::VectorXd fit = fit_even(c, w, 0.15, 3);
        CHECK(testing::rel_err(fit[0], gamma2) < 1e-4);
        // second-order law, valid while the correction stays below 5 %
        const double c30 = g / (w * w), c12 = s == Style::RNF ? c30 : 0.0;
        const MultipleScales ms = multiple_scales(w, s == Style::RNF ? 0.75 * g / (w * w) : c30,
                                                  s == Style::RNF ? 0.75 * g / (w * w) : c12);
        if (s == Style::Graph || s == Style::FRNF) {
            for (const auto& p : c.points) {
                if (gamma2 * p.amplitude * p.amplitude > 0.05) continue;
                CHECK(std::abs(p.omega - ms.frequency(p.amplitude)) / w < 1e-4);
            }
        }
    }
}

TEST_CASE("complex normal form backbone equals the polar law") {
    const RealRom cnf = rom_of(duffing(1.0, 1.0), Style::CNF, 5);
    const PolarLaw law = polar_single_mode([&] {
        const SecondOrderModel m = duffing(1.0, 1.0);
        ParametrisationOptions o;
        o.order = 5;
        return parametrise(m, solve_eigen(m, 1), o);
    }());
    HbmOptions opt;
    opt.amplitude_max = 0.35;
    const ContinuationCurve c = hbm_backbone(cnf, 0, opt);
    for (const auto& p : c.points) CHECK(std::abs(p.omega - law.frequency(p.amplitude)) < 1e-10);
    // fourth-power coefficient from a fit of the curve
    const Eigen::VectorXd fit = fit_even(c, 1.0, 0.35, 3);
    CHECK(testing::rel_err(fit[1], law.angular[2]) < 1e-6);
}

TEST_CASE("backbone arclength is monotone and points satisfy the balance") {
    Coupled2DofParams cp;
    const RealRom rom = rom_of(coupled2dof(cp), Style::RNF, 5);
    HbmOptions opt;
    opt.amplitude_max = 0.5;
    const ContinuationCurve c = hbm_backbone(rom, 0, opt);
    REQUIRE(c.points.size() > 5);
    CHECK(c.stop_reason == "amplitude limit");
    for (std::size_t k = 1; k < c.points.size(); ++k) {
        CHECK(c.points[k].arclength > c.points[k - 1].arclength);
        const Eigen::VectorXd r = hbm_residual(rom, c.points[k].coeffs, c.points[k].omega, c.harmonics);
        CHECK(r.norm() < 1e-8 * std::max(1.0, c.points[k].coeffs.norm()));
    }
}

TEST_CASE("forced response peak sits on the backbone") {
    const double w = 1.0, g = 1.0, q = 50.0;
    const RealRom damped = rom_of(duffing(w, g, 1.0 / (2 * q)), Style::RNF, 3);
    const RealRom conservative = rom_of(duffing(w, g), Style::RNF, 3);
    HbmOptions opt;
    opt.amplitude_max = 1.0;
    const ContinuationCurve frf = hbm_frf(damped, 0, 0.005, 0.9 * w, 1.2 * w, opt);
    const auto peak = std::max_element(frf.points.begin(), frf.points.end(),
                                       [](const HbmPoint& a, const HbmPoint& b) { return a.amplitude < b.amplitude; });
    const ContinuationCurve bb = hbm_backbone(conservative, 0, opt);
    // backbone frequency at the peak amplitude, linear interpolation
    double wb = 0.0;
    for (std::size_t k = 1; k < bb.points.size(); ++k)
        if (bb.points[k].amplitude >= peak->amplitude) {
            const auto& a = bb.points[k - 1];
            const auto& b = bb.points[k];
            const double t = (peak->amplitude - a.amplitude) / (b.amplitude - a.amplitude);
            wb = a.omega + t * (b.omega - a.omega);
            break;
        }
    REQUIRE(wb > 0.0);
    CHECK(std::abs(peak->omega - wb) / wb < 0.01);
}

TEST_CASE("forced response matches long-time integration") {
    const double w = 1.0, xi = 0.05, kappa = 0.01;
    const RealRom rom = rom_of(duffing(w, 0.5, xi), Style::Graph, 3);
    HbmOptions opt;
    opt.stability = true;
    const ContinuationCurve frf = hbm_frf(rom, 0, kappa, 0.7, 1.3, opt);
    REQUIRE(frf.points.size() >= 10);
    const std::size_t stride = frf.points.size() / 10;
    int compared = 0;
    for (std::size_t k = 0; k < frf.points.size() && compared < 10; k += stride, ++compared) {
        const HbmPoint& p = frf.points[k];
        CHECK(p.stable == 1);
        const Forcing force{0, kappa, p.omega};
        const double period = 2 * M_PI / p.omega;
        const double settle = std::ceil(400.0 / period) * period;
        const Trajectory tr = integrate(rom, Eigen::Vector2d::Zero(), 0.0, settle, 10, {}, &force);
        const Trajectory last = integrate(rom, tr.a.back(), settle, settle + period, 2000, {}, &force);
        double amp = 0.0;
        for (const auto& a : last.a) amp = std::max(amp, std::abs(a[0]));
        CHECK(testing::rel_err(amp, p.peak) < 1e-3);
    }
    CHECK(compared == 10);
}

TEST_CASE("forced complex normal form is refused") {
    const RealRom cnf = rom_of(duffing(1.0, 1.0), Style::CNF, 3);
    CHECK_THROWS_AS(hbm_frf(cnf, 0, 0.01, 0.9, 1.1, HbmOptions{}), UnsupportedError);
}
