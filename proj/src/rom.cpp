#include "imrom/rom.hpp"

#include "imrom/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>

namespace imrom {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

double forcing_amplitude(const RealRom& rom, const Forcing& forcing) {
    if (rom.style == Style::CNF)
        throw UnsupportedError("forcing is not available for the complex normal form");
    if (forcing.master < 0 || forcing.master >= rom.n)
        throw std::invalid_argument("forced master out of range");
    return -forcing.kappa / rom.lambda[std::size_t(forcing.master)].imag();
}

Eigen::VectorXd evaluate_rhs(const RealRom& rom, const Eigen::VectorXd& a, double t,
                             const Forcing* forcing) {
    Eigen::VectorXd d = rom.rhs(a);
    if (forcing && forcing->kappa != 0.0)
        d[forcing->master + rom.n] += forcing_amplitude(rom, *forcing) * std::cos(forcing->omega * t);
    return d;
}

Trajectory integrate(const RealRom& rom, const Eigen::VectorXd& a0, double t0, double t1,
                     int n_out, const IntegrationOptions& opt, const Forcing* forcing) {
    if (n_out < 1 || !(t1 > t0)) throw std::invalid_argument("integrate: bad time span");
    if (forcing) forcing_amplitude(rom, *forcing);  // validates
    const int d = rom.dim();
    auto system = [&](const State& x, State& dx, double t) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
        Eigen::VectorXd r = evaluate_rhs(rom, xv, t, forcing);
        dx.assign(r.data(), r.data() + d);
    };
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(opt.abs_tol, opt.rel_tol);

    const double limit = opt.blowup_factor * std::max(1.0, a0.cwiseAbs().maxCoeff());
    Trajectory out;
    State x(a0.data(), a0.data() + d);
    double t = t0;
    double dt = std::min(opt.dt_initial, (t1 - t0) / n_out);
    out.t.push_back(t);
    out.a.push_back(a0);
    long steps = 0;
    for (int k = 1; k <= n_out; ++k) {
        const double target = t0 + (t1 - t0) * double(k) / n_out;
        while (t < target) {
            const double remaining = target - t;
            double trial = std::min(dt, remaining);
            const bool clipped = trial < dt;
            const double t_before = t;
            auto result = stepper.try_step(system, x, t, trial);
            if (result == odeint::fail) {
                if (trial < opt.dt_min)
                    throw DivergenceError("step size underflow at t = " + std::to_string(t), t);
                dt = trial;
                continue;
            }
            if (!clipped || trial > dt) dt = trial;
            if (t == t_before) throw DivergenceError("integration stalled", t);
            if (++steps > opt.max_steps) throw DivergenceError("step budget exhausted", t);
            double amax = 0.0;
            for (double v : x) {
                if (!std::isfinite(v)) throw DivergenceError("trajectory became non-finite", t);
                amax = std::max(amax, std::abs(v));
            }
            if (amax > limit)
                throw DivergenceError("trajectory diverged at t = " + std::to_string(t), t);
            if (target - t < 1e-14 * std::max(1.0, std::abs(target))) t = target;
        }
        out.t.push_back(target);
        out.a.emplace_back(Eigen::Map<const Eigen::VectorXd>(x.data(), d));
    }
    return out;
}

Eigen::MatrixXd reconstruct(const RealRom& rom, const Trajectory& traj) {
    Eigen::MatrixXd u(rom.n_dofs, Eigen::Index(traj.a.size()));
    for (std::size_t k = 0; k < traj.a.size(); ++k) u.col(Eigen::Index(k)) = rom.displacement(traj.a[k]);
    return u;
}

Eigen::MatrixXd modal_projection(const Eigen::MatrixXd& phi, const SparseMatrix& M,
                                 const Eigen::MatrixXd& u) {
    return phi.transpose() * (M * u);
}

double MultipleScales::frequency(double rho) const {
    const double r2 = rho * rho;
    return omega * (1.0 + gamma2 * r2 + gamma4 * r2 * r2);
}

MultipleScales multiple_scales(double omega, double c30, double c12) {
    MultipleScales ms;
    ms.omega = omega;
    ms.c30 = c30;
    ms.c12 = c12;
    ms.gamma2 = (3.0 * c30 + c12) / 8.0;
    ms.gamma4 = (-15.0 * c30 * c30 + 14.0 * c30 * c12 + c12 * c12) / 256.0;
    return ms;
}

MultipleScales multiple_scales(const OscillatorForm& osc, double tol) {
    if (osc.n != 1) throw UnsupportedError("multiple scales needs a single master mode");
    const double w = osc.omega[0];
    double scale = 0.0;
    for (const auto& t : osc.restoring[0]) scale = std::max(scale, std::abs(t.coeff));
    for (const auto& t : osc.restoring[0]) {
        if (t.index.size() == 2 && std::abs(t.coeff) > tol * scale)
            throw UnsupportedError("multiple scales expansion assumes no quadratic restoring terms");
    }
    // a'' + w^2 a + c_a3 a^3 + c_av2 a a'^2 + ... = 0
    const double c_a3 = osc.coefficient(0, {0, 0, 0});
    const double c_av2 = osc.coefficient(0, {0, 1, 1});
    return multiple_scales(w, c_a3 / (w * w), c_av2);
}

double graph_gamma4(std::complex<double> f, std::complex<double> fhat, double omega) {
    return ((4.0 * f + 3.0 * fhat) * fhat / (64.0 * omega * omega)).real();
}

double gamma2_from_f(std::complex<double> f, double omega) {
    return (std::complex<double>(0.0, -1.0) * f / (4.0 * omega)).real();
}

}  // namespace imrom
