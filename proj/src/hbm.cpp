#include "imrom/hbm.hpp"

#include "imrom/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <functional>

namespace imrom {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Trigonometric collocation with enough samples that polynomial products of degree
// deg are projected without aliasing.
struct Galerkin {
    int h = 0, d = 0, nh = 0, nt = 0;
    Eigen::MatrixXd e;  // nt x nh: coefficients -> samples
    Eigen::MatrixXd p;  // nh x nt: samples -> coefficients

    Galerkin(int harmonics, int dim, int degree) : h(harmonics), d(dim), nh(2 * harmonics + 1) {
        nt = (degree + 1) * harmonics + 2;
        e.resize(nt, nh);
        p.resize(nh, nt);
        for (int t = 0; t < nt; ++t) {
            const double th = kTwoPi * t / nt;
            e(t, 0) = 1.0;
            p(0, t) = 1.0 / nt;
            for (int k = 1; k <= h; ++k) {
                e(t, 2 * k - 1) = std::cos(k * th);
                e(t, 2 * k) = std::sin(k * th);
                p(2 * k - 1, t) = 2.0 * std::cos(k * th) / nt;
                p(2 * k, t) = 2.0 * std::sin(k * th) / nt;
            }
        }
    }

    int size() const { return d * nh; }

    // d/dtheta applied to one state's coefficients
    Eigen::VectorXd derivative(const Eigen::VectorXd& x) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
        for (int i = 0; i < d; ++i)
            for (int k = 1; k <= h; ++k) {
                const double c = x[i * nh + 2 * k - 1], s = x[i * nh + 2 * k];
                out[i * nh + 2 * k - 1] = k * s;
                out[i * nh + 2 * k] = -k * c;
            }
        return out;
    }

    Eigen::MatrixXd samples(const Eigen::VectorXd& x) const {
        Eigen::MatrixXd a(d, nt);
        for (int i = 0; i < d; ++i) a.row(i) = (e * x.segment(i * nh, nh)).transpose();
        return a;
    }
};

struct Problem {
    const RealRom& rom;
    Galerkin g;
    const Forcing* forcing = nullptr;
    double force_amp = 0.0;

    Problem(const RealRom& r, int harmonics, const Forcing* f)
        : rom(r), g(harmonics, r.dim(), r.degree()), forcing(f) {
        if (f) force_amp = forcing_amplitude(r, *f);
    }

    Eigen::VectorXd residual(const Eigen::VectorXd& x, double w) const {
        Eigen::VectorXd r = w * g.derivative(x);
        const Eigen::MatrixXd a = g.samples(x);
        Eigen::MatrixXd fv(g.d, g.nt);
        for (int t = 0; t < g.nt; ++t) fv.col(t) = rom.rhs(a.col(t));
        for (int i = 0; i < g.d; ++i) r.segment(i * g.nh, g.nh) -= g.p * fv.row(i).transpose();
        if (forcing) r[(forcing->master + rom.n) * g.nh + 1] -= force_amp;
        return r;
    }

    // d residual / d x
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, double w) const {
        const int n = g.size();
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < g.d; ++i)
            for (int k = 1; k <= g.h; ++k) {
                j(i * g.nh + 2 * k - 1, i * g.nh + 2 * k) = w * k;
                j(i * g.nh + 2 * k, i * g.nh + 2 * k - 1) = -w * k;
            }
        const Eigen::MatrixXd a = g.samples(x);
        std::vector<Eigen::MatrixXd> jt(std::size_t(g.nt));
        for (int t = 0; t < g.nt; ++t) jt[std::size_t(t)] = rom.jacobian(a.col(t));
        Eigen::VectorXd diag(g.nt);
        for (int i = 0; i < g.d; ++i)
            for (int l = 0; l < g.d; ++l) {
                for (int t = 0; t < g.nt; ++t) diag[t] = jt[std::size_t(t)](i, l);
                if (diag.cwiseAbs().maxCoeff() == 0.0) continue;
                j.block(i * g.nh, l * g.nh, g.nh, g.nh) -= g.p * diag.asDiagonal() * g.e;
            }
        return j;
    }

    double scale(const Eigen::VectorXd& x, double w) const {
        return std::max({std::abs(w) * x.cwiseAbs().maxCoeff(), std::abs(force_amp), 1e-300});
    }

    double amplitude(const Eigen::VectorXd& x, int state) const {
        return std::hypot(x[state * g.nh + 1], x[state * g.nh + 2]);
    }

    // max |a_state(theta)| on a grid much finer than the collocation grid
    double peak(const Eigen::VectorXd& x, int state) const {
        const int samples = 64 * g.h;
        const Eigen::VectorXd c = x.segment(state * g.nh, g.nh);
        double best = 0.0;
        for (int t = 0; t < samples; ++t) {
            const double th = kTwoPi * t / samples;
            double v = c[0];
            for (int k = 1; k <= g.h; ++k) v += c[2 * k - 1] * std::cos(k * th) + c[2 * k] * std::sin(k * th);
            best = std::max(best, std::abs(v));
        }
        return best;
    }

    // Hill method: Floquet exponents approximated by the eigenvalues of -(dR/dx) whose
    // imaginary parts are smallest in magnitude.
    int stable(const Eigen::VectorXd& x, double w) const {
        Eigen::MatrixXd j = -jacobian(x, w);
        Eigen::EigenSolver<Eigen::MatrixXd> es(j);
        if (es.info() != Eigen::Success) return -1;
        std::vector<std::complex<double>> ev(es.eigenvalues().data(),
                                             es.eigenvalues().data() + es.eigenvalues().size());
        std::sort(ev.begin(), ev.end(), [](auto p, auto q) { return std::abs(p.imag()) < std::abs(q.imag()); });
        for (int k = 0; k < g.d && k < int(ev.size()); ++k)
            if (ev[std::size_t(k)].real() > 1e-8 * std::abs(w)) return 0;
        return 1;
    }
};

// Pseudo-arclength continuation on y = (x, w) in scaled variables.
// eqs(y) returns the equations, jac(y) their Jacobian (rows x (size+1)).
struct Continuation {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eqs;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jac;
    std::function<double(const Eigen::VectorXd&)> tol;
    int max_iter = 25;

    // Newton on [eqs; extra], extra given with its gradient; least squares when
    // the system is rank deficient but consistent.
    bool correct(Eigen::VectorXd& y, const std::function<double(const Eigen::VectorXd&)>& extra,
                 const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& extra_grad,
                 int& iterations) const {
        for (iterations = 0; iterations <= max_iter; ++iterations) {
            Eigen::VectorXd r = eqs(y);
            const double c = extra(y);
            if (!r.allFinite() || !std::isfinite(c)) return false;
            if (iterations > 0 && r.cwiseAbs().maxCoeff() <= tol(y) && std::abs(c) <= 1e-12)
                return true;
            Eigen::MatrixXd j = jac(y);
            Eigen::MatrixXd a(j.rows() + 1, j.cols());
            a << j, extra_grad(y).transpose();
            Eigen::VectorXd b(r.size() + 1);
            b << -r, -c;
            Eigen::VectorXd dy = a.colPivHouseholderQr().solve(b);
            if (!dy.allFinite()) return false;
            y += dy;
        }
        return false;
    }

    Eigen::VectorXd tangent(const Eigen::VectorXd& y, const Eigen::VectorXd& previous) const {
        Eigen::MatrixXd j = jac(y);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeFullV);
        Eigen::VectorXd t = svd.matrixV().col(svd.matrixV().cols() - 1);
        if (previous.size() && t.dot(previous) < 0) t = -t;
        return t;
    }
};

}  // namespace

Eigen::VectorXd hbm_residual(const RealRom& rom, const Eigen::VectorXd& coeffs, double omega,
                             int harmonics, const Forcing* forcing) {
    Problem pb(rom, harmonics, forcing);
    return pb.residual(coeffs, omega);
}

Eigen::MatrixXd hbm_samples(const ContinuationCurve& curve, const HbmPoint& point, int samples) {
    const int nh = 2 * curve.harmonics + 1;
    Eigen::MatrixXd a(curve.dim, samples);
    for (int t = 0; t < samples; ++t) {
        const double th = kTwoPi * t / samples;
        for (int i = 0; i < curve.dim; ++i) {
            double v = point.coeffs[i * nh];
            for (int k = 1; k <= curve.harmonics; ++k)
                v += point.coeffs[i * nh + 2 * k - 1] * std::cos(k * th) +
                     point.coeffs[i * nh + 2 * k] * std::sin(k * th);
            a(i, t) = v;
        }
    }
    return a;
}

namespace {

ContinuationCurve run(const Problem& pb, const Continuation& cont, Eigen::VectorXd y,
                      const Eigen::VectorXd& scale, int master, const HbmOptions& opt,
                      const std::function<std::string(const HbmPoint&)>& stop, bool orient_by_omega,
                      double orient_sign) {
    ContinuationCurve curve;
    curve.harmonics = pb.g.h;
    curve.dim = pb.g.d;
    curve.master = master;
    const int n = pb.g.size();

    auto make_point = [&](const Eigen::VectorXd& ys, double s, int iters) {
        HbmPoint pt;
        Eigen::VectorXd yu = ys.cwiseProduct(scale);
        pt.coeffs = yu.head(n);
        pt.omega = yu[n];
        pt.arclength = s;
        pt.amplitude = pb.amplitude(pt.coeffs, master);
        pt.peak = pb.peak(pt.coeffs, master);
        pt.iterations = iters;
        if (opt.stability) pt.stable = pb.stable(pt.coeffs, pt.omega);
        return pt;
    };

    double s = 0.0;
    curve.points.push_back(make_point(y, s, 0));
    Eigen::VectorXd t = cont.tangent(y, Eigen::VectorXd());
    const double orient = orient_by_omega ? t[n] : t.head(n).dot(y.head(n));
    if (orient * orient_sign < 0) t = -t;

    double ds = opt.step;
    while (int(curve.points.size()) < opt.max_points) {
        Eigen::VectorXd yp = y + ds * t;
        Eigen::VectorXd yc = yp;
        int iters = 0;
        const Eigen::VectorXd y0 = y, t0 = t;
        const double ds0 = ds;
        bool ok = cont.correct(
            yc, [&](const Eigen::VectorXd& v) { return t0.dot(v - y0) - ds0; },
            [&](const Eigen::VectorXd&) { return t0; }, iters);
        if (!ok) {
            ds *= 0.5;
            if (ds < opt.step_min) {
                curve.stop_reason = "step size underflow";
                throw ConvergenceError("continuation failed to converge after step reductions at omega = " +
                                       std::to_string(y[n] * scale[n]));
            }
            continue;
        }
        s += (yc - y).norm();
        y = yc;
        t = cont.tangent(y, t0);
        curve.points.push_back(make_point(y, s, iters));
        const std::string why = stop(curve.points.back());
        if (!why.empty()) {
            curve.stop_reason = why;
            return curve;
        }
        if (iters <= 3)
            ds = std::min(ds * 1.5, opt.step_max);
        else if (iters > 8)
            ds *= 0.5;
    }
    curve.stop_reason = "point budget exhausted";
    return curve;
}

}  // namespace

ContinuationCurve hbm_backbone(const RealRom& rom, int master, const HbmOptions& opt) {
    if (master < 0 || master >= rom.n) throw std::invalid_argument("backbone master out of range");
    Problem pb(rom, opt.harmonics, nullptr);
    const int n = pb.g.size(), nh = pb.g.nh;
    const double w1 = rom.lambda[std::size_t(master)].imag();
    const int phase_idx = master * nh + 2;  // sin coefficient of the first harmonic of a_m
    const int amp_idx = master * nh + 1;

    Eigen::VectorXd scale = Eigen::VectorXd::Constant(n + 1, opt.amplitude_max);
    scale[n] = w1;

    Continuation cont;
    cont.max_iter = opt.newton_max_iter;
    cont.eqs = [&](const Eigen::VectorXd& ys) {
        Eigen::VectorXd yu = ys.cwiseProduct(scale);
        Eigen::VectorXd r(n + 1);
        r.head(n) = pb.residual(yu.head(n), yu[n]);
        r[n] = yu[phase_idx];
        return r;
    };
    cont.jac = [&](const Eigen::VectorXd& ys) {
        Eigen::VectorXd yu = ys.cwiseProduct(scale);
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n + 1, n + 1);
        j.topLeftCorner(n, n) = pb.jacobian(yu.head(n), yu[n]);
        j.block(0, n, n, 1) = pb.g.derivative(yu.head(n));
        j(n, phase_idx) = 1.0;
        return Eigen::MatrixXd(j * scale.asDiagonal());
    };
    cont.tol = [&](const Eigen::VectorXd& ys) {
        Eigen::VectorXd yu = ys.cwiseProduct(scale);
        return opt.newton_tol * pb.scale(yu.head(n), yu[n]);
    };

    // Linear guess: a_m = A cos(theta), a_{m+n} = A sin(theta).
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n + 1);
    y[amp_idx] = opt.amplitude_start;
    y[(master + rom.n) * nh + 2] = opt.amplitude_start;
    y[n] = w1;
    y = y.cwiseQuotient(scale);
    int iters = 0;
    const double target = opt.amplitude_start / scale[amp_idx];
    if (!cont.correct(
            y, [&](const Eigen::VectorXd& v) { return v[amp_idx] - target; },
            [&](const Eigen::VectorXd&) {
                Eigen::VectorXd gvec = Eigen::VectorXd::Zero(n + 1);
                gvec[amp_idx] = 1.0;
                return gvec;
            },
            iters))
        throw ConvergenceError("backbone: first point did not converge");

    auto stop = [&](const HbmPoint& p) -> std::string {
        if (p.amplitude > opt.amplitude_max) return "amplitude limit";
        if (p.omega < opt.omega_min || p.omega > opt.omega_max) return "frequency limit";
        if (p.omega <= 0) return "frequency limit";
        return "";
    };
    return run(pb, cont, y, scale, master, opt, stop, false, 1.0);
}

ContinuationCurve hbm_frf(const RealRom& rom, int master, double kappa, double omega_start,
                          double omega_end, const HbmOptions& opt) {
    if (master < 0 || master >= rom.n) throw std::invalid_argument("forced master out of range");
    Forcing forcing{master, kappa, 0.0};
    Problem pb(rom, opt.harmonics, &forcing);
    const int n = pb.g.size();
    const double w1 = rom.lambda[std::size_t(master)].imag();

    // unknowns are scaled by the linear resonant amplitude, capped by the amplitude limit
    const double decay = std::max(std::abs(rom.lambda[std::size_t(master)].real()), 1e-3 * w1);
    const double linear_peak = std::abs(forcing_amplitude(rom, forcing)) / decay;
    const double amp = linear_peak > 0.0 ? std::min(opt.amplitude_max, linear_peak) : std::min(opt.amplitude_max, 1.0);
    Eigen::VectorXd scale = Eigen::VectorXd::Constant(n + 1, amp);
    scale[n] = w1;

    Continuation cont;
    cont.max_iter = opt.newton_max_iter;
    cont.eqs = [&](const Eigen::VectorXd& ys) {
        Eigen::VectorXd yu = ys.cwiseProduct(scale);
        return pb.residual(yu.head(n), yu[n]);
    };
    cont.jac = [&](const Eigen::VectorXd& ys) {
        Eigen::VectorXd yu = ys.cwiseProduct(scale);
        Eigen::MatrixXd j(n, n + 1);
        j.leftCols(n) = pb.jacobian(yu.head(n), yu[n]);
        j.col(n) = pb.g.derivative(yu.head(n));
        return Eigen::MatrixXd(j * scale.asDiagonal());
    };
    cont.tol = [&](const Eigen::VectorXd& ys) {
        Eigen::VectorXd yu = ys.cwiseProduct(scale);
        return opt.newton_tol * pb.scale(yu.head(n), yu[n]);
    };

    Eigen::VectorXd y = Eigen::VectorXd::Zero(n + 1);
    y[n] = omega_start / scale[n];
    const double w_fixed = y[n];
    int iters = 0;
    if (!cont.correct(
            y, [&](const Eigen::VectorXd& v) { return v[n] - w_fixed; },
            [&](const Eigen::VectorXd&) {
                Eigen::VectorXd gvec = Eigen::VectorXd::Zero(n + 1);
                gvec[n] = 1.0;
                return gvec;
            },
            iters))
        throw ConvergenceError("frequency response: first point did not converge");

    const double dir = omega_end >= omega_start ? 1.0 : -1.0;
    auto stop = [&](const HbmPoint& p) -> std::string {
        if ((p.omega - omega_end) * dir > 0) return "end frequency reached";
        if ((p.omega - omega_start) * dir < -0.5 * std::abs(omega_end - omega_start))
            return "turned back past start frequency";
        return "";
    };
    return run(pb, cont, y, scale, master, opt, stop, true, dir);
}

}  // namespace imrom
