#include "imrom/realifier.hpp"

#include "imrom/errors.hpp"

#include <cmath>

namespace imrom {

using cd = std::complex<double>;

namespace {

using Poly = std::map<MultiIndex, cd>;

// Multiply p by sum_k lin[k].second * a_{lin[k].first}
Poly times_linear(const Poly& p, const std::vector<std::pair<int, cd>>& lin) {
    Poly out;
    for (const auto& [idx, c] : p)
        for (const auto& [var, w] : lin) {
            MultiIndex k = merge(idx, MultiIndex{var});
            out[k] += c * w;
        }
    return out;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

template <class Acc>
void collect(const Acc& acc, std::vector<RealTerm>& out, double& imag_max, double& real_max) {
    for (const auto& [idx, v] : acc) {
        imag_max = std::max(imag_max, max_abs(v.imag()));
        real_max = std::max(real_max, max_abs(v.real()));
        out.push_back({idx, v.real()});
    }
}

}  // namespace

std::map<MultiIndex, cd> expand_monomial(const MultiIndex& index, int n) {
    Poly p;
    p[MultiIndex{}] = 1.0;
    for (int s : index) {
        const int j = s % n;
        // z_j = (a_j + i a_{j+n}) / 2, its conjugate (a_j - i a_{j+n}) / 2
        const cd im = s < n ? cd(0.0, 0.5) : cd(0.0, -0.5);
        p = times_linear(p, {{j, cd(0.5)}, {j + n, im}});
    }
    return p;
}

RealRom realify(const Parametrisation& par) {
    RealRom rom;
    rom.style = par.style;
    rom.order = par.order;
    rom.n = par.n();
    rom.n_dofs = par.n_dofs;
    rom.lambda = par.masters.lambda;
    rom.omega = par.masters.omega;
    const int n = rom.n;
    const int N = par.n_dofs;

    std::map<MultiIndex, Eigen::VectorXcd> dyn, psi, ups;
    for (std::size_t p = 1; p < par.blocks.size(); ++p) {
        for (const auto& c : par.blocks[p].terms) {
            const auto poly = expand_monomial(c.index, n);
            Eigen::VectorXcd ft(2 * n);
            for (int j = 0; j < n; ++j) {
                ft[j] = c.f[j] + c.f[j + n];
                ft[j + n] = (c.f[j] - c.f[j + n]) / cd(0.0, 1.0);
            }
            const bool has_f = ft.cwiseAbs().maxCoeff() > 0.0;
            for (const auto& [idx, w] : poly) {
                auto& pv = psi[idx];
                if (pv.size() == 0) pv = Eigen::VectorXcd::Zero(N);
                pv += w * c.psi;
                auto& uv = ups[idx];
                if (uv.size() == 0) uv = Eigen::VectorXcd::Zero(N);
                uv += w * c.ups;
                if (has_f) {
                    auto& dv = dyn[idx];
                    if (dv.size() == 0) dv = Eigen::VectorXcd::Zero(2 * n);
                    dv += w * ft;
                }
            }
        }
    }

    double im_dyn = 0, re_dyn = 0, im_psi = 0, re_psi = 0, im_ups = 0, re_ups = 0;
    collect(dyn, rom.dynamics, im_dyn, re_dyn);
    collect(psi, rom.psi, im_psi, re_psi);
    collect(ups, rom.ups, im_ups, re_ups);
    auto rel = [](double im, double re) { return re > 0 ? im / re : im; };
    rom.imag_residue =
        std::max({rel(im_dyn, re_dyn), rel(im_psi, re_psi), rel(im_ups, re_ups)});
    return rom;
}

namespace {

double real_monomial(const MultiIndex& index, const Eigen::VectorXd& a) {
    double v = 1.0;
    for (int k : index) v *= a[k];
    return v;
}

Eigen::VectorXd eval_terms(const std::vector<RealTerm>& terms, const Eigen::VectorXd& a, int size) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(size);
    for (const auto& t : terms) out += real_monomial(t.index, a) * t.value;
    return out;
}

}  // namespace

Eigen::VectorXd RealRom::rhs(const Eigen::VectorXd& a) const { return eval_terms(dynamics, a, dim()); }

Eigen::VectorXd RealRom::displacement(const Eigen::VectorXd& a) const {
    return eval_terms(psi, a, n_dofs);
}

Eigen::VectorXd RealRom::velocity(const Eigen::VectorXd& a) const { return eval_terms(ups, a, n_dofs); }

Eigen::MatrixXd RealRom::jacobian(const Eigen::VectorXd& a) const {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim(), dim());
    for (const auto& t : dynamics) {
        for (std::size_t k = 0; k < t.index.size(); ++k) {
            if (k > 0 && t.index[k] == t.index[k - 1]) continue;
            int e = 0;
            double rest = 1.0;
            bool skipped = false;
            for (std::size_t m = 0; m < t.index.size(); ++m) {
                if (t.index[m] == t.index[k]) {
                    ++e;
                    if (!skipped) {
                        skipped = true;
                        continue;
                    }
                }
                rest *= a[t.index[m]];
            }
            j.col(t.index[k]) += (double(e) * rest) * t.value;
        }
    }
    return j;
}

int RealRom::degree() const {
    int d = 1;
    for (const auto& t : dynamics) d = std::max(d, int(t.index.size()));
    return d;
}

double PolarLaw::frequency(double rho) const {
    double v = 0.0, r2 = 1.0;
    for (double c : angular) {
        v += c * r2;
        r2 *= rho * rho;
    }
    return v;
}

double PolarLaw::growth(double rho) const {
    double v = 0.0, r = rho;
    for (double c : radial) {
        v += c * r;
        r *= rho * rho;
    }
    return v;
}

PolarLaw polar_single_mode(const Parametrisation& par) {
    if (par.style != Style::CNF)
        throw UnsupportedError("polar reduction requires the complex normal form");
    if (par.n() != 1) throw UnsupportedError("polar reduction requires a single master mode");
    PolarLaw law;
    // z' = sum_m f_m z (z zbar)^m with z = rho/2 exp(i alpha) gives
    // rho' + i rho alpha' = sum_m f_m rho^(2m+1) / 4^m.
    double scale = 1.0;
    for (int m = 0; 2 * m + 1 <= par.order; ++m) {
        MultiIndex idx(std::size_t(m + 1), 0);
        idx.insert(idx.end(), std::size_t(m), 1);
        const cd f = par.term(idx).f[0];
        law.radial.push_back(f.real() / scale);
        law.angular.push_back(f.imag() / scale);
        scale *= 4.0;
    }
    return law;
}

double OscillatorForm::coefficient(int master, const MultiIndex& index) const {
    for (const auto& t : restoring.at(std::size_t(master)))
        if (t.index == index) return t.coeff;
    return 0.0;
}

OscillatorForm oscillator_form(const RealRom& rom, double linear_tol) {
    const int n = rom.n;
    OscillatorForm osc;
    osc.n = n;
    for (int j = 0; j < n; ++j) {
        const double w = std::abs(rom.lambda[std::size_t(j)]);
        osc.omega.push_back(w);
        osc.xi.push_back(-rom.lambda[std::size_t(j)].real() / w);
    }
    double scale = 0.0;
    for (const auto& t : rom.dynamics) scale = std::max(scale, t.value.cwiseAbs().maxCoeff());
    // The displacement equations must read a_j' = Re(lambda) a_j - Im(lambda) a_{j+n}.
    for (const auto& t : rom.dynamics) {
        for (int j = 0; j < n; ++j) {
            double expect = 0.0;
            if (t.index == MultiIndex{j}) expect = rom.lambda[std::size_t(j)].real();
            if (t.index == MultiIndex{j + n}) expect = -rom.lambda[std::size_t(j)].imag();
            if (std::abs(t.value[j] - expect) > linear_tol * scale)
                throw UnsupportedError(
                    "oscillator form needs a linear displacement equation; monomial " +
                    to_string(t.index) + " appears in it (style " + style_name(rom.style) + ")");
        }
    }
    // Substitute a_{k+n} = (Re(lambda_k) a_k - a_k') / Im(lambda_k); velocities are
    // variables n..2n-1 of the oscillator polynomial.
    osc.restoring.resize(std::size_t(n));
    for (int j = 0; j < n; ++j) {
        std::map<MultiIndex, double> acc;
        const double im_j = rom.lambda[std::size_t(j)].imag();
        for (const auto& t : rom.dynamics) {
            if (t.index.size() < 2) continue;
            const double c = t.value[j + n];
            if (c == 0.0) continue;
            Poly p;
            p[MultiIndex{}] = c * im_j;
            for (int v : t.index) {
                if (v < n) {
                    p = times_linear(p, {{v, cd(1.0)}});
                } else {
                    const int k = v - n;
                    const cd lk = rom.lambda[std::size_t(k)];
                    p = times_linear(p, {{k, cd(lk.real() / lk.imag())}, {k + n, cd(-1.0 / lk.imag())}});
                }
            }
            for (const auto& [idx, w] : p) acc[idx] += w.real();
        }
        for (const auto& [idx, c] : acc)
            if (c != 0.0) osc.restoring[std::size_t(j)].push_back({idx, c});
    }
    return osc;
}

}  // namespace imrom
