#include "imrom/parametriser.hpp"

#include "imrom/errors.hpp"

#include <Eigen/SparseLU>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace imrom {

using cd = std::complex<double>;
using CSparse = Eigen::SparseMatrix<cd>;

const Coefficient& OrderBlock::at(const MultiIndex& index) const {
    auto it = position.find(index);
    if (it == position.end())
        throw std::out_of_range("no coefficient for monomial " + to_string(index));
    return terms[it->second];
}

const Coefficient& Parametrisation::term(const MultiIndex& index) const {
    if (index.empty() || int(index.size()) > order)
        throw std::out_of_range("monomial order outside parametrisation: " + to_string(index));
    return blocks[index.size()].at(index);
}

int Parametrisation::total_solves() const {
    int t = 0;
    for (const auto& b : blocks) t += b.solves;
    return t;
}

namespace {

cd monomial(const MultiIndex& index, const Eigen::VectorXcd& z) {
    cd v = 1.0;
    for (int s : index) v *= z[s];
    return v;
}

// d pi_I / dz_s contracted with the direction w
cd monomial_derivative(const MultiIndex& index, const Eigen::VectorXcd& z,
                       const Eigen::VectorXcd& w) {
    cd total = 0.0;
    for (std::size_t k = 0; k < index.size(); ++k) {
        if (k > 0 && index[k] == index[k - 1]) continue;
        int e = 0;
        cd rest = 1.0;
        bool skipped = false;
        for (std::size_t j = 0; j < index.size(); ++j) {
            if (index[j] == index[k]) {
                ++e;
                if (!skipped) {
                    skipped = true;
                    continue;
                }
            }
            rest *= z[index[j]];
        }
        total += double(e) * rest * w[index[k]];
    }
    return total;
}

int permutation_count(const MultiIndex& a, const MultiIndex& b, const MultiIndex& c) {
    if (a == b && b == c) return 1;
    if (a == b || b == c || a == c) return 3;
    return 6;
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const int used = int(std::min<std::size_t>(count, std::size_t(threads)));
    for (int t = 0; t < used; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Hager's 1-norm estimate of ||A^{-1}|| from an existing factorization.
double inverse_norm1_estimate(Eigen::SparseLU<CSparse>& lu, int n) {
    Eigen::VectorXcd x = Eigen::VectorXcd::Constant(n, cd(1.0 / n, 0.0));
    double est = 0.0;
    int last = -1;
    for (int it = 0; it < 5; ++it) {
        Eigen::VectorXcd y = lu.solve(x);
        est = y.cwiseAbs().sum();
        Eigen::VectorXcd xi(n);
        for (int i = 0; i < n; ++i) xi[i] = std::abs(y[i]) > 0 ? y[i] / std::abs(y[i]) : cd(1.0);
        Eigen::VectorXcd z = lu.adjoint().solve(xi);
        Eigen::Index j;
        const double zmax = z.cwiseAbs().maxCoeff(&j);
        if (zmax <= (z.adjoint() * x)(0).real() || int(j) == last) break;
        last = int(j);
        x.setZero();
        x[j] = 1.0;
    }
    return est;
}

double norm1(const CSparse& a) {
    double best = 0.0;
    for (int k = 0; k < a.outerSize(); ++k) {
        double col = 0.0;
        for (CSparse::InnerIterator it(a, k); it; ++it) col += std::abs(it.value());
        best = std::max(best, col);
    }
    return best;
}

}  // namespace

Eigen::VectorXcd assemble_rhs_GH(const MultiIndex& index, const std::vector<OrderBlock>& lower,
                                 const SecondOrderModel& model) {
    const int p = int(index.size());
    const int N = model.size();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(N);
    auto psi = [&](const MultiIndex& a) -> const Eigen::VectorXcd& {
        return lower.at(a.size()).at(a).psi;
    };

    if (model.G.nnz() > 0) {
        for (const auto& a : sub_multisets(index, 1, p - 1)) {
            const MultiIndex b = difference(index, a);
            if (a < b)
                out += 2.0 * contract_quad(model.G, psi(a), psi(b));
            else if (a == b)
                out += contract_quad(model.G, psi(a), psi(a));
        }
    }
    if (model.H.nnz() > 0 && p >= 3) {
        for (const auto& a : sub_multisets(index, 1, p - 2)) {
            const MultiIndex rest = difference(index, a);
            for (const auto& b : sub_multisets(rest, 1, int(rest.size()) - 1)) {
                const MultiIndex c = difference(rest, b);
                if (!(a <= b && b <= c)) continue;
                out += double(permutation_count(a, b, c)) *
                       contract_cub(model.H, psi(a), psi(b), psi(c));
            }
        }
    }
    return out;
}

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> assemble_rhs_munu(const MultiIndex& index,
                                                                const std::vector<OrderBlock>& lower,
                                                                int n, int n_dofs) {
    const int p = int(index.size());
    Eigen::VectorXcd mu = Eigen::VectorXcd::Zero(n_dofs);
    Eigen::VectorXcd nu = Eigen::VectorXcd::Zero(n_dofs);
    if (p < 3) return {mu, nu};
    for (const auto& b : sub_multisets(index, 2, p - 1)) {
        const Coefficient& fb = lower.at(b.size()).at(b);
        const MultiIndex rest = difference(index, b);
        const auto e = exponents(rest, n);
        for (int s = 0; s < 2 * n; ++s) {
            const cd fs = fb.f[s];
            if (fs == cd(0.0)) continue;
            const MultiIndex a = merge(rest, MultiIndex{s});
            const Coefficient& ca = lower.at(a.size()).at(a);
            const double weight = double(e[std::size_t(s)] + 1);
            mu += (weight * fs) * ca.psi;
            nu += (weight * fs) * ca.ups;
        }
    }
    return {mu, nu};
}

HomologicalSolution solve_homological(cd sigma_i, const Eigen::VectorXcd& rhs,
                                      const Eigen::VectorXcd& mu, const ResonanceSet& res,
                                      const SecondOrderModel& model, const MasterSet& masters,
                                      const Eigen::MatrixXd& phi, double condition_limit,
                                      const MultiIndex& index, const ModalBasis* basis) {
    const int N = model.size();
    const int m = int(res.size());
    const int n = masters.n();

    std::vector<Eigen::Triplet<cd>> trips;
    trips.reserve(std::size_t(model.M.nonZeros() + model.K.nonZeros() + model.C.nonZeros()) +
                  std::size_t(2 * m * N + m * m));
    const cd s2 = sigma_i * sigma_i;
    for (int k = 0; k < model.M.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(model.M, k); it; ++it)
            trips.emplace_back(int(it.row()), int(it.col()), s2 * it.value());
    for (int k = 0; k < model.K.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(model.K, k); it; ++it)
            trips.emplace_back(int(it.row()), int(it.col()), cd(it.value()));
    for (int k = 0; k < model.C.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(model.C, k); it; ++it)
            trips.emplace_back(int(it.row()), int(it.col()), sigma_i * it.value());

    Eigen::VectorXcd b(N + m);
    b.head(N) = rhs;
    for (int j = 0; j < m; ++j) {
        const int r = res.r[std::size_t(j)];
        const Eigen::VectorXd mphi = model.M * phi.col(r % n);
        const cd coef = sigma_i - std::conj(masters.lambda[std::size_t(r)]);
        for (int i = 0; i < N; ++i) {
            if (mphi[i] == 0.0) continue;
            trips.emplace_back(i, N + j, coef * mphi[i]);
            trips.emplace_back(N + j, i, coef * mphi[i]);
        }
        for (int k = 0; k < m; ++k)
            if (res.r[std::size_t(k)] % n == r % n) trips.emplace_back(N + j, N + k, cd(1.0));
        b[N + j] = -mphi.cast<cd>().dot(mu);  // dot() conjugates the first argument; mphi is real
    }

    CSparse a(N + m, N + m);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    Eigen::SparseLU<CSparse> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success)
        throw SolveError("homological system for " + to_string(index) + " is singular");

    HomologicalSolution sol;
    if (m == 0) {
        sol.condition_estimate = norm1(a) * inverse_norm1_estimate(lu, N);
        if (!(sol.condition_estimate < condition_limit)) {
            int nearest = 0;
            double dist = INFINITY;
            auto consider = [&](cd lam, int mode) {
                const double d = std::abs(sigma_i - lam);
                if (d < dist) {
                    dist = d;
                    nearest = mode;
                }
            };
            if (basis) {
                for (int k = 0; k < basis->size(); ++k) {
                    consider(basis->lambda(k), k);
                    consider(basis->lambda(k, true), k);
                }
            } else {
                for (std::size_t s = 0; s < masters.lambda.size(); ++s)
                    consider(masters.lambda[s], masters.mode_of(int(s)));
            }
            throw SolveError("homological system for " + to_string(index) +
                             " is numerically singular (condition estimate " +
                             std::to_string(sol.condition_estimate) +
                             "); nearest eigenvalue is mode " + std::to_string(nearest + 1) +
                             ", review the resonance tolerance or include that mode as a master");
        }
    }
    Eigen::VectorXcd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite())
        throw SolveError("homological solve failed for " + to_string(index));
    sol.psi = x.head(N);
    sol.f = Eigen::VectorXcd::Zero(2 * n);
    for (int j = 0; j < m; ++j) sol.f[res.r[std::size_t(j)]] = x[N + j];
    return sol;
}

Eigen::VectorXcd velocity_mapping(cd sigma_i, const Eigen::VectorXcd& psi, const Eigen::VectorXcd& f,
                                  const Eigen::VectorXcd& mu, const MasterSet& masters,
                                  const Eigen::MatrixXd& phi) {
    const int n = masters.n();
    Eigen::VectorXcd ups = sigma_i * psi + mu;
    for (int s = 0; s < 2 * n; ++s)
        if (f[s] != cd(0.0)) ups += f[s] * phi.col(s % n).cast<cd>();
    return ups;
}

Parametrisation parametrise(const SecondOrderModel& model, const ModalBasis& basis,
                            const ParametrisationOptions& opt) {
    if (opt.order < 1) throw std::invalid_argument("parametrisation order must be >= 1");
    if (model.damped() && !basis.classical)
        throw ModelError("parametrisation requires classical damping");
    Parametrisation par;
    par.style = opt.style;
    par.order = opt.order;
    par.n_dofs = model.size();
    par.masters = make_master_set(basis, opt.masters);
    par.resonance_tol = opt.resonance_tol;
    const int n = par.n();
    const int N = model.size();
    if (opt.style == Style::FRNF && n != 1)
        throw UnsupportedError("the full real normal form (frnf) is only available for a single master mode");
    par.phi.resize(N, n);
    for (int j = 0; j < n; ++j) par.phi.col(j) = basis.phi.col(par.masters.modes[std::size_t(j)]);

    par.blocks.resize(std::size_t(opt.order + 1));
    {
        OrderBlock& b1 = par.blocks[1];
        b1.order = 1;
        for (int s = 0; s < 2 * n; ++s) {
            Coefficient c;
            c.index = {s};
            c.sigma = par.masters.lambda[std::size_t(s)];
            c.psi = par.phi.col(s % n).cast<cd>();
            c.ups = c.sigma * c.psi;
            c.f = Eigen::VectorXcd::Zero(2 * n);
            c.f[s] = c.sigma;
            b1.position[c.index] = b1.terms.size();
            b1.terms.push_back(std::move(c));
        }
    }

    for (int p = 2; p <= opt.order; ++p) {
        OrderBlock& blk = par.blocks[std::size_t(p)];
        blk.order = p;
        const auto all = enumerate_multi_indices(n, p);
        std::vector<MultiIndex> todo;
        for (const auto& idx : all)
            if (!opt.fold_conjugates || idx <= conjugate(idx, n)) todo.push_back(idx);

        std::vector<Coefficient> solved(todo.size());
        parallel_for(todo.size(), opt.threads, [&](std::size_t k) {
            const MultiIndex& idx = todo[k];
            Coefficient c;
            c.index = idx;
            c.sigma = sigma(idx, par.masters.lambda);
            c.resonances =
                classify_resonances(idx, opt.style, par.masters, basis, opt.resonance_tol);
            Eigen::VectorXcd rhs = -assemble_rhs_GH(idx, par.blocks, model);
            auto [mu, nu] = assemble_rhs_munu(idx, par.blocks, n, N);
            rhs -= (model.M * nu);
            rhs -= c.sigma * (model.M * mu) + model.C * mu;
            auto sol = solve_homological(c.sigma, rhs, mu, c.resonances, model, par.masters,
                                         par.phi, opt.condition_limit, idx, &basis);
            c.psi = std::move(sol.psi);
            c.f = std::move(sol.f);
            c.ups = velocity_mapping(c.sigma, c.psi, c.f, mu, par.masters, par.phi);
            c.solved = true;
            solved[k] = std::move(c);
        });
        blk.solves = int(todo.size());
        for (const auto& c : solved)
            for (std::size_t k = 0; k < c.resonances.size(); ++k)
                if (c.resonances.kind[k] == ResonanceKind::Internal)
                    spdlog::info("monomial {} bordered for internal resonance with reduced index {}",
                                 to_string(c.index), c.resonances.r[k] + 1);

        std::map<MultiIndex, Coefficient> by_index;
        for (auto& c : solved) {
            if (opt.fold_conjugates) {
                MultiIndex ci = conjugate(c.index, n);
                if (ci != c.index) {
                    Coefficient d;
                    d.index = ci;
                    d.sigma = std::conj(c.sigma);
                    d.psi = c.psi.conjugate();
                    d.ups = c.ups.conjugate();
                    d.f = Eigen::VectorXcd::Zero(2 * n);
                    for (int s = 0; s < 2 * n; ++s) d.f[(s + n) % (2 * n)] = std::conj(c.f[s]);
                    d.resonances.r.clear();
                    for (std::size_t k = 0; k < c.resonances.r.size(); ++k) {
                        const int s = c.resonances.r[k];
                        d.resonances.r.push_back((s + n) % (2 * n));
                        d.resonances.kind.push_back(c.resonances.kind[k]);
                    }
                    // keep r sorted alongside kind
                    std::vector<std::size_t> order(d.resonances.r.size());
                    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
                    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
                        return d.resonances.r[x] < d.resonances.r[y];
                    });
                    ResonanceSet sorted;
                    for (auto k : order) {
                        sorted.r.push_back(d.resonances.r[k]);
                        sorted.kind.push_back(d.resonances.kind[k]);
                    }
                    d.resonances = std::move(sorted);
                    d.solved = false;
                    by_index.emplace(ci, std::move(d));
                }
            }
            MultiIndex key = c.index;
            by_index.emplace(std::move(key), std::move(c));
        }
        for (auto& [idx, c] : by_index) {
            blk.position[idx] = blk.terms.size();
            blk.terms.push_back(std::move(c));
        }
    }
    return par;
}

Eigen::VectorXcd Parametrisation::psi(const Eigen::VectorXcd& z) const {
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n_dofs);
    for (std::size_t p = 1; p < blocks.size(); ++p)
        for (const auto& c : blocks[p].terms) u += monomial(c.index, z) * c.psi;
    return u;
}

Eigen::VectorXcd Parametrisation::ups(const Eigen::VectorXcd& z) const {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_dofs);
    for (std::size_t p = 1; p < blocks.size(); ++p)
        for (const auto& c : blocks[p].terms) v += monomial(c.index, z) * c.ups;
    return v;
}

Eigen::VectorXcd Parametrisation::f(const Eigen::VectorXcd& z) const {
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(2 * n());
    for (std::size_t p = 1; p < blocks.size(); ++p)
        for (const auto& c : blocks[p].terms) r += monomial(c.index, z) * c.f;
    return r;
}

InvarianceResidual invariance_residual(const Parametrisation& par, const SecondOrderModel& model,
                                       const Eigen::VectorXcd& z) {
    const int N = par.n_dofs;
    const Eigen::VectorXcd fz = par.f(z);
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(N), v = u, dpsi = u, dups = u;
    for (std::size_t p = 1; p < par.blocks.size(); ++p)
        for (const auto& c : par.blocks[p].terms) {
            const cd pi = monomial(c.index, z);
            const cd dpi = monomial_derivative(c.index, z, fz);
            u += pi * c.psi;
            v += pi * c.ups;
            dpsi += dpi * c.psi;
            dups += dpi * c.ups;
        }
    Eigen::VectorXcd dyn = model.M * dups + model.C * v + model.K * u + contract_quad(model.G, u, u) +
                           contract_cub(model.H, u, u, u);
    Eigen::VectorXcd kin = model.M * (dpsi - v);
    double scale = 0.0;
    for (int j = 0; j < par.n(); ++j) scale = std::max(scale, (model.K * par.phi.col(j)).norm());
    return {dyn.norm() / scale, kin.norm() / scale};
}

Eigen::VectorXcd polar_point(int n, double rho, double alpha, int master) {
    Eigen::VectorXcd z = Eigen::VectorXcd::Zero(2 * n);
    z[master] = 0.5 * rho * std::exp(cd(0.0, alpha));
    z[master + n] = std::conj(z[master]);
    return z;
}

}  // namespace imrom
