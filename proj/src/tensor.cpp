#include "imrom/tensor.hpp"

#include "imrom/errors.hpp"

#include <algorithm>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

namespace imrom {

namespace {

void check_index(int i, int n, const char* what) {
    if (i < 0 || i >= n) {
        throw ParseError(std::string("tensor index out of range in ") + what + ": " +
                         std::to_string(i + 1) + " not in [1, " + std::to_string(n) + "]");
    }
}

template <class V>
V quad_impl(const QuadTensor& g, const V& a, const V& b) {
    if (a.size() != g.size() || b.size() != g.size())
        throw std::invalid_argument("contract_quad: dimension mismatch");
    V out = V::Zero(g.size());
    for (const auto& e : g.entries()) {
        if (e.r == e.s)
            out[e.p] += e.value * a[e.r] * b[e.r];
        else
            out[e.p] += e.value * (a[e.r] * b[e.s] + a[e.s] * b[e.r]);
    }
    return out;
}

template <class V>
V cub_impl(const CubTensor& h, const V& a, const V& b, const V& c) {
    if (a.size() != h.size() || b.size() != h.size() || c.size() != h.size())
        throw std::invalid_argument("contract_cub: dimension mismatch");
    V out = V::Zero(h.size());
    for (const auto& e : h.entries()) {
        const int r = e.r, s = e.s, t = e.t;
        typename V::Scalar acc;
        if (r == s && s == t) {
            acc = a[r] * b[r] * c[r];
        } else if (r == s) {
            acc = a[r] * b[r] * c[t] + a[r] * b[t] * c[r] + a[t] * b[r] * c[r];
        } else if (s == t) {
            acc = a[r] * b[s] * c[s] + a[s] * b[r] * c[s] + a[s] * b[s] * c[r];
        } else {
            acc = a[r] * b[s] * c[t] + a[r] * b[t] * c[s] + a[s] * b[r] * c[t] +
                  a[s] * b[t] * c[r] + a[t] * b[r] * c[s] + a[t] * b[s] * c[r];
        }
        out[e.p] += e.value * acc;
    }
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    return in;
}

bool skip_line(const std::string& line) {
    auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == '#';
}

}  // namespace

void QuadTensor::add(int p, int r, int s, double value) {
    if (finalized_) throw std::logic_error("QuadTensor::add after finalize");
    check_index(p, n_, "quadratic tensor");
    check_index(r, n_, "quadratic tensor");
    check_index(s, n_, "quadratic tensor");
    if (r > s) std::swap(r, s);
    entries_.push_back({p, r, s, value});
}

void QuadTensor::finalize() {
    std::sort(entries_.begin(), entries_.end(), [](const QuadEntry& x, const QuadEntry& y) {
        return std::tie(x.p, x.r, x.s) < std::tie(y.p, y.r, y.s);
    });
    std::vector<QuadEntry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (!merged.empty() && merged.back().p == e.p && merged.back().r == e.r &&
            merged.back().s == e.s)
            merged.back().value += e.value;
        else
            merged.push_back(e);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const QuadEntry& e) { return e.value == 0.0; }),
                 merged.end());
    entries_ = std::move(merged);
    finalized_ = true;
}

void CubTensor::add(int p, int r, int s, int t, double value) {
    if (finalized_) throw std::logic_error("CubTensor::add after finalize");
    check_index(p, n_, "cubic tensor");
    check_index(r, n_, "cubic tensor");
    check_index(s, n_, "cubic tensor");
    check_index(t, n_, "cubic tensor");
    int idx[3] = {r, s, t};
    std::sort(idx, idx + 3);
    entries_.push_back({p, idx[0], idx[1], idx[2], value});
}

void CubTensor::finalize() {
    std::sort(entries_.begin(), entries_.end(), [](const CubEntry& x, const CubEntry& y) {
        return std::tie(x.p, x.r, x.s, x.t) < std::tie(y.p, y.r, y.s, y.t);
    });
    std::vector<CubEntry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
        if (!merged.empty() && merged.back().p == e.p && merged.back().r == e.r &&
            merged.back().s == e.s && merged.back().t == e.t)
            merged.back().value += e.value;
        else
            merged.push_back(e);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const CubEntry& e) { return e.value == 0.0; }),
                 merged.end());
    entries_ = std::move(merged);
    finalized_ = true;
}

Eigen::VectorXd contract_quad(const QuadTensor& g, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b) {
    return quad_impl(g, a, b);
}

Eigen::VectorXcd contract_quad(const QuadTensor& g, const Eigen::VectorXcd& a,
                               const Eigen::VectorXcd& b) {
    return quad_impl(g, a, b);
}

Eigen::VectorXd contract_cub(const CubTensor& h, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
    return cub_impl(h, a, b, c);
}

Eigen::VectorXcd contract_cub(const CubTensor& h, const Eigen::VectorXcd& a,
                              const Eigen::VectorXcd& b, const Eigen::VectorXcd& c) {
    return cub_impl(h, a, b, c);
}

Eigen::MatrixXd quad_jacobian(const QuadTensor& g, const Eigen::VectorXd& u) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(g.size(), g.size());
    for (const auto& e : g.entries()) {
        if (e.r == e.s) {
            j(e.p, e.r) += 2.0 * e.value * u[e.r];
        } else {
            j(e.p, e.r) += 2.0 * e.value * u[e.s];
            j(e.p, e.s) += 2.0 * e.value * u[e.r];
        }
    }
    return j;
}

Eigen::MatrixXd cub_jacobian(const CubTensor& h, const Eigen::VectorXd& u) {
    // Differentiate the symmetric form sum over distinct permutations of u_r u_s u_t.
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(h.size(), h.size());
    for (const auto& e : h.entries()) {
        const int r = e.r, s = e.s, t = e.t;
        const double v = e.value;
        if (r == s && s == t) {
            j(e.p, r) += 3.0 * v * u[r] * u[r];
        } else if (r == s) {
            // 3 u_r^2 u_t
            j(e.p, r) += 6.0 * v * u[r] * u[t];
            j(e.p, t) += 3.0 * v * u[r] * u[r];
        } else if (s == t) {
            j(e.p, r) += 3.0 * v * u[s] * u[s];
            j(e.p, s) += 6.0 * v * u[r] * u[s];
        } else {
            j(e.p, r) += 6.0 * v * u[s] * u[t];
            j(e.p, s) += 6.0 * v * u[r] * u[t];
            j(e.p, t) += 6.0 * v * u[r] * u[s];
        }
    }
    return j;
}

SparseMatrix read_matrix_market(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty Matrix Market file: " + path);
    std::string banner, object, format, field, symmetry;
    {
        std::istringstream hs(line);
        hs >> banner >> object >> format >> field >> symmetry;
    }
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(), ::tolower);
        return s;
    };
    if (banner != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate")
        throw ParseError("not a Matrix Market coordinate file: " + path);
    field = lower(field);
    symmetry = lower(symmetry);
    if (field != "real" && field != "integer" && field != "double")
        throw ParseError("unsupported Matrix Market field '" + field + "' in " + path);
    if (symmetry != "general" && symmetry != "symmetric")
        throw ParseError("unsupported Matrix Market symmetry '" + symmetry + "' in " + path);
    const bool sym = symmetry == "symmetric";

    long rows = -1, cols = -1, nnz = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        if (!(ss >> rows >> cols >> nnz)) throw ParseError("bad size line in " + path);
        break;
    }
    if (rows <= 0 || cols <= 0 || nnz < 0) throw ParseError("missing size line in " + path);

    std::vector<Triplet> trips;
    trips.reserve(sym ? 2 * nnz : nnz);
    long count = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        long i, j;
        double v;
        if (!(ss >> i >> j >> v)) throw ParseError("bad entry line in " + path + ": " + line);
        if (i < 1 || i > rows || j < 1 || j > cols)
            throw ParseError("entry index out of range in " + path + ": " + line);
        trips.emplace_back(int(i - 1), int(j - 1), v);
        if (sym && i != j) trips.emplace_back(int(j - 1), int(i - 1), v);
        ++count;
    }
    if (count != nnz)
        throw ParseError("entry count mismatch in " + path + ": header says " +
                         std::to_string(nnz) + ", found " + std::to_string(count));
    SparseMatrix a(rows, cols);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    return a;
}

void write_matrix_market(const std::string& path, const SparseMatrix& a) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ParseError("cannot write file: " + path);
    std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
    std::fprintf(f, "%ld %ld %ld\n", long(a.rows()), long(a.cols()), long(a.nonZeros()));
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it)
            std::fprintf(f, "%ld %ld %.17g\n", long(it.row() + 1), long(it.col() + 1), it.value());
    std::fclose(f);
}

QuadTensor read_quad_tensor(const std::string& path, int n) {
    auto in = open_input(path);
    QuadTensor g(n);
    std::string line;
    while (std::getline(in, line)) {
        if (skip_line(line)) continue;
        std::istringstream ss(line);
        long p, r, s;
        double v;
        if (!(ss >> p >> r >> s >> v))
            throw ParseError("bad quadratic tensor line in " + path + ": " + line);
        g.add(int(p - 1), int(r - 1), int(s - 1), v);
    }
    g.finalize();
    return g;
}

CubTensor read_cub_tensor(const std::string& path, int n) {
    auto in = open_input(path);
    CubTensor h(n);
    std::string line;
    while (std::getline(in, line)) {
        if (skip_line(line)) continue;
        std::istringstream ss(line);
        long p, r, s, t;
        double v;
        if (!(ss >> p >> r >> s >> t >> v))
            throw ParseError("bad cubic tensor line in " + path + ": " + line);
        h.add(int(p - 1), int(r - 1), int(s - 1), int(t - 1), v);
    }
    h.finalize();
    return h;
}

void write_quad_tensor(const std::string& path, const QuadTensor& g) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ParseError("cannot write file: " + path);
    std::fprintf(f, "# quadratic tensor, n = %d, r <= s\n", g.size());
    for (const auto& e : g.entries())
        std::fprintf(f, "%d %d %d %.17g\n", e.p + 1, e.r + 1, e.s + 1, e.value);
    std::fclose(f);
}

void write_cub_tensor(const std::string& path, const CubTensor& h) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ParseError("cannot write file: " + path);
    std::fprintf(f, "# cubic tensor, n = %d, r <= s <= t\n", h.size());
    for (const auto& e : h.entries())
        std::fprintf(f, "%d %d %d %d %.17g\n", e.p + 1, e.r + 1, e.s + 1, e.t + 1, e.value);
    std::fclose(f);
}

bool is_symmetric(const SparseMatrix& a, double rel_tol) {
    if (a.rows() != a.cols()) return false;
    SparseMatrix at = a.transpose();
    SparseMatrix d = a - at;
    double dmax = 0.0, amax = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(d, k); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) amax = std::max(amax, std::abs(it.value()));
    return dmax <= rel_tol * amax;
}

}  // namespace imrom
