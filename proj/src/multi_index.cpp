#include "imrom/multi_index.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace imrom {

long long count_multi_indices(int n, int p) {
    // C(2n + p - 1, p) computed incrementally; exact for the sizes used here.
    long long c = 1;
    const int m = 2 * n;
    for (int k = 1; k <= p; ++k) c = c * (m + k - 1) / k;
    return c;
}

std::vector<MultiIndex> enumerate_multi_indices(int n, int p) {
    std::vector<MultiIndex> out;
    if (p < 0 || n <= 0) return out;
    out.reserve(std::size_t(count_multi_indices(n, p)));
    const int m = 2 * n;
    MultiIndex cur(p, 0);
    if (p == 0) {
        out.push_back(cur);
        return out;
    }
    while (true) {
        out.push_back(cur);
        int k = p - 1;
        while (k >= 0 && cur[k] == m - 1) --k;
        if (k < 0) break;
        const int v = cur[k] + 1;
        for (int j = k; j < p; ++j) cur[j] = v;
    }
    return out;
}

MultiIndex conjugate(const MultiIndex& index, int n) {
    MultiIndex c(index.size());
    for (std::size_t k = 0; k < index.size(); ++k) c[k] = index[k] < n ? index[k] + n : index[k] - n;
    std::sort(c.begin(), c.end());
    return c;
}

bool self_conjugate(const MultiIndex& index, int n) { return conjugate(index, n) == index; }

std::complex<double> sigma(const MultiIndex& index,
                           const std::vector<std::complex<double>>& lambda) {
    std::complex<double> s = 0.0;
    for (int k : index) s += lambda.at(std::size_t(k));
    return s;
}

std::vector<int> exponents(const MultiIndex& index, int n) {
    std::vector<int> e(std::size_t(2 * n), 0);
    for (int k : index) ++e.at(std::size_t(k));
    return e;
}

MultiIndex from_exponents(const std::vector<int>& e) {
    MultiIndex out;
    for (std::size_t s = 0; s < e.size(); ++s)
        for (int k = 0; k < e[s]; ++k) out.push_back(int(s));
    return out;
}

std::vector<MultiIndex> sub_multisets(const MultiIndex& index, int lo, int hi) {
    // Distinct values with multiplicities, then odometer over the counts.
    std::vector<int> vals, mult;
    for (int k : index) {
        if (vals.empty() || vals.back() != k) {
            vals.push_back(k);
            mult.push_back(1);
        } else {
            ++mult.back();
        }
    }
    std::vector<MultiIndex> out;
    std::vector<int> take(vals.size(), 0);
    while (true) {
        int size = 0;
        for (int t : take) size += t;
        if (size >= lo && size <= hi) {
            MultiIndex b;
            for (std::size_t v = 0; v < vals.size(); ++v)
                for (int k = 0; k < take[v]; ++k) b.push_back(vals[v]);
            out.push_back(std::move(b));
        }
        std::size_t v = 0;
        while (v < vals.size() && take[v] == mult[v]) take[v++] = 0;
        if (v == vals.size()) break;
        ++take[v];
    }
    std::sort(out.begin(), out.end());
    return out;
}

MultiIndex difference(const MultiIndex& index, const MultiIndex& sub) {
    MultiIndex out;
    std::set_difference(index.begin(), index.end(), sub.begin(), sub.end(), std::back_inserter(out));
    if (out.size() + sub.size() != index.size())
        throw std::invalid_argument("difference: " + to_string(sub) + " not contained in " +
                                    to_string(index));
    return out;
}

MultiIndex merge(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex out;
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::string to_string(const MultiIndex& index) {
    std::ostringstream os;
    os << '{';
    for (std::size_t k = 0; k < index.size(); ++k) os << (k ? "," : "") << index[k] + 1;
    os << '}';
    return os.str();
}

int trivial_resonance(const MultiIndex& index, int n) {
    if (index.size() % 2 == 0) return -1;
    auto e = exponents(index, n);
    int which = -1;
    for (int j = 0; j < n; ++j) {
        const int net = e[std::size_t(j)] - e[std::size_t(j + n)];
        if (net == 0) continue;
        if (which != -1 || std::abs(net) != 1) return -1;
        which = net > 0 ? j : j + n;
    }
    return which;
}

}  // namespace imrom
