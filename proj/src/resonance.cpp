#include "imrom/resonance.hpp"

#include "imrom/errors.hpp"

#include <algorithm>
#include <cmath>

namespace imrom {

Style parse_style(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), ::tolower);
    if (s == "graph") return Style::Graph;
    if (s == "cnf") return Style::CNF;
    if (s == "rnf") return Style::RNF;
    if (s == "frnf") return Style::FRNF;
    throw ParseError("unknown parametrisation style '" + name + "' (graph, cnf, rnf, frnf)");
}

std::string style_name(Style style) {
    switch (style) {
        case Style::Graph: return "graph";
        case Style::CNF: return "cnf";
        case Style::RNF: return "rnf";
        case Style::FRNF: return "frnf";
    }
    return "?";
}

MasterSet make_master_set(const ModalBasis& basis, const std::vector<int>& modes) {
    if (modes.empty()) throw std::invalid_argument("at least one master mode is required");
    MasterSet m;
    m.modes = modes;
    for (int j : modes) {
        if (j < 0 || j >= basis.size())
            throw std::invalid_argument("master mode " + std::to_string(j + 1) +
                                        " is outside the computed basis");
        m.omega.push_back(basis.omega[j]);
    }
    std::vector<int> sorted = modes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("master modes must be distinct");
    m.lambda.resize(2 * modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k) {
        m.lambda[k] = basis.lambda(modes[k]);
        m.lambda[k + modes.size()] = basis.lambda(modes[k], true);
    }
    return m;
}

bool ResonanceSet::contains(int s) const { return std::binary_search(r.begin(), r.end(), s); }

namespace {

void insert(ResonanceSet& set, int s, ResonanceKind kind) {
    auto it = std::lower_bound(set.r.begin(), set.r.end(), s);
    if (it != set.r.end() && *it == s) return;
    const auto pos = it - set.r.begin();
    set.r.insert(it, s);
    set.kind.insert(set.kind.begin() + pos, kind);
}

}  // namespace

ResonanceSet classify_resonances(const MultiIndex& index, Style style, const MasterSet& masters,
                                 const ModalBasis& basis, double tol_rel) {
    const int n = masters.n();
    const double im_sigma = sigma(index, masters.lambda).imag();

    // Outer resonances: any computed slave mode, either sign.
    for (int k = 0; k < basis.size(); ++k) {
        if (std::find(masters.modes.begin(), masters.modes.end(), k) != masters.modes.end()) continue;
        const double im = basis.lambda(k).imag();
        if (std::abs(std::abs(im_sigma) - im) <= tol_rel * basis.omega[k]) {
            throw OuterResonanceError("monomial " + to_string(index) + " resonates with mode " +
                                          std::to_string(k + 1) + "; include mode " +
                                          std::to_string(k + 1) + " in the set of master modes",
                                      k + 1);
        }
    }

    ResonanceSet set;
    if (index.size() < 2) return set;

    if (style == Style::Graph) {
        for (int s = 0; s < 2 * n; ++s) insert(set, s, ResonanceKind::Graph);
        return set;
    }

    if (style == Style::FRNF) {
        if (n != 1)
            throw UnsupportedError("the full real normal form (frnf) is only available for a single master mode");
        // Sign-insensitive match: a sum of p terms +-omega can equal +-omega iff p is odd.
        if (index.size() % 2 == 1) {
            insert(set, 0, ResonanceKind::Trivial);
            insert(set, 1, ResonanceKind::Trivial);
        }
        return set;
    }

    const int trivial = trivial_resonance(index, n);
    if (trivial >= 0) insert(set, trivial, ResonanceKind::Trivial);
    for (int s = 0; s < 2 * n; ++s) {
        const double w = masters.omega[std::size_t(s % n)];
        if (std::abs(im_sigma - masters.lambda[std::size_t(s)].imag()) <= tol_rel * w)
            insert(set, s, s == trivial ? ResonanceKind::Trivial : ResonanceKind::Internal);
    }
    if (style == Style::RNF) {
        const auto base = set;
        for (std::size_t k = 0; k < base.r.size(); ++k) {
            const int s = base.r[k];
            insert(set, s < n ? s + n : s - n, base.kind[k]);
        }
    }
    return set;
}

}  // namespace imrom
