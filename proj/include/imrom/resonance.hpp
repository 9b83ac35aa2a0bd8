#pragma once

#include "imrom/multi_index.hpp"
#include "imrom/spectral.hpp"

#include <string>
#include <vector>

namespace imrom {

enum class Style { Graph, CNF, RNF, FRNF };

Style parse_style(const std::string& name);  // "graph", "cnf", "rnf", "frnf"
std::string style_name(Style style);

// The reduced spectrum seen by the parametrisation: n master modes and their 2n
// eigenvalues, plus the full computed basis for the outer-resonance check.
struct MasterSet {
    std::vector<int> modes;                    // 0-based indices into the basis
    std::vector<std::complex<double>> lambda;  // size 2n
    std::vector<double> omega;                 // size n

    int n() const { return int(modes.size()); }
    int mode_of(int s) const { return modes[std::size_t(s % n())]; }
};

MasterSet make_master_set(const ModalBasis& basis, const std::vector<int>& modes);

enum class ResonanceKind { Trivial, Internal, Graph };

struct ResonanceSet {
    std::vector<int> r;  // sorted reduced indices in [0, 2n)
    std::vector<ResonanceKind> kind;

    bool empty() const { return r.empty(); }
    std::size_t size() const { return r.size(); }
    bool contains(int s) const;
};

// Picks the resonant reduced indices of monomial I for the chosen style. Throws
// OuterResonanceError when I resonates with a computed mode that is not a master, and
// UnsupportedError for the real normal form with several masters.
ResonanceSet classify_resonances(const MultiIndex& index, Style style, const MasterSet& masters,
                                 const ModalBasis& basis, double tol_rel = 1e-3);

}  // namespace imrom
