#pragma once

#include <complex>
#include <string>
#include <vector>

namespace imrom {

// Sorted tuple of master reduced indices, 0-based. For n masters, index s < n stands
// for lambda of master s and s >= n for its conjugate.
using MultiIndex = std::vector<int>;

// Number of multi-indices of order p over 2n symbols: C(2n + p - 1, p).
long long count_multi_indices(int n, int p);

// All multi-indices of order p in lexicographic order.
std::vector<MultiIndex> enumerate_multi_indices(int n, int p);

// Swap s <-> s +- n in every slot and re-sort.
MultiIndex conjugate(const MultiIndex& index, int n);

// true when index == conjugate(index)
bool self_conjugate(const MultiIndex& index, int n);

// sigma_I = sum of lambda over the slots; lambda has size 2n.
std::complex<double> sigma(const MultiIndex& index, const std::vector<std::complex<double>>& lambda);

// Exponent vector e_s(I), size 2n.
std::vector<int> exponents(const MultiIndex& index, int n);
MultiIndex from_exponents(const std::vector<int>& e);

// All sub-multisets B of I with lo <= |B| <= hi, in lexicographic order.
std::vector<MultiIndex> sub_multisets(const MultiIndex& index, int lo, int hi);

// Multiset difference I - B (B must be contained in I).
MultiIndex difference(const MultiIndex& index, const MultiIndex& sub);

// Multiset union I + B.
MultiIndex merge(const MultiIndex& a, const MultiIndex& b);

// "{1,1,2}" with 1-based indices.
std::string to_string(const MultiIndex& index);

// Odd order and, after removing conjugate pairs, exactly one slot remains. Returns the
// remaining reduced index, or -1.
int trivial_resonance(const MultiIndex& index, int n);

}  // namespace imrom
