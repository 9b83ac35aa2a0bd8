#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace imrom {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Sparse symmetric quadratic tensor G^p_{rs}. Entries are stored once with r <= s;
// the (s, r) partner is implied. Indices are 0-based.
struct QuadEntry {
    int p, r, s;
    double value;
};

class QuadTensor {
public:
    QuadTensor() = default;
    explicit QuadTensor(int n) : n_(n) {}

    // Accumulates into G^p_{rs}; (r, s) may be given in any order.
    void add(int p, int r, int s, double value);
    // Sorts, merges duplicates and drops exact zeros. No add() afterwards.
    void finalize();

    int size() const { return n_; }
    bool finalized() const { return finalized_; }
    const std::vector<QuadEntry>& entries() const { return entries_; }
    std::size_t nnz() const { return entries_.size(); }

private:
    int n_ = 0;
    bool finalized_ = false;
    std::vector<QuadEntry> entries_;
};

// Sparse symmetric cubic tensor H^p_{rst}, stored with r <= s <= t.
struct CubEntry {
    int p, r, s, t;
    double value;
};

class CubTensor {
public:
    CubTensor() = default;
    explicit CubTensor(int n) : n_(n) {}

    void add(int p, int r, int s, int t, double value);
    void finalize();

    int size() const { return n_; }
    bool finalized() const { return finalized_; }
    const std::vector<CubEntry>& entries() const { return entries_; }
    std::size_t nnz() const { return entries_.size(); }

private:
    int n_ = 0;
    bool finalized_ = false;
    std::vector<CubEntry> entries_;
};

// out_p = sum_{r,s} G^p_{rs} a_r b_s with the symmetric completion of G.
Eigen::VectorXd contract_quad(const QuadTensor& g, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b);
Eigen::VectorXcd contract_quad(const QuadTensor& g, const Eigen::VectorXcd& a,
                               const Eigen::VectorXcd& b);

// out_p = sum_{r,s,t} H^p_{rst} a_r b_s c_t with the symmetric completion of H.
Eigen::VectorXd contract_cub(const CubTensor& h, const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b, const Eigen::VectorXd& c);
Eigen::VectorXcd contract_cub(const CubTensor& h, const Eigen::VectorXcd& a,
                              const Eigen::VectorXcd& b, const Eigen::VectorXcd& c);

// d/dU [G(U,U)] = 2 G(U, .) as a dense N x N matrix.
Eigen::MatrixXd quad_jacobian(const QuadTensor& g, const Eigen::VectorXd& u);
// d/dU [H(U,U,U)] = 3 H(U, U, .) as a dense N x N matrix.
Eigen::MatrixXd cub_jacobian(const CubTensor& h, const Eigen::VectorXd& u);

// Matrix Market coordinate files (real, general or symmetric).
SparseMatrix read_matrix_market(const std::string& path);
// Writes a general coordinate file with round-trip precision.
void write_matrix_market(const std::string& path, const SparseMatrix& a);

// Tensor text files: one nonzero per line, "p r s value" (quadratic) or
// "p r s t value" (cubic), 1-based, '#' starts a comment.
QuadTensor read_quad_tensor(const std::string& path, int n);
CubTensor read_cub_tensor(const std::string& path, int n);
void write_quad_tensor(const std::string& path, const QuadTensor& g);
void write_cub_tensor(const std::string& path, const CubTensor& h);

// max |A - A^T| <= tol * max |A|
bool is_symmetric(const SparseMatrix& a, double rel_tol);

}  // namespace imrom
