#pragma once

#include "imrom/tensor.hpp"

#include <string>

namespace imrom {

// M U'' + C U' + K U + G(U,U) + H(U,U,U) = 0
struct SecondOrderModel {
    std::string name;
    SparseMatrix M, C, K;
    QuadTensor G;
    CubTensor H;

    int size() const { return int(M.rows()); }
    bool damped() const { return C.nonZeros() > 0; }
};

// Checks dimensions, finalised tensors and symmetry of M, K (and C when present).
void validate_model(const SecondOrderModel& model, double sym_tol = 1e-10);

// K U + G(U,U) + H(U,U,U)
Eigen::VectorXd internal_force(const SecondOrderModel& model, const Eigen::VectorXd& u);
// K + 2 G(U, .) + 3 H(U, U, .)
Eigen::MatrixXd tangent_stiffness(const SecondOrderModel& model, const Eigen::VectorXd& u);

struct ModelFiles {
    std::string mass;
    std::string stiffness;
    std::string damping;    // optional
    std::string quadratic;  // optional
    std::string cubic;      // optional
};

SecondOrderModel load_model(const ModelFiles& files, double sym_tol = 1e-10);
// Writes M.mtx, K.mtx, C.mtx (if damped), G.txt, H.txt into dir.
void save_model(const SecondOrderModel& model, const std::string& dir);

}  // namespace imrom
