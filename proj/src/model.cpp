#include "imrom/model.hpp"

#include "imrom/errors.hpp"

#include <filesystem>

namespace imrom {

void validate_model(const SecondOrderModel& model, double sym_tol) {
    const int n = model.size();
    if (n == 0) throw ModelError("model has no degrees of freedom");
    auto square = [n](const SparseMatrix& a, const char* name) {
        if (a.rows() != n || a.cols() != n)
            throw ModelError(std::string(name) + " has shape " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + ", expected " + std::to_string(n) + "x" +
                             std::to_string(n));
    };
    square(model.M, "M");
    square(model.K, "K");
    if (model.C.rows() != 0 || model.C.cols() != 0) square(model.C, "C");
    if (!is_symmetric(model.M, sym_tol)) throw ModelError("mass matrix is not symmetric");
    if (!is_symmetric(model.K, sym_tol)) throw ModelError("stiffness matrix is not symmetric");
    // C may be non-symmetric; its modal coupling is screened by the eigen solver
    Eigen::SimplicialLLT<SparseMatrix> mass(model.M);
    if (mass.info() != Eigen::Success) throw ModelError("mass matrix is not positive definite");
    if (model.G.size() != n || !model.G.finalized())
        throw ModelError("quadratic tensor missing, unfinalised or of wrong size");
    if (model.H.size() != n || !model.H.finalized())
        throw ModelError("cubic tensor missing, unfinalised or of wrong size");
}

Eigen::VectorXd internal_force(const SecondOrderModel& model, const Eigen::VectorXd& u) {
    return model.K * u + contract_quad(model.G, u, u) + contract_cub(model.H, u, u, u);
}

Eigen::MatrixXd tangent_stiffness(const SecondOrderModel& model, const Eigen::VectorXd& u) {
    return Eigen::MatrixXd(model.K) + quad_jacobian(model.G, u) + cub_jacobian(model.H, u);
}

SecondOrderModel load_model(const ModelFiles& files, double sym_tol) {
    if (files.mass.empty() || files.stiffness.empty())
        throw ParseError("model needs at least a mass and a stiffness file");
    SecondOrderModel m;
    m.name = std::filesystem::path(files.mass).parent_path().filename().string();
    m.M = read_matrix_market(files.mass);
    m.K = read_matrix_market(files.stiffness);
    const int n = int(m.M.rows());
    if (!files.damping.empty())
        m.C = read_matrix_market(files.damping);
    else
        m.C = SparseMatrix(n, n);
    m.G = files.quadratic.empty() ? QuadTensor(n) : read_quad_tensor(files.quadratic, n);
    m.H = files.cubic.empty() ? CubTensor(n) : read_cub_tensor(files.cubic, n);
    if (!m.G.finalized()) m.G.finalize();
    if (!m.H.finalized()) m.H.finalize();
    validate_model(m, sym_tol);
    return m;
}

void save_model(const SecondOrderModel& model, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_matrix_market((fs::path(dir) / "M.mtx").string(), model.M);
    write_matrix_market((fs::path(dir) / "K.mtx").string(), model.K);
    if (model.damped()) write_matrix_market((fs::path(dir) / "C.mtx").string(), model.C);
    write_quad_tensor((fs::path(dir) / "G.txt").string(), model.G);
    write_cub_tensor((fs::path(dir) / "H.txt").string(), model.H);
}

}  // namespace imrom
